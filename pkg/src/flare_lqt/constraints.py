"""Landing constraint checks C1-C5 on a simulated flare.

Limits are kept in the units pilots quote them in (degrees, ft/min); the
simulation series are converted on the way in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .simulation import SimResult
from .trajectory import FlareGeometry

DESCRIPTIONS = {
    "C1": "exponential (smooth) reference trajectory",
    "C2": "touchdown descent rate magnitude [ft/min]",
    "C3": "touchdown pitch angle [deg]",
    "C4_alpha": "max |angle of attack| over the flare [deg]",
    "C4_alpha_rate": "max |rate of change of angle of attack| [deg/s]",
    "C5_min": "minimum elevator command [deg]",
    "C5_max": "maximum elevator command [deg]",
}


@dataclass(frozen=True)
class ConstraintLimits:
    descent_band_fpm: tuple = (60.0, 180.0)
    pitch_band_deg: tuple = (0.0, 10.0)
    pitch_deadband_deg: float = 0.5
    alpha_max_deg: float = 0.8 * 18.0
    alpha_rate_max_deg: float = 0.2 * 18.0
    elevator_band_deg: tuple = (-35.0, 15.0)

    def __post_init__(self):
        for name in ("descent_band_fpm", "pitch_band_deg", "elevator_band_deg"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} must be ordered, got {(lo, hi)}")
        if self.alpha_max_deg <= 0 or self.alpha_rate_max_deg <= 0 or self.pitch_deadband_deg < 0:
            raise ValueError("angle-of-attack limits must be positive")


@dataclass(frozen=True)
class ConstraintCheck:
    id: str
    bound_lo: float
    bound_hi: float
    measured: float
    passed: bool

    def __post_init__(self):
        object.__setattr__(self, "measured", float(self.measured))
        object.__setattr__(self, "passed", bool(self.passed))

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple
    touchdown_descent_fpm: float
    touchdown_pitch_deg: float
    max_abs_alpha_deg: float
    max_abs_alpha_rate_deg: float
    elevator_min_deg: float
    elevator_max_deg: float
    c1_by_design: bool

    @property
    def verdicts(self) -> dict:
        out = {}
        for c in self.checks:
            key = c.id.split("_")[0]
            out[key] = out.get(key, True) and c.passed
        return out

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def binding_constraint(self) -> str:
        """Id of the first failing check, or an empty string."""
        return next((c.id for c in self.checks if not c.passed), "")

    def check(self, id: str) -> ConstraintCheck:
        return next(c for c in self.checks if c.id == id)


def angle_of_attack(result: SimResult, X_dot: float) -> np.ndarray:
    """Reconstruct alpha = theta - atan(h_dot / X_dot) in radians.

    This is the flight-path-angle approximation; no aerodynamic model is
    involved.
    """
    return result.states[:, 2] - np.arctan(result.states[:, 1] / X_dot)


def validate(
    result: SimResult,
    geom: FlareGeometry,
    limits: ConstraintLimits | None = None,
    X_dot: float | None = None,
) -> ConstraintReport:
    limits = limits or ConstraintLimits()
    X_dot = geom.inputs.X_dot if X_dot is None else X_dot

    descent = abs(float(result.states[-1, 1])) * 60.0
    pitch = math.degrees(float(result.states[-1, 2]))
    alpha = np.degrees(angle_of_attack(result, X_dot))
    alpha_rate = np.gradient(alpha, result.times)
    max_alpha = float(np.abs(alpha).max())
    max_rate = float(np.abs(alpha_rate).max())
    u = np.degrees(np.asarray(result.raw_controls, dtype=float))
    u_min, u_max = float(u.min()), float(u.max())

    d_lo, d_hi = limits.descent_band_fpm
    p_lo, p_hi = limits.pitch_band_deg
    e_lo, e_hi = limits.elevator_band_deg
    checks = (
        ConstraintCheck("C1", math.nan, math.nan, 1.0 if geom.exponential else 0.0, bool(geom.exponential)),
        ConstraintCheck("C2", d_lo, d_hi, descent, d_lo <= descent <= d_hi),
        ConstraintCheck("C3", p_lo - limits.pitch_deadband_deg, p_hi, pitch,
                        p_lo - limits.pitch_deadband_deg <= pitch <= p_hi),
        ConstraintCheck("C4_alpha", -limits.alpha_max_deg, limits.alpha_max_deg, max_alpha,
                        max_alpha <= limits.alpha_max_deg),
        ConstraintCheck("C4_alpha_rate", -limits.alpha_rate_max_deg, limits.alpha_rate_max_deg, max_rate,
                        max_rate <= limits.alpha_rate_max_deg),
        ConstraintCheck("C5_min", e_lo, e_hi, u_min, e_lo <= u_min),
        ConstraintCheck("C5_max", e_lo, e_hi, u_max, u_max <= e_hi),
    )
    return ConstraintReport(
        checks=checks,
        touchdown_descent_fpm=descent,
        touchdown_pitch_deg=pitch,
        max_abs_alpha_deg=max_alpha,
        max_abs_alpha_rate_deg=max_rate,
        elevator_min_deg=u_min,
        elevator_max_deg=u_max,
        c1_by_design=bool(geom.exponential),
    )


def format_report(report: ConstraintReport) -> str:
    """Render the report as sectioned ``key = value`` text."""
    lines = ["[summary]", f"all_passed = {report.all_passed}",
             f"binding_constraint = {report.binding_constraint or 'none'}", ""]
    for c in report.checks:
        lines.append(f"[{c.id}]")
        lines.append(f"description = {DESCRIPTIONS[c.id]}")
        if c.id == "C1":
            lines.append("measured = satisfied by design" if c.passed else "measured = not exponential")
        else:
            lines.append(f"bound_lo = {c.bound_lo!r}")
            lines.append(f"bound_hi = {c.bound_hi!r}")
            lines.append(f"measured = {c.measured!r}")
        if c.id.startswith("C4"):
            lines.append("note = alpha reconstructed as theta - atan(h_dot / X_dot); rate per second")
        if c.id == "C3":
            lines.append("note = lower bound relaxed by the pitch dead-band")
        lines.append(f"verdict = {c.verdict}")
        lines.append("")
    return "\n".join(lines)
