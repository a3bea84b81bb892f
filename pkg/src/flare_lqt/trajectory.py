"""Glide-slope line and exponential flare-out reference.

Distances are in feet along the runway axis (origin at the runway
threshold), altitudes in feet, angles in radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NoRootError, TimeBeforeStartError

MODES = ("timed", "geometric")

ROOT_TOL = 1e-10  # ft


@dataclass(frozen=True)
class ApproachPlate:
    X_g0: float
    h_g0: float
    X_t: float

    def validate(self) -> None:
        if not all(math.isfinite(v) for v in (self.X_g0, self.h_g0, self.X_t)):
            raise InvalidParameterError("approach plate values must be finite")
        if self.h_g0 <= 0:
            raise InvalidParameterError(f"h_g0 must be positive, got {self.h_g0}")
        if self.X_t <= self.X_g0:
            raise InvalidParameterError("touchdown point must lie beyond the glide-slope start")


@dataclass(frozen=True)
class FlareInputs:
    h_f0: float
    nu_d: float
    X_dot: float
    t0: float = 0.0
    t_f: float = 20.0
    mode: str = "timed"

    def validate(self, plate: ApproachPlate) -> None:
        if self.mode not in MODES:
            raise InvalidParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 < self.h_f0 < plate.h_g0:
            raise InvalidParameterError("flare altitude must lie strictly between 0 and h_g0")
        if not self.nu_d < math.pi / 2 or self.nu_d < 0:
            raise InvalidParameterError(f"nu_d must lie in [0, pi/2), got {self.nu_d}")
        if self.X_dot <= 0:
            raise InvalidParameterError(f"X_dot must be positive, got {self.X_dot}")
        if not self.t_f > self.t0:
            raise InvalidParameterError("t_f must be later than t0")


@dataclass(frozen=True)
class ReferenceState:
    h_d: float
    h_dot_d: float
    theta_d: float = 0.0
    theta_dot_d: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.h_d, self.h_dot_d, self.theta_d, self.theta_dot_d])


@dataclass(frozen=True)
class FlareGeometry:
    """Solved flare constants.

    ``K`` is the decay rate actually used by the reference; ``K_geometric``
    and ``K_timed`` are both kept so the two selection rules can be compared.
    """

    X_f0: float
    K_x: float
    h_c: float
    K: float
    K_geometric: float
    K_timed: float
    inputs: FlareInputs
    plate: ApproachPlate
    exponential: bool = True

    @property
    def h_f0(self) -> float:
        return self.inputs.h_f0

    @property
    def t0(self) -> float:
        return self.inputs.t0

    def flare_altitude(self, X):
        """Desired altitude as a function of runway abscissa."""
        X = np.asarray(X, dtype=float)
        return -self.h_c + (self.h_f0 + self.h_c) * np.exp(-self.K_x * (X - self.X_f0))

    def reference(self, t) -> np.ndarray:
        """Reference 4-vector ``(h_d, h_dot_d, 0, 0)``; shape ``(4,)`` or ``(len(t), 4)``."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < self.t0):
            raise TimeBeforeStartError(f"reference requested before flare start t0={self.t0}")
        decay = (self.h_f0 + self.h_c) * np.exp(-self.K * (t_arr - self.t0))
        out = np.zeros(t_arr.shape + (4,))
        out[..., 0] = decay - self.h_c
        out[..., 1] = -self.K * decay
        return out


def glide_altitude(plate: ApproachPlate, nu_d: float, X):
    return -math.tan(nu_d) * (np.asarray(X, dtype=float) - plate.X_g0) + plate.h_g0


def _touchdown_residual(u: float, h_f0: float, slope: float, distance: float) -> float:
    # u = h_f0 + h_c; zero when the flare meets the ground at the touchdown point
    return (u - h_f0) - u * math.exp(-slope * distance / u)


def _solve_depth(h_f0: float, h_g0: float, slope: float, distance: float) -> float:
    f = lambda u: _touchdown_residual(u, h_f0, slope, distance)  # noqa: E731
    lo, hi = h_f0, h_f0 + h_g0
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo < 0 < f_hi):
        raise NoRootError(
            "no root: touchdown residual does not change sign on "
            f"u in ({lo:g}, {hi:g}] (f={f_lo:.3g}, {f_hi:.3g})"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid < 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo < 1e-9 * hi:
            break
    # secant polish inside the bracket
    u = lo if abs(f_lo) < abs(f_hi) else hi
    a, b, fa, fb = lo, hi, f_lo, f_hi
    for _ in range(20):
        fu = f(u)
        if abs(fu) < ROOT_TOL * 1e-3:
            break
        if fb == fa:
            break
        cand = b - fb * (b - a) / (fb - fa)
        if not lo <= cand <= hi:
            break
        a, fa, b, fb = b, fb, cand, f(cand)
        u = cand
    if abs(f(u)) >= ROOT_TOL:
        raise NoRootError(f"root solve stalled at u={u!r}, residual {f(u):.3g}")
    return u


def solve_flare_geometry(plate: ApproachPlate, inputs: FlareInputs) -> FlareGeometry:
    """Solve the slope-continuity, path-continuity and touchdown constraints."""
    plate.validate()
    inputs.validate(plate)
    slope = math.tan(inputs.nu_d)
    if slope <= 0:
        raise NoRootError("no root: a level glide slope never meets the flare exponentially")

    X_f0 = (plate.h_g0 - inputs.h_f0) / slope + plate.X_g0
    distance = plate.X_t - X_f0
    if distance <= 0:
        raise NoRootError(
            f"no root: touchdown point X_t={plate.X_t:g} lies before flare start X_f0={X_f0:g}"
        )

    u = _solve_depth(inputs.h_f0, plate.h_g0, slope, distance)
    h_c = u - inputs.h_f0
    K_x = slope / u
    K_geometric = K_x * inputs.X_dot
    K_timed = math.log(u / h_c) / (inputs.t_f - inputs.t0)
    K = K_timed if inputs.mode == "timed" else K_geometric
    return FlareGeometry(X_f0, K_x, h_c, K, K_geometric, K_timed, inputs, plate)


def reference_state(geom: FlareGeometry, t: float) -> ReferenceState:
    h_d, h_dot_d, _, _ = geom.reference(float(t))
    return ReferenceState(float(h_d), float(h_dot_d))


def touchdown_time(geom: FlareGeometry, K: float | None = None) -> float:
    """Time at which the reference altitude crosses zero."""
    K = geom.K if K is None else K
    return geom.t0 + math.log((geom.h_f0 + geom.h_c) / geom.h_c) / K
