"""Run configuration: an INI file with fixed sections and keys.

Angles are given in degrees in the file and converted once when the
domain objects are built. Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import io
import math
from dataclasses import MISSING, dataclass, field, fields
from pathlib import Path

import numpy as np

from .aircraft import AircraftParams
from .constraints import ConstraintLimits
from .dopri import IntegratorSettings
from .errors import ConfigError, FlareLQTError
from .lqt import DEFAULT_GRID_POINTS, Horizon, TrackingWeights
from .simulation import LIMIT_MODES, SimConfig
from .trajectory import MODES, ApproachPlate, FlareInputs


@dataclass(frozen=True)
class AircraftSection:
    K_s: float
    T_s: float
    omega_s: float
    zeta: float
    V: float


@dataclass(frozen=True)
class PlateSection:
    X_g0: float
    h_g0: float
    X_t: float


@dataclass(frozen=True)
class FlareSection:
    h_f0: float
    nu_deg: float
    mode: str = "timed"
    X_dot: float | None = None


@dataclass(frozen=True)
class HorizonSection:
    t0: float
    t_f: float


@dataclass(frozen=True)
class WeightsSection:
    P: tuple
    Q: tuple
    R: float


@dataclass(frozen=True)
class InitialStateSection:
    h: float
    h_dot: float
    theta_deg: float
    theta_dot: float


@dataclass(frozen=True)
class SolverSection:
    rtol: float = 1e-8
    atol: float = 1e-10
    grid_points: int = DEFAULT_GRID_POINTS
    output_dt: float = 1e-3


@dataclass(frozen=True)
class LimitsSection:
    elevator_min_deg: float = -35.0
    elevator_max_deg: float = 15.0
    limit_mode: str = "record"


@dataclass(frozen=True)
class RunConfig:
    aircraft: AircraftSection
    plate: PlateSection
    flare: FlareSection
    horizon: HorizonSection
    weights: WeightsSection
    initial_state: InitialStateSection
    solver: SolverSection = field(default_factory=SolverSection)
    limits: LimitsSection = field(default_factory=LimitsSection)

    # --- domain objects -------------------------------------------------
    def aircraft_params(self) -> AircraftParams:
        a = self.aircraft
        return AircraftParams(a.K_s, a.T_s, a.omega_s, a.zeta, a.V)

    def approach_plate(self) -> ApproachPlate:
        return ApproachPlate(self.plate.X_g0, self.plate.h_g0, self.plate.X_t)

    def flare_inputs(self) -> FlareInputs:
        f = self.flare
        X_dot = self.aircraft.V if f.X_dot is None else f.X_dot
        return FlareInputs(f.h_f0, math.radians(f.nu_deg), X_dot, self.horizon.t0, self.horizon.t_f, f.mode)

    def horizon_obj(self) -> Horizon:
        return Horizon(self.horizon.t0, self.horizon.t_f)

    def tracking_weights(self) -> TrackingWeights:
        w = self.weights
        return TrackingWeights(np.array(w.P), np.array(w.Q), w.R)

    def integrator_settings(self) -> IntegratorSettings:
        return IntegratorSettings(rtol=self.solver.rtol, atol=self.solver.atol)

    def x0(self) -> tuple:
        s = self.initial_state
        return (s.h, s.h_dot, math.radians(s.theta_deg), s.theta_dot)

    def sim_config(self, x0=None) -> SimConfig:
        lim = self.limits
        return SimConfig(
            x0=tuple(self.x0() if x0 is None else x0),
            horizon=self.horizon_obj(),
            output_dt=self.solver.output_dt,
            elevator_limits=(math.radians(lim.elevator_min_deg), math.radians(lim.elevator_max_deg)),
            limit_mode=lim.limit_mode,
        )

    def constraint_limits(self) -> ConstraintLimits:
        return ConstraintLimits(elevator_band_deg=(self.limits.elevator_min_deg, self.limits.elevator_max_deg))

    def validate(self) -> None:
        """Re-check every module invariant reachable from this config."""
        try:
            self.aircraft_params().validate()
            plate = self.approach_plate()
            plate.validate()
            inputs = self.flare_inputs()
            inputs.validate(plate)
            self.horizon_obj()
            self.tracking_weights()
            self.integrator_settings()
            self.sim_config()
            self.constraint_limits()
        except (FlareLQTError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.solver.grid_points < 2:
            raise ConfigError("grid_points must be at least 2")


# the touchdown boundary state: on the ground, level, no sink, no pitch rate
TOUCHDOWN_STATE = np.zeros(4)


_SECTIONS = {
    "aircraft": AircraftSection,
    "plate": PlateSection,
    "flare": FlareSection,
    "horizon": HorizonSection,
    "weights": WeightsSection,
    "initial_state": InitialStateSection,
    "solver": SolverSection,
    "limits": LimitsSection,
}
_OPTIONAL_SECTIONS = {"solver", "limits"}


def _float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None


def _floats(section: str, key: str, raw: str, count: int) -> tuple:
    parts = [p for p in raw.replace(",", " ").split()]
    if len(parts) != count:
        raise ConfigError(f"[{section}] {key}: expected {count} numbers, got {len(parts)}")
    return tuple(_float(section, key, p) for p in parts)


def _parse_weights(items: dict) -> WeightsSection:
    allowed = {"P", "P_diag", "Q", "Q_diag", "R"}
    unknown = set(items) - allowed
    if unknown:
        raise ConfigError(f"[weights] unknown keys: {sorted(unknown)}")

    def matrix(name):
        full, diag = items.get(name), items.get(f"{name}_diag")
        if (full is None) == (diag is None):
            raise ConfigError(f"[weights] give exactly one of {name} or {name}_diag")
        if diag is not None:
            d = _floats("weights", f"{name}_diag", diag, 4)
            return tuple(tuple(d[i] if i == j else 0.0 for j in range(4)) for i in range(4))
        flat = _floats("weights", name, full, 16)
        return tuple(tuple(flat[4 * i:4 * i + 4]) for i in range(4))

    if "R" not in items:
        raise ConfigError("[weights] missing key R")
    return WeightsSection(matrix("P"), matrix("Q"), _float("weights", "R", items["R"]))


def _parse_section(name: str, items: dict):
    cls = _SECTIONS[name]
    known = {f.name: f for f in fields(cls)}
    unknown = set(items) - set(known)
    if unknown:
        raise ConfigError(f"[{name}] unknown keys: {sorted(unknown)}")
    kwargs = {}
    for key, f in known.items():
        if key not in items:
            if f.default is MISSING and f.default_factory is MISSING:
                raise ConfigError(f"[{name}] missing key {key}")
            continue
        raw = items[key]
        if key in ("mode", "limit_mode"):
            choices = MODES if key == "mode" else LIMIT_MODES
            if raw not in choices:
                raise ConfigError(f"[{name}] {key} must be one of {choices}, got {raw!r}")
            kwargs[key] = raw
        elif key == "grid_points":
            try:
                kwargs[key] = int(raw)
            except ValueError:
                raise ConfigError(f"[{name}] grid_points must be an integer") from None
        else:
            kwargs[key] = _float(name, key, raw)
    return cls(**kwargs)


def loads(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    unknown = set(parser.sections()) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    sections = {}
    for name in _SECTIONS:
        if not parser.has_section(name):
            if name in _OPTIONAL_SECTIONS:
                continue
            raise ConfigError(f"missing section [{name}]")
        items = dict(parser.items(name))
        sections[name] = _parse_weights(items) if name == "weights" else _parse_section(name, items)
    config = RunConfig(**sections)
    config.validate()
    return config


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def _is_diagonal(M: tuple) -> bool:
    return all(M[i][j] == 0.0 for i in range(4) for j in range(4) if i != j)


def dumps(config: RunConfig) -> str:
    """Serialize with shortest round-trip float formatting."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for name in _SECTIONS:
        section = getattr(config, name)
        parser.add_section(name)
        if name == "weights":
            for key in ("P", "Q"):
                M = getattr(section, key)
                if _is_diagonal(M):
                    parser.set(name, f"{key}_diag", ", ".join(repr(M[i][i]) for i in range(4)))
                else:
                    parser.set(name, key, ", ".join(repr(v) for row in M for v in row))
            parser.set(name, "R", repr(section.R))
            continue
        for f in fields(section):
            value = getattr(section, f.name)
            if value is None:
                continue
            parser.set(name, f.name, value if isinstance(value, str) else repr(value))
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def default_config() -> RunConfig:
    """Case I landing at the 10L approach: the shipped default scenario."""
    return RunConfig(
        aircraft=AircraftSection(K_s=-0.95, T_s=40.0, omega_s=1.0, zeta=0.5, V=256.0),
        plate=PlateSection(X_g0=-34346.0, h_g0=1800.0, X_t=3957.0),
        flare=FlareSection(h_f0=100.0, nu_deg=3.0, mode="timed"),
        horizon=HorizonSection(t0=0.0, t_f=20.0),
        weights=WeightsSection(
            P=tuple(tuple(v if i == j else 0.0 for j, v in enumerate((0.9, 0.01, 1.0, 1.0))) for i in range(4)),
            Q=tuple(tuple(v if i == j else 0.0 for j, v in enumerate((0.00067, 0.0265, 150.0, 65.0))) for i in range(4)),
            R=1.0,
        ),
        initial_state=InitialStateSection(h=95.0, h_dot=-14.0, theta_deg=math.degrees(-0.05), theta_dot=0.0),
    )
