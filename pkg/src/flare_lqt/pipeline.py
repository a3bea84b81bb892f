"""End-to-end runs: design -> gains -> closed loop -> constraint report.

Also hosts the initial-condition sweep, which needs the whole chain.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .aircraft import StateSpaceModel, build_state_space
from .config import TOUCHDOWN_STATE, RunConfig
from .constraints import ConstraintLimits, ConstraintReport, validate
from .errors import FlareLQTError
from .lqt import GainSchedule, solve_gains
from .simulation import SimConfig, SimResult, simulate, simulate_batch
from .trajectory import FlareGeometry, solve_flare_geometry


@dataclass(frozen=True)
class PipelineRun:
    config: RunConfig
    model: StateSpaceModel
    geometry: FlareGeometry
    schedule: GainSchedule
    result: SimResult
    report: ConstraintReport


def design(config: RunConfig) -> FlareGeometry:
    return solve_flare_geometry(config.approach_plate(), config.flare_inputs())


def solve(config: RunConfig, model: StateSpaceModel, geom: FlareGeometry) -> GainSchedule:
    return solve_gains(
        model,
        config.tracking_weights(),
        geom.reference,
        config.horizon_obj(),
        config.integrator_settings(),
        grid_points=config.solver.grid_points,
        terminal_reference=TOUCHDOWN_STATE,
    )


def run(config: RunConfig) -> PipelineRun:
    model = build_state_space(config.aircraft_params())
    geom = design(config)
    schedule = solve(config, model, geom)
    result = simulate(model, schedule, geom, config.sim_config(), config.integrator_settings())
    report = validate(result, geom, config.constraint_limits())
    return PipelineRun(config, model, geom, schedule, result, report)


@dataclass(frozen=True)
class RegionResult:
    """Feasibility of each (altitude offset, pitch offset) start condition.

    ``feasible[i, j]`` refers to ``dh_grid[i]`` and ``dtheta_grid[j]``.
    Boundaries are the largest symmetric offsets along each axis for which
    every tested cell from the origin outward is feasible; NaN when the
    unperturbed start itself fails.
    """

    dh_grid: np.ndarray
    dtheta_grid: np.ndarray
    feasible: np.ndarray
    binding: np.ndarray
    boundary_dh: float
    boundary_dtheta: float

    def rows(self):
        for i, dh in enumerate(self.dh_grid):
            for j, dth in enumerate(self.dtheta_grid):
                yield float(dh), float(dth), bool(self.feasible[i, j]), str(self.binding[i, j])


def _axis_boundary(offsets: np.ndarray, feasible: np.ndarray) -> float:
    mags = np.abs(offsets)
    reach = math.nan
    for r in np.unique(mags):
        if not np.all(feasible[mags == r]):
            break
        reach = float(r)
    return reach


def _judge(result: SimResult, geom: FlareGeometry, limits: ConstraintLimits) -> tuple[bool, str]:
    report = validate(result, geom, limits)
    saturated = bool(np.any(result.saturated))
    ok = report.all_passed and not saturated
    return ok, report.binding_constraint or ("saturation" if saturated else "")


def _sweep_chunk(model, schedule, geom, sim_config, x0s, settings, limits):
    try:
        results = simulate_batch(model, schedule, geom, sim_config, x0s, settings)
        return [_judge(r, geom, limits) for r in results]
    except FlareLQTError:
        pass
    out = []
    for x0 in x0s:
        try:
            r = simulate(model, schedule, geom, replace(sim_config, x0=tuple(x0)), settings)
            out.append(_judge(r, geom, limits))
        except FlareLQTError as exc:
            out.append((False, f"error: {type(exc).__name__}"))
    return out


def admissible_region(
    config: RunConfig,
    dh_grid,
    dtheta_grid,
    jobs: int = 1,
    chunk_size: int = 160,
) -> RegionResult:
    """Sweep start-altitude and pitch offsets around the nominal flare entry.

    Each cell starts at ``(h_f0 + dh, h_dot0, theta0 + dtheta, theta_dot0)``
    and is simulated in record mode; it is feasible when every constraint
    passes and the elevator never leaves its band.
    """
    dh_grid = np.asarray(dh_grid, dtype=float)
    dtheta_grid = np.asarray(dtheta_grid, dtype=float)
    model = build_state_space(config.aircraft_params())
    geom = design(config)
    schedule = solve(config, model, geom)
    settings = config.integrator_settings()
    limits = config.constraint_limits()
    base = config.sim_config()
    sim_config = replace(base, limit_mode="record")

    h_dot0, theta0, theta_dot0 = base.x0[1], base.x0[2], base.x0[3]
    x0s = np.array([
        (config.flare.h_f0 + dh, h_dot0, theta0 + math.radians(dth), theta_dot0)
        for dh in dh_grid
        for dth in dtheta_grid
    ])
    chunks = [x0s[k:k + chunk_size] for k in range(0, len(x0s), chunk_size)]
    args = (model, schedule, geom, sim_config)
    if jobs > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_chunk, *args, c, settings, limits) for c in chunks]
            verdicts = [v for f in futures for v in f.result()]
    else:
        verdicts = [v for c in chunks for v in _sweep_chunk(*args, c, settings, limits)]

    shape = (len(dh_grid), len(dtheta_grid))
    feasible = np.array([v[0] for v in verdicts], dtype=bool).reshape(shape)
    binding = np.array([v[1] for v in verdicts], dtype=object).reshape(shape)

    j0 = int(np.argmin(np.abs(dtheta_grid)))
    i0 = int(np.argmin(np.abs(dh_grid)))
    return RegionResult(
        dh_grid=dh_grid,
        dtheta_grid=dtheta_grid,
        feasible=feasible,
        binding=binding,
        boundary_dh=_axis_boundary(dh_grid, feasible[:, j0]),
        boundary_dtheta=_axis_boundary(dtheta_grid, feasible[i0, :]),
    )
