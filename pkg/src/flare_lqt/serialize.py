"""Text and CSV formats written into a run bundle.

Floats are written with 17 significant digits so every value re-parses to
the identical double.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .constraints import ConstraintReport
from .lqt import GainSchedule
from .pipeline import RegionResult
from .simulation import SimResult
from .trajectory import ApproachPlate, FlareGeometry, FlareInputs, touchdown_time

FMT = "%.17g"

SIM_HEADER = [
    "t", "h", "h_dot", "theta", "theta_dot",
    "h_ref", "h_dot_ref", "theta_ref", "theta_dot_ref",
    "delta_e", "e_h", "e_hdot", "e_theta", "e_thetadot", "saturated",
]
REPORT_HEADER = ["id", "bound_lo", "bound_hi", "measured", "verdict"]
REGION_HEADER = ["dh_ft", "dtheta_deg", "feasible", "binding_constraint"]


def _g(x: float) -> str:
    return FMT % x


def gains_header(n: int = 4) -> list[str]:
    iu = np.triu_indices(n)
    cols = ["t"] + [f"S{i + 1}{j + 1}" for i, j in zip(*iu)]
    cols += [f"v{i + 1}" for i in range(n)]
    cols += [f"K{i + 1}" for i in range(n)]
    return cols


# --- geometry ------------------------------------------------------------

_GEOM_FLOATS = ("X_f0", "K_x", "h_c", "K", "K_geometric", "K_timed")
_INPUT_FLOATS = ("h_f0", "nu_d", "X_dot", "t0", "t_f")
_PLATE_FLOATS = ("X_g0", "h_g0", "X_t")


def format_geometry(geom: FlareGeometry) -> str:
    lines = ["[geometry]"]
    lines += [f"{k} = {_g(getattr(geom, k))}" for k in _GEOM_FLOATS]
    lines.append(f"exponential = {str(geom.exponential).lower()}")
    lines.append(f"touchdown_time = {_g(touchdown_time(geom))}")
    lines.append(f"touchdown_time_geometric = {_g(touchdown_time(geom, geom.K_geometric))}")
    lines.append(f"touchdown_time_timed = {_g(touchdown_time(geom, geom.K_timed))}")
    lines += ["", "[flare]"]
    lines += [f"{k} = {_g(getattr(geom.inputs, k))}" for k in _INPUT_FLOATS]
    lines.append(f"nu_deg = {_g(math.degrees(geom.inputs.nu_d))}")
    lines.append(f"mode = {geom.inputs.mode}")
    lines += ["", "[plate]"]
    lines += [f"{k} = {_g(getattr(geom.plate, k))}" for k in _PLATE_FLOATS]
    return "\n".join(lines) + "\n"


def parse_geometry(text: str) -> FlareGeometry:
    sections: dict[str, dict[str, str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("["):
            current = sections.setdefault(line.strip("[]"), {})
            continue
        key, _, value = line.partition("=")
        current[key.strip()] = value.strip()
    g, f, p = sections["geometry"], sections["flare"], sections["plate"]
    inputs = FlareInputs(*(float(f[k]) for k in _INPUT_FLOATS), mode=f["mode"])
    plate = ApproachPlate(*(float(p[k]) for k in _PLATE_FLOATS))
    return FlareGeometry(
        *(float(g[k]) for k in _GEOM_FLOATS),
        inputs=inputs,
        plate=plate,
        exponential=g["exponential"] == "true",
    )


# --- tables --------------------------------------------------------------

def _write_table(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_numeric(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    return header, data


def write_gains_csv(schedule: GainSchedule, path) -> None:
    n = schedule.n_states
    iu = np.triu_indices(n)
    K = schedule.K_fb[:, 0, :]
    table = np.column_stack([schedule.grid, schedule.S[:, iu[0], iu[1]], schedule.v, K])
    _write_table(path, gains_header(n), ([_g(x) for x in row] for row in table))


def read_gains_csv(path) -> dict[str, np.ndarray]:
    header, data = _read_numeric(path)
    return {name: data[:, k] for k, name in enumerate(header)}


def write_sim_csv(result: SimResult, path) -> None:
    e = result.errors
    table = np.column_stack([
        result.times, result.states, result.references,
        np.asarray(result.controls).reshape(len(result.times), -1)[:, 0],
        e, result.saturated.astype(float),
    ])

    def fmt(row):
        out = [_g(x) for x in row[:-1]]
        out.append(str(int(row[-1])))
        return out

    _write_table(path, SIM_HEADER, (fmt(row) for row in table))


def read_sim_csv(path) -> dict[str, np.ndarray]:
    header, data = _read_numeric(path)
    if header != SIM_HEADER:
        raise ValueError(f"unexpected sim.csv header: {header}")
    return {name: data[:, k] for k, name in enumerate(header)}


def write_report_csv(report: ConstraintReport, path) -> None:
    _write_table(path, REPORT_HEADER, (
        [c.id, _g(c.bound_lo), _g(c.bound_hi), _g(c.measured), c.verdict] for c in report.checks
    ))


def write_region_csv(region: RegionResult, path) -> None:
    _write_table(path, REGION_HEADER, (
        [_g(dh), _g(dth), "1" if ok else "0", binding] for dh, dth, ok, binding in region.rows()
    ))


def read_region_csv(path) -> list[tuple[float, float, bool, str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != REGION_HEADER:
            raise ValueError(f"unexpected region.csv header: {header}")
        return [(float(a), float(b), c == "1", d) for a, b, c, d in reader]


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
