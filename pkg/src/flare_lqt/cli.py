"""``flare-lqt`` command-line interface.

Exit codes:
    0  success (for ``simulate``: every landing constraint passed)
    1  ``simulate`` finished but at least one constraint failed
    2  configuration could not be read or failed validation
    3  flare geometry has no solution
    4  gain (Riccati) solve failed
    5  closed-loop simulation failed
    6  output files could not be written
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfg
from .aircraft import build_state_space
from .constraints import format_report, validate
from .errors import ConfigError, FlareLQTError, NoRootError
from .pipeline import admissible_region, design, solve
from .serialize import (
    format_geometry,
    write_gains_csv,
    write_region_csv,
    write_report_csv,
    write_sim_csv,
    write_text,
)
from .simulation import simulate
from .trajectory import touchdown_time

log = logging.getLogger("flare_lqt")

EXIT_OK, EXIT_CONSTRAINTS, EXIT_CONFIG, EXIT_NO_ROOT, EXIT_GAINS, EXIT_SIM, EXIT_IO = range(7)


class StageError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(path) -> cfg.RunConfig:
    try:
        return cfg.load(path)
    except ConfigError as exc:
        raise StageError(EXIT_CONFIG, f"config error: {exc}") from exc


def _design(config):
    try:
        return design(config)
    except NoRootError as exc:
        raise StageError(EXIT_NO_ROOT, f"design failed, {exc}") from exc
    except FlareLQTError as exc:
        raise StageError(EXIT_CONFIG, f"design failed: {exc}") from exc


def _prepare_out(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StageError(EXIT_IO, f"cannot create output directory {out}: {exc}") from exc


def cmd_design(args) -> int:
    config = _load(args.config)
    geom = _design(config)
    out = Path(args.out)
    _prepare_out(out)
    write_text(out / "config.ini", cfg.dumps(config))
    write_text(out / "geometry.txt", format_geometry(geom))
    print(f"flare start X_f0 = {geom.X_f0:.1f} ft, h_c = {geom.h_c:.3f} ft, K_x = {geom.K_x:.4e} 1/ft")
    print(f"K = {geom.K:.4f} 1/s ({geom.inputs.mode}); geometric K = {geom.K_geometric:.4f}, "
          f"timed K = {geom.K_timed:.4f}; touchdown at t = {touchdown_time(geom):.2f} s")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _load(args.config)
    geom = _design(config)
    model = build_state_space(config.aircraft_params())
    try:
        schedule = solve(config, model, geom)
    except FlareLQTError as exc:
        raise StageError(EXIT_GAINS, f"gain solve failed: {exc}") from exc
    try:
        result = simulate(model, schedule, geom, config.sim_config(), config.integrator_settings())
    except FlareLQTError as exc:
        raise StageError(EXIT_SIM, f"simulation failed: {exc}") from exc
    report = validate(result, geom, config.constraint_limits())

    out = Path(args.out)
    _prepare_out(out)
    write_text(out / "config.ini", cfg.dumps(config))
    write_text(out / "geometry.txt", format_geometry(geom))
    write_gains_csv(schedule, out / "gains.csv")
    write_sim_csv(result, out / "sim.csv")
    write_text(out / "report.txt", format_report(report))
    write_report_csv(report, out / "report.csv")
    if not args.no_plots:
        from .plots import plot_simulation

        plot_simulation(result, out / "plots")

    for c in report.checks:
        print(f"{c.id:<14} {c.verdict}  measured={c.measured:.4g}")
    print(f"J = {result.J:.6g}; outputs in {out}")
    return EXIT_OK if report.all_passed else EXIT_CONSTRAINTS


def cmd_region(args) -> int:
    config = _load(args.config)
    if args.cells < 2:
        raise StageError(EXIT_CONFIG, "--cells must be at least 2")
    _design(config)
    dh = np.linspace(-args.dh_max, args.dh_max, args.cells)
    dth = np.linspace(-args.dtheta_max, args.dtheta_max, args.cells)
    try:
        region = admissible_region(config, dh, dth, jobs=args.jobs)
    except FlareLQTError as exc:
        raise StageError(EXIT_GAINS, f"region sweep could not start: {exc}") from exc

    out = Path(args.out)
    _prepare_out(out)
    write_text(out / "config.ini", cfg.dumps(config))
    write_region_csv(region, out / "region.csv")
    if not args.no_plots:
        from .plots import plot_region

        plot_region(region, out / "plots" / "region.svg")
    print(f"{int(region.feasible.sum())}/{region.feasible.size} cells feasible; "
          f"boundary dh = {region.boundary_dh:g} ft, dtheta = {region.boundary_dtheta:g} deg")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flare-lqt", description="Finite-time LQT landing flare toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="INI run configuration")
        p.add_argument("--out", default="flare_out", help="output directory (default: flare_out)")
        p.add_argument("--no-plots", action="store_true", help="skip SVG figures")

    p = sub.add_parser("design", help="solve the flare geometry")
    common(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="design, solve gains, simulate and validate")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("region", help="sweep initial altitude/pitch offsets")
    common(p)
    p.add_argument("--dh-max", type=float, default=40.0, help="altitude offset half-range [ft]")
    p.add_argument("--dtheta-max", type=float, default=2.0, help="pitch offset half-range [deg]")
    p.add_argument("--cells", type=int, default=21, help="grid cells per axis")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_region)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except StageError as exc:
        print(f"flare-lqt: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"flare-lqt: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
