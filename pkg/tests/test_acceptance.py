"""Acceptance criteria; each test prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the terminal summary.
"""
import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from conftest import record_acceptance
from oracles import dp_tracking, flare_depth
from scipy.integrate import solve_ivp

from flare_lqt.aircraft import AircraftParams, StateSpaceModel, build_state_space, characteristic_coefficients
from flare_lqt.config import TOUCHDOWN_STATE
from flare_lqt.constraints import ConstraintLimits, validate
from flare_lqt.dopri import IntegratorSettings, integrate
from flare_lqt.lqt import Horizon, TrackingWeights, control_law, solve_gains
from flare_lqt.simulation import SimConfig, simulate, simulate_batch
from flare_lqt.trajectory import ApproachPlate, FlareInputs, solve_flare_geometry

TABLE_I = dict(K_s=-0.95, T_s=40.0, omega_s=1.0, zeta=0.5, V=256.0)
PLATE = ApproachPlate(X_g0=-34346.0, h_g0=1800.0, X_t=3957.0)
TARGET_X_F0, TARGET_K_X, TARGET_H_C, TARGET_K = -1908.0, 0.00049, 6.68, 0.1385
TARGET_DESCENT_FPM = 62.7
TARGET_ELEVATOR_DEG = (-22.3, 2.4)
TARGET_REGION = (20.0, 1.0)


def _fmt(checks):
    return "; ".join(f"{name}={'ok' if ok else 'NO'} ({info})" for name, ok, info in checks)


def _finish(number, checks):
    passed = all(ok for _, ok, _ in checks)
    record_acceptance(number, passed, _fmt(checks))
    assert passed, _fmt([c for c in checks if not c[1]])


def test_criterion_1_model_coefficients():
    m = build_state_space(AircraftParams(**TABLE_I))
    A, B = m.A, m.B
    F = {k: Fraction(str(v)) for k, v in TABLE_I.items()}
    T, w, z, V = F["T_s"], F["omega_s"], F["zeta"], F["V"]
    a42 = 1 / (V * T**2) - 2 * z * w / (V * T) + w**2 / V
    a43 = 2 * z * w / T - w**2 - 1 / T**2
    checks = [
        ("a22", A[1, 1] == -0.025, repr(float(A[1, 1]))),
        ("a23", A[1, 2] == 6.4, repr(float(A[1, 2]))),
        ("a44", A[3, 3] == -0.975, repr(float(A[3, 3]))),
        ("b4", B[3, 0] == -38.0, repr(float(B[3, 0]))),
        ("a42", abs(A[3, 1] / float(a42) - 1) <= 1e-12, f"{float(A[3, 1])!r}"),
        ("a43", abs(A[3, 2] / float(a43) - 1) <= 1e-12, f"{float(A[3, 2])!r}"),
    ]
    c = characteristic_coefficients(m)
    checks.append(("charpoly", np.max(np.abs(c - [1, 1, 1, 0, 0])) <= 1e-9, " ".join(f"{x:.3g}" for x in c)))

    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(1000):
        p = AircraftParams(
            K_s=rng.uniform(-3.0, -0.1), T_s=rng.uniform(2.0, 100.0), omega_s=rng.uniform(0.2, 6.0),
            zeta=rng.uniform(0.05, 0.99), V=rng.uniform(100.0, 500.0),
        )
        expect = np.array([1.0, 2 * p.zeta * p.omega_s, p.omega_s**2, 0.0, 0.0])
        got = characteristic_coefficients(build_state_space(p))
        worst = max(worst, float(np.max(np.abs(got - expect) / np.maximum(np.abs(expect), 1.0))))
    checks.append(("1000 draws", worst <= 1e-9, f"worst rel {worst:.1e}"))
    _finish(1, checks)


def test_criterion_2_trajectory_geometry():
    geo = solve_flare_geometry(PLATE, FlareInputs(h_f0=100.0, nu_d=math.radians(3.0), X_dot=256.0, mode="geometric"))
    timed = solve_flare_geometry(PLATE, FlareInputs(h_f0=100.0, nu_d=math.radians(3.0), X_dot=256.0, mode="timed"))
    X_f0, h_c, K_x = flare_depth(100.0, PLATE.h_g0, PLATE.X_g0, PLATE.X_t, math.radians(3.0))

    def rel(a, b):
        return abs(a - b) / abs(b)

    checks = [
        ("oracle h_c", abs(geo.h_c - h_c) <= 1e-8, f"{geo.h_c:.10f} vs bisection {h_c:.10f}"),
        ("oracle K_x", rel(geo.K_x, K_x) <= 1e-10, f"{geo.K_x:.6e}"),
        ("X_f0", abs(geo.X_f0 - TARGET_X_F0) <= 1.0, f"{geo.X_f0:.3f} vs {TARGET_X_F0}"),
        ("K_x", rel(geo.K_x, TARGET_K_X) <= 0.10, f"{geo.K_x:.4e} vs {TARGET_K_X}, {100 * rel(geo.K_x, TARGET_K_X):+.1f}%"),
        ("h_c", rel(geo.h_c, TARGET_H_C) <= 0.20, f"{geo.h_c:.3f} vs {TARGET_H_C}, {-100 * rel(geo.h_c, TARGET_H_C):.1f}%"),
        ("K geometric", rel(geo.K, TARGET_K) <= 0.15, f"{geo.K:.4f} vs {TARGET_K}, {100 * rel(geo.K, TARGET_K):.1f}% off"),
        ("K timed", rel(timed.K, TARGET_K) <= 0.15, f"{timed.K:.4f} vs {TARGET_K}, {100 * rel(timed.K, TARGET_K):.1f}% off"),
        ("h_d(20)", abs(timed.reference(20.0)[0]) <= 1e-8, f"{timed.reference(20.0)[0]:.2e} ft"),
    ]
    _finish(2, checks)


def _oscillator_error(rtol):
    sol = integrate(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], 0.0, 20.0,
                    IntegratorSettings(rtol=rtol, atol=rtol * 1e-2))
    err = np.max(np.abs(sol.states[-1] - [math.cos(20.0), -math.sin(20.0)]))
    return err, sol.stats["n_accepted"]


def test_criterion_3_integrator():
    sol = integrate(lambda t, y: -y, [1.0], 0.0, 1.0, IntegratorSettings(rtol=1e-10, atol=1e-12))
    decay_err = abs(sol.states[-1, 0] - math.exp(-1.0))

    data = [_oscillator_error(r) for r in (1e-6, 1e-7, 1e-8, 1e-9)]
    errs = np.log([d[0] for d in data])
    steps = np.log([d[1] for d in data])
    slope = -np.polyfit(steps, errs, 1)[0]

    settings = IntegratorSettings()
    f = lambda t, y: np.array([y[1], -y[0] - 0.1 * y[1]])  # noqa: E731
    y0 = np.array([1.0, 0.5])
    fwd = integrate(f, y0, 0.0, 10.0, settings)
    back = integrate(f, fwd.states[-1], 10.0, 0.0, settings)
    trip = float(np.max(np.abs(back.states[-1] - y0)))
    checks = [
        ("exp decay", decay_err <= 1e-8, f"err {decay_err:.1e}"),
        ("order slope", slope >= 4.5, f"{slope:.2f}"),
        ("round trip", trip <= 100 * settings.rtol, f"{trip:.1e} vs {100 * settings.rtol:.0e}"),
    ]
    _finish(3, checks)


def test_criterion_4_dp_oracle():
    rng = np.random.default_rng(4)
    worst = {"S": 0.0, "v": 0.0, "u_value": 0.0, "u_held": 0.0}
    for _ in range(20):
        n = int(rng.integers(2, 5))
        A = rng.normal(size=(n, n))
        B = rng.normal(size=(n, 1))
        C = np.eye(n)
        Mp, Mq = rng.normal(size=(n, n)), rng.normal(size=(int(rng.integers(1, n + 1)), n))
        P, Q = 0.5 * Mp.T @ Mp, Mq.T @ Mq
        R = np.array([[rng.uniform(0.5, 2.0)]])
        a, b = rng.normal(size=n), rng.normal(size=n)
        om, ph = rng.uniform(0.5, 2.0, n), rng.uniform(0.0, 2 * math.pi, n)

        def ref(t, a=a, b=b, om=om, ph=ph):
            return a + b * np.sin(om * t + ph)

        model = StateSpaceModel(A, B, C, None)
        sch = solve_gains(model, TrackingWeights(P, Q, R), ref, Horizon(0.0, 1.0), grid_points=11)
        S_dp, v_dp, L, g = dp_tracking(A, B, C, P, Q, R, ref, 0.0, 1.0, dt=1e-3)
        x0 = rng.normal(size=n)

        # control implied by the oracle's value function at t0
        u = control_law(sch, x0, 0.0)[0]
        u_value = float(-np.linalg.solve(R, B.T @ (S_dp @ x0 - v_dp))[0])
        # the first held input is the best constant over [0, dt]; compare it
        # with the continuous law at the middle of that interval
        xm = solve_ivp(lambda t, x: A @ x + B @ control_law(sch, x, t), (0.0, 5e-4), x0,
                       rtol=1e-12, atol=1e-14).y[:, -1]
        u_mid = control_law(sch, xm, 5e-4)[0]
        u_held = float((-L @ x0 + g)[0])

        worst["S"] = max(worst["S"], np.linalg.norm(S_dp - sch.S[0]) / np.linalg.norm(sch.S[0]))
        worst["v"] = max(worst["v"], np.linalg.norm(v_dp - sch.v[0]) / np.linalg.norm(sch.v[0]))
        worst["u_value"] = max(worst["u_value"], abs(u_value - u) / abs(u))
        worst["u_held"] = max(worst["u_held"], abs(u_held - u_mid) / abs(u_mid))
    checks = [(k, val <= 1e-3, f"worst rel {val:.1e}") for k, val in worst.items()]
    _finish(4, checks)


def test_criterion_5_riccati_structure(case1_run):
    sch = case1_run.schedule
    P = case1_run.config.tracking_weights().P
    asym = float(np.max(np.abs(sch.S - np.swapaxes(sch.S, 1, 2))))
    min_eig = float(np.min(np.linalg.eigvalsh(sch.S)))
    checks = [
        ("grid", len(sch.grid) == 2001, f"{len(sch.grid)} points"),
        ("symmetry", asym <= 1e-12, f"{asym:.1e}"),
        ("PSD", min_eig >= -1e-8, f"min eig {min_eig:.2e}"),
        ("S(t_f)=P", bool(np.array_equal(sch.S[-1], P)), "exact"),
        ("v(t_f)=0", bool(np.array_equal(sch.v[-1], np.zeros(4))), "exact"),
    ]
    _finish(5, checks)


def test_criterion_6_case1_reproduction(case1_run):
    res, rep = case1_run.result, case1_run.report
    descent = rep.touchdown_descent_fpm
    theta_f = rep.touchdown_pitch_deg
    lo, hi = rep.elevator_min_deg, rep.elevator_max_deg
    e_h = float(res.errors[-1, 0])
    checks = [
        ("descent band", 60.0 <= descent <= 180.0, f"{descent:.3f} ft/min"),
        ("descent vs target", abs(descent - TARGET_DESCENT_FPM) <= 0.25 * TARGET_DESCENT_FPM,
         f"{descent:.3f} vs {TARGET_DESCENT_FPM}"),
        ("theta_f", abs(theta_f) <= 0.5, f"{theta_f:.3f} deg"),
        ("elevator band", -35.0 < lo and hi < 15.0, f"[{lo:.2f}, {hi:.2f}] deg"),
        ("elevator extremes", abs(lo - TARGET_ELEVATOR_DEG[0]) <= 5.0 and abs(hi - TARGET_ELEVATOR_DEG[1]) <= 5.0,
         f"[{lo:.2f}, {hi:.2f}] vs {list(TARGET_ELEVATOR_DEG)}"),
        ("e_h(t_f)", abs(e_h) <= 1.0, f"{e_h:.3f} ft"),
    ]
    _finish(6, checks)


def test_criterion_7_admissible_region(case1_region, case1_region_tight):
    reg, tight = case1_region, case1_region_tight
    bh, bt = reg.boundary_dh, reg.boundary_dtheta

    def within2(x, ref):
        return math.isfinite(x) and ref / 2 <= x <= ref * 2

    nested = bool(np.all(~tight.feasible | reg.feasible))
    binding = sorted(set(reg.binding.ravel()))
    checks = [
        ("grid", reg.feasible.shape == (21, 21), f"{int(reg.feasible.sum())}/441 feasible, binding {binding}"),
        ("dh boundary", within2(bh, TARGET_REGION[0]), f"{bh:g} ft vs {TARGET_REGION[0]:g}"),
        ("dtheta boundary", within2(bt, TARGET_REGION[1]), f"{bt:g} deg vs {TARGET_REGION[1]:g}"),
        ("nesting", nested, f"tight {int(tight.feasible.sum())} within {int(reg.feasible.sum())}"),
    ]
    _finish(7, checks)


def _widen(lim: ConstraintLimits, f: float) -> ConstraintLimits:
    def band(lo, hi):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return (mid - f * half, mid + f * half)

    return ConstraintLimits(
        descent_band_fpm=band(*lim.descent_band_fpm),
        pitch_band_deg=band(*lim.pitch_band_deg),
        pitch_deadband_deg=lim.pitch_deadband_deg * f,
        alpha_max_deg=lim.alpha_max_deg * f,
        alpha_rate_max_deg=lim.alpha_rate_max_deg * f,
        elevator_band_deg=band(*lim.elevator_band_deg),
    )


def test_criterion_8_properties(case1_run):
    run = case1_run
    model, geom, sch = run.model, run.geometry, run.schedule
    horizon = run.config.horizon_obj()
    settings = run.config.integrator_settings()

    zero_sch = solve_gains(model, run.config.tracking_weights(), lambda t: np.zeros(4), horizon,
                           terminal_reference=TOUCHDOWN_STATE)
    z = simulate(model, zero_sch, geom, SimConfig((0.0, 0.0, 0.0, 0.0), horizon, output_dt=0.01), settings)
    zero_ok = not np.any(z.states) and not np.any(z.raw_controls)

    cfg = run.config.sim_config()
    xa = np.array(cfg.x0)
    xb = xa + np.array([8.0, 3.0, 0.02, -0.01])
    out = []
    for x0 in (xa, xb, 0.3 * xa + 0.7 * xb):
        out.append(simulate(model, sch, geom, replace(cfg, x0=tuple(x0), output_dt=0.01), settings).states)
    scale = np.max(np.abs(np.stack(out)), axis=(0, 1))
    affine_err = float(np.max(np.abs(out[2] - (0.3 * out[0] + 0.7 * out[1])) / scale))

    fine = simulate(model, sch, geom, replace(cfg, output_dt=0.5 * cfg.output_dt), settings)
    j_rel = abs(fine.J - run.result.J) / abs(fine.J)

    results = [run.result] + simulate_batch(
        model, sch, geom, cfg, [xa + d for d in ([20.0, 0, 0, 0], [-20.0, 0, 0, 0], [0, 0, 0.03, 0])], settings)
    base = run.config.constraint_limits()
    flips = 0
    for r in results:
        before = validate(r, geom, base)
        for f in (1.1, 1.5, 3.0, 10.0):
            after = validate(r, geom, _widen(base, f))
            flips += sum(b.passed and not a.passed for b, a in zip(before.checks, after.checks))
    checks = [
        ("zero run", zero_ok, "identically zero" if zero_ok else "nonzero"),
        ("affinity", affine_err <= 1e-6, f"max rel {affine_err:.1e}"),
        ("Simpson J", j_rel <= 1e-6, f"J={run.result.J:.6f}, halving changes {j_rel:.1e}"),
        ("widening", flips == 0, f"{flips} pass->fail flips"),
    ]
    _finish(8, checks)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
