"""Adaptive Dormand-Prince 5(4) integrator with dense output.

Works in either time direction: a span with ``t_end < t_start`` is
integrated with negative steps, so terminal-value problems need no change
of variable at the call site.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonFiniteRHS, OutOfSpanError, StepBudgetExceeded, StepUnderflow

# Butcher tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84

# 5th-order weights equal row 7 (FSAL); E = b5 - b4 for the error estimate
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

# continuous extension (Hairer, Norsett & Wanner, dopri5 contd5)
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

SAFETY = 0.9
FAC_MIN, FAC_MAX = 0.2, 5.0
UNDERFLOW = 1e-14


@dataclass(frozen=True)
class IntegratorSettings:
    rtol: float = 1e-8
    atol: float = 1e-10
    h_init: float | None = None
    h_max: float | None = None
    max_steps: int = 200_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class OdeSolution:
    """Accepted steps plus per-step interpolation coefficients.

    ``coeffs[i]`` holds the five Hermite-like vectors of step
    ``times[i] -> times[i+1]``.
    """

    times: np.ndarray
    states: np.ndarray
    coeffs: np.ndarray
    stats: dict = field(default_factory=dict)

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def direction(self) -> float:
        return 1.0 if self.times[-1] > self.times[0] else -1.0

    def __call__(self, t):
        return dense_eval(self, t)


def _initial_step(f, t0, y0, f0, direction, rtol, atol, span):
    # Hairer's starting-step heuristic for a method of order 5
    sc = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / sc)
    d1 = np.max(np.abs(f0) / sc)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + direction * h0 * f0
    f1 = f(t0 + direction * h0, y1)
    d2 = np.max(np.abs(f1 - f0) / sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t_start: float,
    t_end: float,
    settings: IntegratorSettings | None = None,
) -> OdeSolution:
    """Integrate ``y' = f(t, y)`` from ``t_start`` to ``t_end``.

    The local error of each accepted step satisfies
    ``|err_i| <= max(atol, rtol * |y_i|)`` componentwise.
    """
    settings = settings or IntegratorSettings()
    rtol, atol = settings.rtol, settings.atol
    y = np.array(y0, dtype=float).ravel()
    t = float(t_start)
    t_end = float(t_end)
    if t == t_end:
        raise ValueError("integration span is empty")
    direction = 1.0 if t_end > t else -1.0
    span = abs(t_end - t)
    h_max = span if settings.h_max is None else min(abs(settings.h_max), span)
    h_min = UNDERFLOW * span

    nfev = 0

    def rhs(tt, yy):
        nonlocal nfev
        nfev += 1
        out = np.asarray(f(tt, yy), dtype=float).ravel()
        if not np.all(np.isfinite(out)):
            raise NonFiniteRHS(f"right-hand side is not finite at t={tt!r}")
        return out

    k1 = rhs(t, y)
    if settings.h_init is not None:
        h = min(abs(settings.h_init), h_max)
    else:
        h = min(_initial_step(rhs, t, y, k1, direction, rtol, atol, span), h_max)

    times = [t]
    states = [y.copy()]
    coeffs = []
    n_accept = n_reject = 0
    last_reject = False

    while direction * (t_end - t) > 0:
        if n_accept + n_reject >= settings.max_steps:
            raise StepBudgetExceeded(
                f"step budget of {settings.max_steps} exhausted at t={t!r}"
            )
        if h < h_min:
            raise StepUnderflow(f"step size {h:.3e} underflowed at t={t!r}")

        final = h >= abs(t_end - t)
        if final:
            h = abs(t_end - t)
        dt = direction * h

        k2 = rhs(t + C2 * dt, y + dt * (A21 * k1))
        k3 = rhs(t + C3 * dt, y + dt * (A31 * k1 + A32 * k2))
        k4 = rhs(t + C4 * dt, y + dt * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = rhs(t + C5 * dt, y + dt * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = rhs(t + dt, y + dt * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y_new = y + dt * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
        t_new = t_end if final else t + dt
        k7 = rhs(t_new, y_new)

        err = dt * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        scale = np.maximum(atol, rtol * np.maximum(np.abs(y), np.abs(y_new)))
        err_norm = float(np.max(np.abs(err) / scale)) if err.size else 0.0

        if err_norm <= 1.0:
            dy = y_new - y
            bspl = dt * k1 - dy
            coeffs.append(np.stack([
                y,
                dy,
                bspl,
                dy - dt * k7 - bspl,
                dt * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
            ]))
            t, y, k1 = t_new, y_new, k7
            times.append(t)
            states.append(y.copy())
            n_accept += 1
            fac = FAC_MAX if err_norm == 0 else min(FAC_MAX, max(FAC_MIN, SAFETY * err_norm ** -0.2))
            if last_reject:
                fac = min(fac, 1.0)
            h = min(h * fac, h_max)
            last_reject = False
        else:
            n_reject += 1
            h *= max(FAC_MIN, SAFETY * err_norm ** -0.2)
            last_reject = True

    stats = {"n_accepted": n_accept, "n_rejected": n_reject, "nfev": nfev}
    n = y.size
    return OdeSolution(
        times=np.array(times),
        states=np.array(states),
        coeffs=np.array(coeffs).reshape(len(coeffs), 5, n),
        stats=stats,
    )


def dense_eval(solution: OdeSolution, t) -> np.ndarray:
    """Evaluate the continuous extension at scalar or array ``t``.

    Returns shape ``(n,)`` for scalar ``t`` and ``(len(t), n)`` otherwise.
    Accepted step times return the stored state exactly.
    """
    times = solution.times
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    tq = np.atleast_1d(t_arr)
    lo, hi = min(times[0], times[-1]), max(times[0], times[-1])
    if np.any(tq < lo) or np.any(tq > hi) or not np.all(np.isfinite(tq)):
        raise OutOfSpanError(f"requested time outside solution span [{lo}, {hi}]")

    # orient as ascending so searchsorted applies in both directions
    if solution.direction > 0:
        asc = times
        idx = np.searchsorted(asc, tq, side="right") - 1
        idx = np.clip(idx, 0, len(times) - 2)
    else:
        asc = times[::-1]
        j = np.searchsorted(asc, tq, side="left")
        idx = len(times) - 1 - j
        idx = np.clip(idx, 0, len(times) - 2)

    t_a = times[idx]
    h = times[idx + 1] - t_a
    theta = ((tq - t_a) / h)[:, None]
    theta1 = 1.0 - theta
    c = solution.coeffs[idx]
    out = c[:, 0] + theta * (c[:, 1] + theta1 * (c[:, 2] + theta * (c[:, 3] + theta1 * c[:, 4])))

    exact_a = tq == t_a
    if np.any(exact_a):
        out[exact_a] = solution.states[idx[exact_a]]
    exact_b = tq == times[idx + 1]
    if np.any(exact_b):
        out[exact_b] = solution.states[idx[exact_b] + 1]
    return out[0] if scalar else out
