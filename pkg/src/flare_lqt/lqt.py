"""Finite-horizon linear-quadratic tracking.

The Riccati matrix ``S`` and the feedforward vector ``v`` are integrated
backward from ``t_f`` as a single packed ODE (upper triangle of ``S``
followed by ``v``), which keeps ``K(t) = R^-1 B^T S(t)`` consistent inside
every Runge-Kutta stage of the ``v`` equation.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .aircraft import StateSpaceModel
from .dopri import IntegratorSettings, OdeSolution, dense_eval, integrate
from .errors import HorizonMismatch, InvalidParameterError, NonFiniteRHS, OutOfSpanError, RiccatiBlowUp

DEFAULT_GRID_POINTS = 2001
PSD_TOL = 1e-8


def _is_psd(M: np.ndarray, tol: float = PSD_TOL) -> bool:
    return bool(np.all(np.linalg.eigvalsh(0.5 * (M + M.T)) >= -tol * max(1.0, np.abs(M).max())))


@dataclass(frozen=True)
class TrackingWeights:
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __init__(self, P, Q, R):
        object.__setattr__(self, "P", np.atleast_2d(np.asarray(P, dtype=float)))
        object.__setattr__(self, "Q", np.atleast_2d(np.asarray(Q, dtype=float)))
        object.__setattr__(self, "R", np.atleast_2d(np.asarray(R, dtype=float)))
        self.validate()

    @classmethod
    def diagonal(cls, P_diag, Q_diag, R) -> "TrackingWeights":
        return cls(np.diag(P_diag), np.diag(Q_diag), R)

    def validate(self) -> None:
        for name in ("P", "Q"):
            M = getattr(self, name)
            if M.shape[0] != M.shape[1]:
                raise InvalidParameterError(f"{name} must be square")
            if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
                raise InvalidParameterError(f"{name} must be symmetric")
            if not _is_psd(M):
                raise InvalidParameterError(f"{name} must be positive semidefinite")
        R = self.R
        if R.shape[0] != R.shape[1] or not np.allclose(R, R.T):
            raise InvalidParameterError("R must be square and symmetric")
        if np.any(np.linalg.eigvalsh(R) <= 0):
            raise InvalidParameterError("R must be positive definite")


@dataclass(frozen=True)
class Horizon:
    t0: float
    t_f: float

    def __post_init__(self):
        if not self.t_f > self.t0:
            raise InvalidParameterError(f"t_f must exceed t0, got [{self.t0}, {self.t_f}]")

    @property
    def length(self) -> float:
        return self.t_f - self.t0


class _GainInterpolant:
    """Dense output of the backward solve mapped onto ``(K, R^-1 B^T v)``.

    ``K`` and the feedforward term are linear in the packed state, so the
    step polynomials can be mapped once and evaluated cheaply inside the
    closed-loop right-hand side.
    """

    def __init__(self, sol: OdeSolution, L: np.ndarray, m: int, n: int):
        # store ascending in time
        order = slice(None) if sol.direction > 0 else slice(None, None, -1)
        self.times = sol.times[order]
        self.states = sol.states[order] @ L.T
        coeffs = sol.coeffs @ L.T.reshape(1, *L.T.shape)
        if sol.direction < 0:
            # reversed step i runs t_{i+1} -> t_i; evaluate with theta measured from the
            # original start point, so keep original coefficients but flip step order
            coeffs = coeffs[::-1]
            self.step_start = sol.times[:-1][::-1]
            self.step_len = (sol.times[1:] - sol.times[:-1])[::-1]
        else:
            self.step_start = sol.times[:-1]
            self.step_len = np.diff(sol.times)
        self.coeffs = coeffs
        self._t_list = self.times.tolist()
        self.m, self.n = m, n

    def _eval(self, idx: np.ndarray, t: np.ndarray) -> np.ndarray:
        theta = ((t - self.step_start[idx]) / self.step_len[idx])[:, None]
        theta1 = 1.0 - theta
        c = self.coeffs[idx]
        out = c[:, 0] + theta * (c[:, 1] + theta1 * (c[:, 2] + theta * (c[:, 3] + theta1 * c[:, 4])))
        # exact hits on accepted step times return the mapped stored state
        hit = np.searchsorted(self.times, t)
        hit = np.clip(hit, 0, len(self.times) - 1)
        exact = self.times[hit] == t
        if np.any(exact):
            out[exact] = self.states[hit[exact]]
        return out

    def _eval_scalar(self, t: float) -> np.ndarray:
        tl = self._t_list
        i = min(max(bisect.bisect_right(tl, t) - 1, 0), len(tl) - 2)
        if tl[i] == t:
            return self.states[i]
        if tl[i + 1] == t:
            return self.states[i + 1]
        theta = (t - self.step_start[i]) / self.step_len[i]
        theta1 = 1.0 - theta
        c = self.coeffs[i]
        return c[0] + theta * (c[1] + theta1 * (c[2] + theta * (c[3] + theta1 * c[4])))

    def __call__(self, t):
        mn = self.m * self.n
        if np.ndim(t) == 0:
            out = self._eval_scalar(float(t))
            return out[:mn].reshape(self.m, self.n), out[mn:]
        t_arr = np.asarray(t, dtype=float).ravel()
        idx = np.clip(np.searchsorted(self.times, t_arr, side="right") - 1, 0, len(self.times) - 2)
        out = self._eval(idx, t_arr)
        return out[:, :mn].reshape(-1, self.m, self.n), out[:, mn:]


@dataclass(frozen=True)
class GainSchedule:
    grid: np.ndarray
    S: np.ndarray
    v: np.ndarray
    K_fb: np.ndarray
    dense: OdeSolution
    B: np.ndarray
    R_inv: np.ndarray
    horizon: Horizon
    weights: TrackingWeights
    _gains: _GainInterpolant = field(repr=False, compare=False)

    @property
    def n_states(self) -> int:
        return self.S.shape[1]

    def riccati(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``S(t)`` and ``v(t)`` off the output grid."""
        h = self.horizon
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < h.t0) or np.any(t_arr > h.t_f):
            raise OutOfSpanError(f"time outside horizon [{h.t0}, {h.t_f}]")
        return unpack(dense_eval(self.dense, t_arr), self.n_states)

    def gain_and_feedforward(self, t) -> tuple[np.ndarray, np.ndarray]:
        """``K(t)`` with shape ``(m, n)`` and ``R^-1 B^T v(t)`` with shape ``(m,)``.

        Array ``t`` adds a leading axis to both.
        """
        h = self.horizon
        if np.ndim(t) == 0:
            if not h.t0 <= t <= h.t_f:
                raise OutOfSpanError(f"time {t} outside horizon [{h.t0}, {h.t_f}]")
        elif np.any(np.asarray(t) < h.t0) or np.any(np.asarray(t) > h.t_f):
            raise OutOfSpanError(f"time outside horizon [{h.t0}, {h.t_f}]")
        return self._gains(t)


def pack(S: np.ndarray, v: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(S.shape[-1])
    return np.concatenate([S[iu], v])


def unpack(y: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`pack`; accepts a leading batch axis."""
    iu = np.triu_indices(n)
    n_tri = len(iu[0])
    y = np.asarray(y)
    S = np.zeros(y.shape[:-1] + (n, n))
    S[..., iu[0], iu[1]] = y[..., :n_tri]
    S[..., iu[1], iu[0]] = y[..., :n_tri]
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    return S, y[..., n_tri:n_tri + n].copy()


def solve_gains(
    model: StateSpaceModel,
    weights: TrackingWeights,
    reference: Callable[[float], np.ndarray],
    horizon: Horizon,
    settings: IntegratorSettings | None = None,
    grid_points: int = DEFAULT_GRID_POINTS,
    terminal_reference: np.ndarray | None = None,
) -> GainSchedule:
    """Integrate the Riccati and feedforward equations backward over ``horizon``.

    ``terminal_reference`` overrides ``reference(t_f)`` in the terminal
    condition ``v(t_f) = C^T P r_f``; the landing pipeline passes the
    all-zero touchdown state there.
    """
    A, B, C = model.A, model.B, model.C
    n = A.shape[0]
    if grid_points < 2:
        raise InvalidParameterError("grid_points must be at least 2")
    if weights.Q.shape != (C.shape[0],) * 2 or weights.P.shape != weights.Q.shape:
        raise InvalidParameterError("weight shapes do not match the output dimension")
    if weights.R.shape != (B.shape[1],) * 2:
        raise InvalidParameterError("R does not match the input dimension")

    R_inv = np.linalg.inv(weights.R)
    BRB = B @ R_inv @ B.T
    CtQC = C.T @ weights.Q @ C
    CtQ = C.T @ weights.Q
    G = R_inv @ B.T
    iu = np.triu_indices(n)
    n_tri = len(iu[0])

    def rhs(t, y):
        S = np.zeros((n, n))
        S[iu] = y[:n_tri]
        S = S + S.T - np.diag(np.diag(S))
        v = y[n_tri:]
        K = G @ S
        dS = -(A.T @ S + S @ A - S @ BRB @ S + CtQC)
        dv = -((A - B @ K).T @ v + CtQ @ reference(t))
        return np.concatenate([dS[iu], dv])

    r_f = reference(horizon.t_f) if terminal_reference is None else np.asarray(terminal_reference, float)
    S_f = C.T @ weights.P @ C
    v_f = C.T @ weights.P @ r_f
    try:
        sol = integrate(rhs, pack(S_f, v_f), horizon.t_f, horizon.t0, settings)
    except NonFiniteRHS as exc:
        raise RiccatiBlowUp(f"Riccati solution diverged before t0: {exc}") from exc

    grid = np.linspace(horizon.t0, horizon.t_f, grid_points)
    S, v = unpack(dense_eval(sol, grid), n)
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(v))):
        raise RiccatiBlowUp("non-finite Riccati solution on the output grid")
    m = B.shape[1]
    L = np.empty((m * n + m, n_tri + n))
    for j in range(n_tri + n):
        S_j, v_j = unpack(np.eye(n_tri + n)[j], n)
        L[:, j] = np.concatenate([(G @ S_j).ravel(), G @ v_j])
    gains = _GainInterpolant(sol, L, m, n)
    K_fb, _ = gains(grid)
    return GainSchedule(grid, S, v, K_fb, sol, B.copy(), R_inv, horizon, weights, gains)


def feedback_gain(schedule: GainSchedule, t: float) -> np.ndarray:
    """``K(t) = R^-1 B^T S(t)`` as an ``(m, n)`` array."""
    K, _ = schedule.gain_and_feedforward(float(t))
    return K


def control_law(schedule: GainSchedule, x, t: float) -> np.ndarray:
    """Optimal input ``-K(t) x + R^-1 B^T v(t)``, shape ``(m,)``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("state must be finite")
    K, ff = schedule.gain_and_feedforward(float(t))
    return -K @ x + ff


def check_covers(schedule: GainSchedule, horizon: Horizon) -> None:
    h = schedule.horizon
    if horizon.t0 < h.t0 or horizon.t_f > h.t_f:
        raise HorizonMismatch(
            f"gain schedule covers [{h.t0}, {h.t_f}] but [{horizon.t0}, {horizon.t_f}] was requested"
        )
