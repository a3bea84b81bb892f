"""Linearized longitudinal (short-period) aircraft model.

State ordering is ``x = [h, h_dot, theta, theta_dot]`` in feet, seconds and
radians. The single input is the elevator deflection in radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

STATE_NAMES = ("h", "h_dot", "theta", "theta_dot")


@dataclass(frozen=True)
class AircraftParams:
    """Short-period parameters plus the constant approach airspeed.

    K_s : short-period gain [1/s]
    T_s : path time constant [s]
    omega_s : short-period resonant frequency [rad/s]
    zeta : short-period damping factor [-]
    V : approach airspeed [ft/s]
    """

    K_s: float
    T_s: float
    omega_s: float
    zeta: float
    V: float

    def validate(self) -> None:
        values = (self.K_s, self.T_s, self.omega_s, self.zeta, self.V)
        if not all(math.isfinite(v) for v in values):
            raise InvalidParameterError(f"non-finite aircraft parameter in {self}")
        if self.T_s <= 0:
            raise InvalidParameterError(f"T_s must be positive, got {self.T_s}")
        if self.omega_s <= 0:
            raise InvalidParameterError(f"omega_s must be positive, got {self.omega_s}")
        if self.V <= 0:
            raise InvalidParameterError(f"V must be positive, got {self.V}")
        if not 0 < self.zeta < 1:
            raise InvalidParameterError(f"zeta must lie in (0, 1), got {self.zeta}")


@dataclass(frozen=True)
class StateSpaceModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    params: AircraftParams | None = field(default=None)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def build_state_space(params: AircraftParams) -> StateSpaceModel:
    """Evaluate the closed-form (A, B, C) coefficients for ``params``.

    Only rows 2 and 4 of ``A`` carry physics; rows 1 and 3 are the
    kinematic shifts ``d/dt h = h_dot`` and ``d/dt theta = theta_dot``.
    """
    params.validate()
    Ks, Ts, w, z, V = params.K_s, params.T_s, params.omega_s, params.zeta, params.V

    A = np.zeros((4, 4))
    A[0, 1] = 1.0
    A[1, 1] = -1.0 / Ts
    A[1, 2] = V / Ts
    A[2, 3] = 1.0
    A[3, 1] = 1.0 / (V * Ts**2) - 2.0 * z * w / (V * Ts) + w**2 / V
    A[3, 2] = 2.0 * z * w / Ts - w**2 - 1.0 / Ts**2
    A[3, 3] = 1.0 / Ts - 2.0 * z * w

    B = np.zeros((4, 1))
    B[3, 0] = w**2 * Ks * Ts

    return StateSpaceModel(_readonly(A), _readonly(B), _readonly(np.eye(4)), params)


def dynamics(model: StateSpaceModel, x, delta_e) -> np.ndarray:
    """Return ``A x + B delta_e``."""
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(delta_e, dtype=float))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
        raise InvalidParameterError("state and elevator input must be finite")
    if x.shape != (model.n_states,) or u.shape != (model.n_inputs,):
        raise InvalidParameterError(f"expected state ({model.n_states},) and input ({model.n_inputs},)")
    return model.A @ x + model.B @ u


def characteristic_coefficients(model: StateSpaceModel | np.ndarray) -> np.ndarray:
    """Monic coefficients of ``det(sI - A)``, highest power first.

    Uses the Faddeev-LeVerrier recursion rather than eigenvalues: the model
    has a double pole at the origin, where eigenvalue solvers lose half the
    available digits.
    """
    A = model.A if isinstance(model, StateSpaceModel) else np.asarray(model, dtype=float)
    n = A.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    M = np.zeros_like(A)
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(A @ M) / k
    return coeffs
