"""Age-structured SEIRQ dynamics, costate equations and the optimality map.

States are stored as ``(5, 3)`` arrays with rows ``S, E, I, Q, N`` and one
column per age group (young, adults, elderly). Costates use the same layout
with rows ``lam_S, lam_E, lam_I, lam_Q, lam_N``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NUM_GROUPS = 3
STATE_ROWS = ("S", "E", "I", "Q", "N")
ADJOINT_ROWS = ("lam_S", "lam_E", "lam_I", "lam_Q", "lam_N")

S, E, I, Q, N = range(5)

# components in [-NEGATIVE_TOL * N, 0) count as round-off and are clamped to 0
NEGATIVE_TOL = 1e-9


class ModelDomainError(ValueError):
    """Raised when an input lies outside the model's domain."""


def _vec3(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (NUM_GROUPS,):
        raise ModelDomainError(f"{name} must have shape (3,), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class ModelParams:
    beta: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray
    tau: float
    total_population: float

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (NUM_GROUPS, NUM_GROUPS):
            raise ModelDomainError(f"beta must be 3x3, got {beta.shape}")
        if not np.array_equal(beta, beta.T):
            raise ModelDomainError("beta must be symmetric")
        sigma = _vec3(self.sigma, "sigma")
        gamma = _vec3(self.gamma, "gamma")
        for name, arr in (("beta", beta), ("sigma", sigma), ("gamma", gamma)):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ModelDomainError(f"{name} entries must be finite and nonnegative")
        if not np.isfinite(self.tau) or self.tau <= 0:
            raise ModelDomainError("tau must be positive")
        if not np.isfinite(self.total_population) or self.total_population <= 0:
            raise ModelDomainError("total_population must be positive")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "total_population", float(self.total_population))

    @classmethod
    def from_upper_triangle(cls, upper, sigma, gamma, tau, total_population):
        """Build from ``(b11, b12, b13, b22, b23, b33)``, reflecting into a full matrix."""
        b11, b12, b13, b22, b23, b33 = upper
        beta = np.array([[b11, b12, b13], [b12, b22, b23], [b13, b23, b33]], dtype=float)
        return cls(beta, sigma, gamma, tau, total_population)


@dataclass(frozen=True)
class StateVector:
    S: np.ndarray
    E: np.ndarray
    I: np.ndarray
    Q: np.ndarray
    N_group: np.ndarray

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "StateVector":
        arr = np.asarray(arr, dtype=float)
        return cls(*(arr[k].copy() for k in range(5)))

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.E, self.I, self.Q, self.N_group], dtype=float)

    @property
    def R(self) -> np.ndarray:
        return self.N_group - self.S - self.E - self.I - self.Q


@dataclass(frozen=True)
class AdjointVector:
    lam_S: np.ndarray
    lam_E: np.ndarray
    lam_I: np.ndarray
    lam_Q: np.ndarray
    lam_N: np.ndarray

    @classmethod
    def zeros(cls) -> "AdjointVector":
        return cls.from_array(np.zeros((5, NUM_GROUPS)))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "AdjointVector":
        arr = np.asarray(arr, dtype=float)
        return cls(*(arr[k].copy() for k in range(5)))

    def as_array(self) -> np.ndarray:
        return np.array([self.lam_S, self.lam_E, self.lam_I, self.lam_Q, self.lam_N], dtype=float)


@dataclass(frozen=True)
class CostConfig:
    """Total control cost ``B`` shared between groups by ``split``."""

    total_cost: float
    split: tuple = (0.40, 0.30, 0.30)

    def __post_init__(self):
        split = _vec3(self.split, "split")
        if not np.isfinite(self.total_cost) or self.total_cost < 0:
            raise ModelDomainError("total_cost must be finite and >= 0")
        if np.any(split < 0) or abs(split.sum() - 1.0) > 1e-12:
            raise ModelDomainError(f"split must be nonnegative and sum to 1, got {split.tolist()}")
        object.__setattr__(self, "total_cost", float(self.total_cost))
        object.__setattr__(self, "split", tuple(float(s) for s in split))

    @property
    def group_costs(self) -> np.ndarray:
        return self.total_cost * np.asarray(self.split)


def check_state(x: np.ndarray, total_population: float) -> np.ndarray:
    """Validate a ``(5, 3)`` state array, clamping round-off negatives to zero.

    Returns the (possibly clamped) array; raises :class:`ModelDomainError` on
    non-finite entries or negatives beyond the tolerance.
    """
    if not np.all(np.isfinite(x)):
        raise ModelDomainError("state contains non-finite values")
    neg = x < 0
    if neg.any():
        if np.any(x < -NEGATIVE_TOL * total_population):
            raise ModelDomainError(f"state component below tolerance: min {x.min():.6g}")
        x = np.where(neg, 0.0, x)
    return x


def _force_of_infection(x: np.ndarray, p: ModelParams) -> np.ndarray:
    return p.beta @ x[I] / p.total_population


def state_deriv(x: np.ndarray, u: np.ndarray, p: ModelParams) -> np.ndarray:
    """Array form of :func:`state_rhs` with no validation, used by the integrators."""
    new_cases = x[S] * _force_of_infection(x, p)
    sigma_e = p.sigma * x[E]
    quarantined = u * x[I]
    out = np.empty_like(x)
    out[S] = -new_cases
    out[E] = new_cases - sigma_e
    out[I] = sigma_e - p.gamma * x[I] - quarantined
    out[Q] = quarantined - p.tau * x[Q]
    out[N] = 0.0
    return out


def adjoint_deriv(lam: np.ndarray, x: np.ndarray, u: np.ndarray, p: ModelParams) -> np.ndarray:
    """Array form of :func:`adjoint_rhs` with no validation."""
    pop = p.total_population
    foi = _force_of_infection(x, p)
    gap = lam[S] - lam[E]
    out = np.empty_like(lam)
    out[S] = foi * gap
    out[E] = p.sigma * (lam[E] - lam[I])
    out[I] = u * (lam[I] - lam[Q]) + p.gamma * lam[I] - 1.0 + p.beta @ (x[S] * gap) / pop
    out[Q] = p.tau * lam[Q]
    out[N] = -np.sum(x[S] * foi * gap) / pop
    return out


def _controls(u) -> np.ndarray:
    u = _vec3(u, "u")
    if not np.all(np.isfinite(u)) or np.any(u < 0) or np.any(u > 1):
        raise ModelDomainError(f"controls must lie in [0, 1], got {u.tolist()}")
    return u


def _finite(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise ModelDomainError(f"{what} contains non-finite values")
    return arr


def state_rhs(state: StateVector, u, p: ModelParams) -> StateVector:
    """Time derivative of the reduced state system (R replaced by the group total)."""
    x = check_state(state.as_array(), p.total_population)
    return StateVector.from_array(state_deriv(x, _controls(u), p))


def adjoint_rhs(adj: AdjointVector, state: StateVector, u, p: ModelParams) -> AdjointVector:
    """Time derivative of the costates, ``-dH/dx`` for each state component."""
    x = check_state(state.as_array(), p.total_population)
    lam = _finite(adj.as_array(), "adjoint")
    return AdjointVector.from_array(adjoint_deriv(lam, x, _controls(u), p))


def hamiltonian_value(state: StateVector, adj: AdjointVector, u, p: ModelParams, c: CostConfig) -> float:
    x = check_state(state.as_array(), p.total_population)
    lam = _finite(adj.as_array(), "adjoint")
    u = _controls(u)
    b = c.group_costs
    infection = x[S] * _force_of_infection(x, p)
    terms = (
        b * u**2
        + u * x[I] * (lam[Q] - lam[I])
        + infection * (lam[E] - lam[S])
        + p.sigma * x[E] * (lam[I] - lam[E])
        + x[I] * (1.0 - p.gamma * lam[I])
        - p.tau * x[Q] * lam[Q]
    )
    return float(terms.sum())


def control_gradient(x: np.ndarray, lam: np.ndarray, u: np.ndarray, group_costs: np.ndarray) -> np.ndarray:
    """``dH/du`` for each group; arrays may carry a trailing time axis."""
    b = np.asarray(group_costs).reshape((NUM_GROUPS,) + (1,) * (np.ndim(u) - 1))
    return 2.0 * b * u + x[I] * (lam[Q] - lam[I])


def stationary_control(x: np.ndarray, lam: np.ndarray, group_costs: np.ndarray) -> np.ndarray:
    """Zero of ``dH/du`` before clamping; ``x`` and ``lam`` may carry a trailing time axis."""
    b = np.asarray(group_costs).reshape((NUM_GROUPS,) + (1,) * (x.ndim - 2))
    return x[I] * (lam[I] - lam[Q]) / (2.0 * b)


def control_map_array(x: np.ndarray, lam: np.ndarray, group_costs: np.ndarray) -> np.ndarray:
    return np.clip(stationary_control(x, lam, group_costs), 0.0, 1.0)


def optimal_control_map(state: StateVector, adj: AdjointVector, c: CostConfig) -> np.ndarray:
    b = c.group_costs
    if np.any(b <= 0):
        raise ModelDomainError("every group cost B_i must be positive")
    x = _finite(state.as_array(), "state")
    lam = _finite(adj.as_array(), "adjoint")
    with np.errstate(over="ignore"):
        return control_map_array(x, lam, b)
