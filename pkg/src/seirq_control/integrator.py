"""Fixed-step RK4 on a uniform grid: states forward, costates backward."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    NEGATIVE_TOL,
    AdjointVector,
    CostConfig,
    ModelParams,
    StateVector,
    adjoint_deriv,
    state_deriv,
)


class IntegrationError(RuntimeError):
    """Integration produced a non-finite or strongly negative value."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (grid index {index})")
        self.index = index


@dataclass(frozen=True)
class TimeGrid:
    horizon: float
    steps: int

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError("horizon must be positive")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError("steps must be an integer >= 2")
        object.__setattr__(self, "steps", int(self.steps))

    @classmethod
    def from_step(cls, horizon: float, step: float) -> "TimeGrid":
        steps = round(horizon / step)
        if steps < 2 or abs(steps * step - horizon) > 1e-9 * horizon:
            raise ValueError(f"step {step} does not divide horizon {horizon}")
        return cls(float(horizon), steps)

    @property
    def h(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.h

    def __len__(self):
        return self.steps + 1


@dataclass(frozen=True)
class ControlSchedule:
    """Controls sampled on a grid; ``values`` has shape ``(3, M + 1)``."""

    values: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (3, len(self.grid)):
            raise ValueError(f"control values must have shape (3, {len(self.grid)}), got {values.shape}")
        if not np.all(np.isfinite(values)) or values.min() < 0 or values.max() > 1:
            raise ValueError("controls must lie in [0, 1]")
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: TimeGrid, level=0.0) -> "ControlSchedule":
        level = np.broadcast_to(np.asarray(level, dtype=float), (3,))
        return cls(np.repeat(level[:, None], len(grid), axis=1), grid)

    @property
    def grid_step(self) -> float:
        return self.grid.h


@dataclass(frozen=True)
class Trajectory:
    """Samples of a ``(5, 3)`` vector at every grid point, shape ``(M + 1, 5, 3)``."""

    values: np.ndarray
    grid: TimeGrid

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self):
        return len(self.values)

    def state(self, k: int) -> StateVector:
        return StateVector.from_array(self.values[k])

    def adjoint(self, k: int) -> AdjointVector:
        return AdjointVector.from_array(self.values[k])

    # convenience views, shape (3, M + 1)
    def row(self, r: int) -> np.ndarray:
        return self.values[:, r, :].T


StateTrajectory = Trajectory
AdjointTrajectory = Trajectory


def sample(traj, t: float, grid: TimeGrid | None = None) -> np.ndarray:
    """Piecewise-linear value of ``traj`` at day ``t``.

    ``traj`` is a :class:`Trajectory`, a :class:`ControlSchedule` or a raw array
    whose leading axis runs over grid points (pass ``grid`` for raw arrays).
    """
    if isinstance(traj, ControlSchedule):
        values, grid = traj.values.T, traj.grid
    elif isinstance(traj, Trajectory):
        values, grid = traj.values, traj.grid
    else:
        if grid is None:
            raise TypeError("grid is required for raw arrays")
        values = np.asarray(traj)
    if not (0.0 <= t <= grid.horizon):
        raise ValueError(f"t={t} outside [0, {grid.horizon}]")
    pos = t / grid.h
    k = min(int(np.floor(pos)), grid.steps)
    frac = pos - k
    if k == grid.steps or frac == 0.0:
        return values[k].copy()
    return values[k] + frac * (values[k + 1] - values[k])


def _clamp_state(x: np.ndarray, pop: float, index: int) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise IntegrationError("non-finite state", index)
    if x.min() < 0:
        if x.min() < -NEGATIVE_TOL * pop:
            raise IntegrationError(f"negative state component {x.min():.6g}", index)
        x = np.maximum(x, 0.0)
    return x


def integrate_forward(x0: StateVector, u: ControlSchedule, p: ModelParams, g: TimeGrid) -> Trajectory:
    """RK4 for the state system; controls at half steps are midpoint averages."""
    _check_grid(u.grid, g)
    h = g.h
    out = np.empty((len(g), 5, 3))
    x = _clamp_state(x0.as_array(), p.total_population, 0)
    out[0] = x
    uv = u.values
    for k in range(g.steps):
        u0, u1 = uv[:, k], uv[:, k + 1]
        um = 0.5 * (u0 + u1)
        k1 = state_deriv(x, u0, p)
        k2 = state_deriv(x + 0.5 * h * k1, um, p)
        k3 = state_deriv(x + 0.5 * h * k2, um, p)
        k4 = state_deriv(x + h * k3, u1, p)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        x = _clamp_state(x, p.total_population, k + 1)
        out[k + 1] = x
    return Trajectory(out, g)


def integrate_backward(
    state: Trajectory, u: ControlSchedule, p: ModelParams, c: CostConfig | None, g: TimeGrid
) -> Trajectory:
    """RK4 for the costates from the zero terminal condition back to t = 0.

    The cost configuration does not enter the costate equations; it is accepted
    so callers can pass a complete problem description.
    """
    _check_grid(u.grid, g)
    _check_grid(state.grid, g)
    h = g.h
    xs = state.values
    uv = u.values
    out = np.empty((len(g), 5, 3))
    lam = np.zeros((5, 3))
    out[g.steps] = lam
    for k in range(g.steps, 0, -1):
        x1, x0 = xs[k], xs[k - 1]
        xm = 0.5 * (x0 + x1)
        u1, u0 = uv[:, k], uv[:, k - 1]
        um = 0.5 * (u0 + u1)
        k1 = adjoint_deriv(lam, x1, u1, p)
        k2 = adjoint_deriv(lam - 0.5 * h * k1, xm, um, p)
        k3 = adjoint_deriv(lam - 0.5 * h * k2, xm, um, p)
        k4 = adjoint_deriv(lam - h * k3, x0, u0, p)
        lam = lam - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(lam)):
            raise IntegrationError("non-finite adjoint", k - 1)
        out[k - 1] = lam
    return Trajectory(out, g)


def _check_grid(a: TimeGrid, b: TimeGrid):
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")
