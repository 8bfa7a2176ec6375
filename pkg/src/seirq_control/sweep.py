"""Forward-backward sweep for the quarantine-entry control problem."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .integrator import (
    ControlSchedule,
    TimeGrid,
    Trajectory,
    integrate_backward,
    integrate_forward,
)
from .model import CostConfig, ModelDomainError, ModelParams, StateVector, control_map_array

log = logging.getLogger(__name__)

EPS = 1e-12


@dataclass(frozen=True)
class SweepConfig:
    """Sweep settings.

    ``damping`` is the weight of the freshly mapped controls in each update.
    With ``adaptive`` on, the weight is halved (not below ``min_damping``)
    whenever the fixed-point residual grows from one iteration to the next and
    multiplied by ``recovery`` (not above ``damping``) when it shrinks. A fixed
    weight of 0.5 falls into period-two cycles on this problem.
    """

    damping: float = 0.5
    tolerance: float = 1e-3
    max_iterations: int = 500
    initial_guess: str | float = "zeros"
    adaptive: bool = True
    min_damping: float = 0.01
    recovery: float = 1.25

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise ValueError("damping must be in (0, 1]")
        if not 0 < self.min_damping <= self.damping:
            raise ValueError("min_damping must be in (0, damping]")
        if not self.recovery >= 1:
            raise ValueError("recovery must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        self.initial_level()

    def initial_level(self) -> float:
        guess = self.initial_guess
        if guess == "zeros":
            return 0.0
        if guess == "ones":
            return 1.0
        if isinstance(guess, str):
            raise ValueError(f"unknown initial guess {guess!r}")
        if not 0 <= guess <= 1:
            raise ValueError("constant initial guess must be in [0, 1]")
        return float(guess)


@dataclass
class SweepResult:
    converged: bool
    iterations: int
    controls: ControlSchedule
    states: Trajectory
    adjoints: Trajectory
    objective: float
    history: list = field(default_factory=list)


def convergence_metric(u_old: ControlSchedule, u_new: ControlSchedule) -> float:
    """Largest per-group relative L1 change between two schedules."""
    if u_old.grid != u_new.grid:
        raise ValueError("control schedules live on different grids")
    diff = np.abs(u_new.values - u_old.values).sum(axis=1)
    scale = np.maximum(np.abs(u_new.values).sum(axis=1), EPS)
    return float(np.max(diff / scale))


def objective_value(traj: Trajectory, u: ControlSchedule, c: CostConfig, g: TimeGrid) -> float:
    """Trapezoid-rule value of the integral of sum_i (I_i + B_i u_i^2)."""
    if traj.grid != g or u.grid != g:
        raise ValueError("trajectory, controls and grid must agree")
    integrand = traj.values[:, 2, :].sum(axis=1) + c.group_costs @ (u.values**2)
    return float(np.trapezoid(integrand, dx=g.h))


def fbs_solve(
    x0: StateVector, p: ModelParams, c: CostConfig, g: TimeGrid, s: SweepConfig | None = None
) -> SweepResult:
    """Iterate forward state solves, backward costate solves and damped updates.

    The returned state and costate trajectories belong to the returned
    controls. Non-convergence is reported through ``converged``, not raised.
    """
    s = s or SweepConfig()
    b = c.group_costs
    if np.any(b <= 0):
        raise ModelDomainError("every group cost B_i must be positive")

    u = ControlSchedule.constant(g, s.initial_level())
    weight = s.damping
    history = []
    converged = False
    iterations = 0
    for iterations in range(1, s.max_iterations + 1):
        states = integrate_forward(x0, u, p, g)
        adjoints = integrate_backward(states, u, p, c, g)
        mapped = ControlSchedule(
            control_map_array(states.values.transpose(1, 2, 0), adjoints.values.transpose(1, 2, 0), b), g
        )
        # residual of the fixed-point map, independent of the damping weight
        metric = convergence_metric(u, mapped)
        history.append(metric)
        if metric <= s.tolerance:
            converged = True
            break
        if s.adaptive and len(history) > 1:
            if metric > history[-2]:
                weight = max(0.5 * weight, s.min_damping)
            else:
                weight = min(s.recovery * weight, s.damping)
        u = ControlSchedule(np.clip(weight * mapped.values + (1 - weight) * u.values, 0.0, 1.0), g)
    log.debug("sweep finished: converged=%s iterations=%d metric=%.3g", converged, iterations, history[-1])

    if not converged:
        states = integrate_forward(x0, u, p, g)
        adjoints = integrate_backward(states, u, p, c, g)
    return SweepResult(
        converged=converged,
        iterations=iterations,
        controls=u,
        states=states,
        adjoints=adjoints,
        objective=objective_value(states, u, c, g),
        history=history,
    )
