"""Concrete scenarios for Brazil, May 2020, plus death and calendar reporting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .integrator import ControlSchedule, TimeGrid, Trajectory, integrate_forward
from .model import CostConfig, ModelParams, StateVector
from .sweep import SweepConfig, SweepResult, fbs_solve, objective_value

TOTAL_POPULATION = 2e8
POPULATION_SHARES = (0.40, 0.50, 0.10)
INITIAL_EXPOSED = (216.0, 9987.0, 10769.0)
INITIAL_INFECTED = (789.0, 36478.0, 39335.0)
INITIAL_RECOVERED = (729.0, 33415.0, 30979.0)
MORTALITY = (0.003, 0.008, 0.147)
COST_SPLIT = (0.40, 0.30, 0.30)
HORIZONS = (60.0, 90.0, 120.0)
DELAY_FACTORS = (1.0, 2.0, 4.0)

# Calibrated total control cost: keeps u_1 and u_2 on the upper clamp for the
# first 10 days of the 60-day baseline. See README ("Cost budget").
DEFAULT_BUDGET = 5.0e3
DEFAULT_THRESHOLD = 0.5
DEFAULT_STEP = 0.1


class ScenarioError(ValueError):
    pass


def default_params() -> ModelParams:
    return ModelParams.from_upper_triangle(
        (1.76168, 0.36475, 1.32468, 0.63802, 0.35958, 0.57347),
        sigma=(0.27300, 0.58232, 0.69339),
        gamma=(0.06862, 0.03317, 0.35577),
        tau=1.0 / 13.0,
        total_population=TOTAL_POPULATION,
    )


def build_initial_state(delay_factor: float = 1.0, total_population: float = TOTAL_POPULATION) -> StateVector:
    """Initial state with exposed, infected and recovered scaled by ``delay_factor``.

    Susceptibles equal each group's share of the population; the group total
    adds the scaled E, I and R on top of it.
    """
    if not np.isfinite(delay_factor) or delay_factor < 1:
        raise ScenarioError(f"delay_factor must be >= 1, got {delay_factor}")
    s = total_population * np.asarray(POPULATION_SHARES)
    e = delay_factor * np.asarray(INITIAL_EXPOSED)
    i = delay_factor * np.asarray(INITIAL_INFECTED)
    r = delay_factor * np.asarray(INITIAL_RECOVERED)
    if np.any(e + i + r > s):
        raise ScenarioError(f"delay_factor {delay_factor} puts more people in E, I, R than a group holds")
    return StateVector(S=s, E=e, I=i, Q=np.zeros(3), N_group=s + e + i + r)


@dataclass(frozen=True)
class MortalityRates:
    mu: tuple = MORTALITY

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.shape != (3,) or np.any(mu < 0) or np.any(mu >= 1):
            raise ScenarioError("mortality rates must be three values in [0, 1)")
        object.__setattr__(self, "mu", tuple(float(m) for m in mu))


@dataclass(frozen=True)
class ScenarioConfig:
    horizon: float = 60.0
    delay_factor: float = 1.0
    budget: float = DEFAULT_BUDGET
    split: tuple = COST_SPLIT
    step: float = DEFAULT_STEP
    sweep: SweepConfig = field(default_factory=SweepConfig)
    threshold: float = DEFAULT_THRESHOLD
    mortality: MortalityRates = field(default_factory=MortalityRates)
    params: ModelParams = field(default_factory=default_params)
    no_control: bool = False

    def __post_init__(self):
        if not self.horizon > 0:
            raise ScenarioError("horizon must be positive")
        if not self.delay_factor >= 1:
            raise ScenarioError("delay_factor must be >= 1")
        if not 0 < self.threshold < 1:
            raise ScenarioError("threshold must be in (0, 1)")
        object.__setattr__(self, "split", tuple(float(v) for v in self.split))

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.from_step(self.horizon, self.step)

    @property
    def cost(self) -> CostConfig:
        return CostConfig(self.budget, self.split)

    @property
    def name(self) -> str:
        return f"T{self.horizon:g}_delay{self.delay_factor:g}"


@dataclass
class ScenarioReport:
    config: ScenarioConfig
    sweep: SweepResult | None
    controls: ControlSchedule
    states: Trajectory
    baseline_states: Trajectory
    deaths: np.ndarray
    baseline_deaths: np.ndarray
    death_ratio: np.ndarray
    calendar: np.ndarray
    objective: float

    @property
    def converged(self) -> bool:
        return self.sweep is None or self.sweep.converged

    @property
    def iterations(self) -> int:
        return 0 if self.sweep is None else self.sweep.iterations

    @property
    def infected(self) -> np.ndarray:
        """Infected per group, shape ``(3, M + 1)``."""
        return self.states.row(2)

    @property
    def baseline_infected(self) -> np.ndarray:
        return self.baseline_states.row(2)


def recovered(traj: Trajectory) -> np.ndarray:
    """R per group derived from the group totals, shape ``(M + 1, 3)``."""
    v = traj.values
    return v[:, 4] - v[:, 0] - v[:, 1] - v[:, 2] - v[:, 3]


def compute_deaths(traj: Trajectory, mu: MortalityRates | None = None) -> np.ndarray:
    mu = mu or MortalityRates()
    return recovered(traj) @ np.asarray(mu.mu)


def death_reduction_ratio(no_quarantine: np.ndarray, controlled: np.ndarray) -> np.ndarray:
    """Uncontrolled deaths over time divided by the controlled run's final deaths."""
    no_quarantine = np.asarray(no_quarantine, dtype=float)
    controlled = np.asarray(controlled, dtype=float)
    if no_quarantine.shape != controlled.shape:
        raise ValueError("death series must share a grid")
    final = controlled[-1]
    if not final > 0:
        raise ZeroDivisionError("controlled run has no terminal deaths; ratio undefined")
    return no_quarantine / final


def relaxation_calendar(u: ControlSchedule, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Per group, the first grid day after which the control stays below
    ``threshold`` times its own maximum. Groups with no control get day 0.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    times = u.grid.times
    days = np.zeros(3)
    for i, ui in enumerate(u.values):
        peak = ui.max()
        if peak <= 0:
            continue
        above = np.nonzero(ui >= threshold * peak)[0]
        days[i] = times[min(above[-1] + 1, len(times) - 1)]
    return days


def run_scenario(cfg: ScenarioConfig) -> ScenarioReport:
    """Optimal run plus the u = 0 baseline on the same grid."""
    params = cfg.params
    grid = cfg.grid
    x0 = build_initial_state(cfg.delay_factor, params.total_population)

    baseline_u = ControlSchedule.constant(grid, 0.0)
    baseline = integrate_forward(x0, baseline_u, params, grid)
    baseline_deaths = compute_deaths(baseline, cfg.mortality)

    if cfg.no_control:
        result = None
        controls, states = baseline_u, baseline
        objective = objective_value(states, controls, cfg.cost, grid)
    else:
        result = fbs_solve(x0, params, cfg.cost, grid, cfg.sweep)
        controls, states, objective = result.controls, result.states, result.objective

    deaths = compute_deaths(states, cfg.mortality)
    return ScenarioReport(
        config=cfg,
        sweep=result,
        controls=controls,
        states=states,
        baseline_states=baseline,
        deaths=deaths,
        baseline_deaths=baseline_deaths,
        death_ratio=death_reduction_ratio(baseline_deaths, deaths),
        calendar=relaxation_calendar(controls, cfg.threshold),
        objective=objective,
    )
