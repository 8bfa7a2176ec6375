"""Optimal quarantine-entry control for an age-structured SEIRQ epidemic model."""

from .integrator import (
    ControlSchedule,
    IntegrationError,
    TimeGrid,
    Trajectory,
    integrate_backward,
    integrate_forward,
    sample,
)
from .model import (
    AdjointVector,
    CostConfig,
    ModelDomainError,
    ModelParams,
    StateVector,
    adjoint_rhs,
    hamiltonian_value,
    optimal_control_map,
    state_rhs,
)
from .scenarios import (
    MortalityRates,
    ScenarioConfig,
    ScenarioReport,
    build_initial_state,
    compute_deaths,
    death_reduction_ratio,
    default_params,
    relaxation_calendar,
    run_scenario,
)
from .sweep import SweepConfig, SweepResult, convergence_metric, fbs_solve, objective_value

__all__ = [
    "AdjointVector",
    "ControlSchedule",
    "CostConfig",
    "IntegrationError",
    "ModelDomainError",
    "ModelParams",
    "MortalityRates",
    "ScenarioConfig",
    "ScenarioReport",
    "StateVector",
    "SweepConfig",
    "SweepResult",
    "TimeGrid",
    "Trajectory",
    "adjoint_rhs",
    "build_initial_state",
    "compute_deaths",
    "convergence_metric",
    "death_reduction_ratio",
    "default_params",
    "fbs_solve",
    "hamiltonian_value",
    "integrate_backward",
    "integrate_forward",
    "objective_value",
    "optimal_control_map",
    "relaxation_calendar",
    "run_scenario",
    "sample",
    "state_rhs",
]
