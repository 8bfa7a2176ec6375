"""Scenario output files: trajectory tables, summaries and run manifests."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .integrator import ControlSchedule, Trajectory
from .scenarios import ScenarioReport, recovered

TRAJECTORY_COLUMNS = (
    ["t"]
    + [f"{name}{i}" for name in ("S", "E", "I", "Q", "R", "u") for i in (1, 2, 3)]
    + ["D"]
)
TRAJECTORY_FILE = "trajectory.csv"
BASELINE_FILE = "baseline.csv"
RATIO_FILE = "death_ratio.csv"
SUMMARY_FILE = "summary.json"
MANIFEST_FILE = "manifest.json"


class TableError(ValueError):
    pass


def trajectory_rows(traj: Trajectory, u: ControlSchedule, deaths: np.ndarray) -> np.ndarray:
    """Table body in :data:`TRAJECTORY_COLUMNS` order, one row per grid point."""
    v = traj.values
    return np.column_stack(
        [traj.grid.times, v[:, 0], v[:, 1], v[:, 2], v[:, 3], recovered(traj), u.values.T, deaths]
    )


def write_table(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        # repr keeps full round-trip precision
        writer.writerows([repr(float(x)) for x in row] for row in rows)


def read_table(path: Path) -> tuple[list, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TableError(f"{path} is empty") from None
        rows = [[float(x) for x in row] for row in reader]
    if not rows:
        raise TableError(f"{path} has no data rows")
    return header, np.array(rows)


def summary_record(report: ScenarioReport) -> dict:
    cfg = report.config
    infected = report.infected.sum(axis=0)
    return {
        "scenario": cfg.name,
        "horizon": cfg.horizon,
        "delay_factor": cfg.delay_factor,
        "budget": cfg.budget,
        "no_control": cfg.no_control,
        "calendar_threshold": cfg.threshold,
        "calendar_days": [float(d) for d in report.calendar],
        "objective": report.objective,
        "terminal_death_ratio": float(report.death_ratio[-1]),
        "terminal_deaths": float(report.deaths[-1]),
        "baseline_terminal_deaths": float(report.baseline_deaths[-1]),
        "infected_initial": float(infected[0]),
        "infected_final": float(infected[-1]),
        "baseline_infected_final": float(report.baseline_infected.sum(axis=0)[-1]),
        "converged": report.converged,
        "iterations": report.iterations,
        "final_metric": report.sweep.history[-1] if report.sweep else 0.0,
    }


def write_report(report: ScenarioReport, out_dir: Path) -> list[str]:
    """Write every per-scenario file into ``out_dir``; returns the file names."""
    out_dir.mkdir(parents=True, exist_ok=True)
    zero = ControlSchedule.constant(report.states.grid, 0.0)
    write_table(
        out_dir / TRAJECTORY_FILE,
        TRAJECTORY_COLUMNS,
        trajectory_rows(report.states, report.controls, report.deaths),
    )
    write_table(
        out_dir / BASELINE_FILE,
        TRAJECTORY_COLUMNS,
        trajectory_rows(report.baseline_states, zero, report.baseline_deaths),
    )
    write_table(
        out_dir / RATIO_FILE,
        ["t", "ratio"],
        np.column_stack([report.states.grid.times, report.death_ratio]),
    )
    (out_dir / SUMMARY_FILE).write_text(json.dumps(summary_record(report), indent=2) + "\n")
    return [TRAJECTORY_FILE, BASELINE_FILE, RATIO_FILE, SUMMARY_FILE]


def compare_runs(run_a: Path, run_b: Path) -> np.ndarray:
    """Deaths of ``run_a`` over time divided by the terminal deaths of ``run_b``.

    Returns a two-column array ``(t, ratio)``.
    """
    tables = []
    for run in (run_a, run_b):
        path = Path(run) / TRAJECTORY_FILE
        if not path.is_file():
            raise FileNotFoundError(f"no {TRAJECTORY_FILE} in {run}")
        header, rows = read_table(path)
        if header != TRAJECTORY_COLUMNS:
            raise TableError(f"{path} does not have the trajectory columns")
        tables.append(rows)
    a, b = tables
    if a.shape != b.shape or not np.array_equal(a[:, 0], b[:, 0]):
        raise TableError("runs are on different time grids")
    final = b[-1, -1]
    if not final > 0:
        raise TableError("reference run has no terminal deaths")
    return np.column_stack([a[:, 0], a[:, -1] / final])
