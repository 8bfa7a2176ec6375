"""Command-line front end.

    seirq-control run [--config FILE] --output DIR [--horizon T] [--delay-factor F]
                      [--budget B] [--no-control] [--batch] [--jobs N]
    seirq-control compare RUN_A RUN_B [--output FILE]

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from .config import ConfigError, load_config, resolve, scenario_from_dict
from .reporting import MANIFEST_FILE, TableError, compare_runs, write_report, write_table
from .scenarios import run_scenario

log = logging.getLogger("seirq_control")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


def tool_version() -> str:
    try:
        return version("seirq-control")
    except PackageNotFoundError:
        return "unknown"


def scenario_dicts(cfg: dict, batch: bool) -> list[dict]:
    if not batch:
        return [cfg]
    return [
        dict(cfg, horizon=horizon, delay_factor=delay)
        for horizon in cfg["batch_horizons"]
        for delay in cfg["batch_delay_factors"]
    ]


def run_one(cfg: dict, output_dir: str) -> dict:
    """Run and write one scenario; returns its manifest."""
    started = time.perf_counter()
    scenario = scenario_from_dict(cfg)
    report = run_scenario(scenario)
    name = scenario.name + ("_nocontrol" if scenario.no_control else "")
    out = Path(output_dir) / name
    files = write_report(report, out)
    manifest = {
        "scenario": name,
        "config": cfg,
        "convergence": {
            "converged": report.converged,
            "iterations": report.iterations,
            "history": report.sweep.history if report.sweep else [],
        },
        "outputs": files + [MANIFEST_FILE],
        "tool_version": tool_version(),
        "wall_clock_seconds": time.perf_counter() - started,
    }
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.horizon is not None:
            overrides["horizon"] = args.horizon
        if args.delay_factor is not None:
            overrides["delay_factor"] = args.delay_factor
        if args.budget is not None:
            overrides["budget"] = args.budget
        if args.no_control:
            overrides["no_control"] = True
        cfg = resolve({**cfg, **overrides})
        jobs = scenario_dicts(cfg, args.batch)
        for job in jobs:
            scenario_from_dict(job)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        Path(args.output).mkdir(parents=True, exist_ok=True)
        if args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                manifests = list(pool.map(run_one, jobs, [args.output] * len(jobs)))
        else:
            manifests = [run_one(job, args.output) for job in jobs]
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    for m in manifests:
        c = m["convergence"]
        status = "converged" if c["converged"] else "NOT converged"
        print(f"{m['scenario']}: {status} after {c['iterations']} iterations ({m['wall_clock_seconds']:.1f}s)")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        table = compare_runs(Path(args.run_a), Path(args.run_b))
    except (FileNotFoundError, TableError, ValueError) as exc:
        print(f"compare failed: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc, FileNotFoundError) else EXIT_CONFIG
    except OSError as exc:
        print(f"compare failed: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.output:
        try:
            write_table(Path(args.output), ["t", "ratio"], table)
        except OSError as exc:
            print(f"cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        buf = io.StringIO()
        buf.write("t,ratio\n")
        for t, r in table:
            buf.write(f"{float(t)!r},{float(r)!r}\n")
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seirq-control",
        description="Optimal quarantine-entry controls for an age-structured SEIRQ model.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario or the full batch")
    run.add_argument("--config", help="JSON configuration file or run manifest")
    run.add_argument("--output", "-o", required=True, help="output directory")
    run.add_argument("--horizon", type=float)
    run.add_argument("--delay-factor", type=float)
    run.add_argument("--budget", type=float, help="total control cost B")
    run.add_argument("--no-control", action="store_true", help="force u = 0")
    run.add_argument("--batch", action="store_true", help="run every horizon x delay combination")
    run.add_argument("--jobs", type=int, default=1, help="parallel worker processes for --batch")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="deaths of RUN_A over the terminal deaths of RUN_B")
    cmp_.add_argument("run_a")
    cmp_.add_argument("run_b")
    cmp_.add_argument("--output", "-o", help="write the table here instead of stdout")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
