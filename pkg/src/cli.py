"""
Command-line interface: analyze, simulate, quantum and lhv subcommands.

Reports go to stdout (text, or a single JSON document with --format json);
progress and errors go to stderr. Exit codes follow ExitStatus.
"""
import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from src.callcenter_sim import (
    NoSales,
    aggregates_to_csv,
    events_to_csv,
    forbidden_event_counts,
    run_simulation,
    simulated_q,
)
from src.config import (
    BOOTSTRAP_LEVEL,
    BOOTSTRAP_MIN_RESAMPLES,
    DEFAULT_SEED,
    DEFAULT_SIM_CONFIG_PATH,
    OPT_CONSTRAINT_TOL,
    OPT_RESTARTS,
    REPORT_DECIMALS,
    ExitStatus,
    load_sim_config,
)
from src.empirics import analyze, parse_table, report_to_json, report_to_text
from src.hna_core import ConstraintSet, admissible_strategies, lhv_max_q, target_strategies
from src.quantum_hna import OptimizerConfig, maximize_q, theta_scan


class UsageError(Exception):
    """Bad command-line usage that argparse cannot detect."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(ExitStatus.USAGE_ERROR)


def log(tag: str, message: str) -> None:
    print(f"[{tag}] {message}", file=sys.stderr)


def _check_seed(seed: int | None) -> None:
    if seed is not None and seed < 0:
        raise UsageError(f"--seed must be >= 0, got {seed}")


def _emit(payload: dict, text: str, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


# === SUBCOMMANDS ===

def run_analyze(args) -> ExitStatus:
    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"Input file not found: {path}")
    if args.bootstrap < 0 or 0 < args.bootstrap < BOOTSTRAP_MIN_RESAMPLES:
        raise UsageError(f"--bootstrap must be 0 or at least {BOOTSTRAP_MIN_RESAMPLES}, got {args.bootstrap}")
    if not 0.0 < args.level < 1.0:
        raise UsageError(f"--level must be in (0, 1), got {args.level}")
    _check_seed(args.seed)

    log("analyze", f"Step 1: Parsing {path}")
    ds = parse_table(path.read_text())
    log("analyze", f"Step 2: Computing q over {len(ds.rows)} days")
    report = analyze(
        ds,
        exclude_interrupted=args.exclude_interrupted,
        weight=args.weight,
        resamples=args.bootstrap,
        level=args.level,
        seed=args.seed,
    )

    if args.format == "json":
        print(report_to_json(report))
    else:
        print(report_to_text(report))
    return ExitStatus.SUCCESS


def run_simulate(args) -> ExitStatus:
    if args.days is not None and args.days < 1:
        raise UsageError("--days must be at least 1")
    _check_seed(args.seed)
    config_path = Path(args.config)
    if not config_path.is_file():
        raise UsageError(f"Config file not found: {config_path}")

    config = load_sim_config(config_path, days=args.days, seed=args.seed)
    log("simulate", f"Simulating {config.days} days (seed {config.seed})")

    def progress(done, total):
        if done == total or done % 10 == 0:
            log("simulate", f"day {done}/{total}")

    result = run_simulation(config, progress=progress)

    if args.out:
        Path(args.out).write_text(aggregates_to_csv(result.daily))
        log("simulate", f"Aggregates saved to: {args.out}")
    if args.events:
        Path(args.events).write_text(events_to_csv(result.events))
        log("simulate", f"Event log saved to: {args.events}")

    try:
        q = simulated_q(result.daily)
    except NoSales:
        log("simulate", "No sales in the simulated days; simulated_q is undefined")
        q = None

    forbidden = forbidden_event_counts(result.events)
    payload = {
        "simulated_q": q,
        "days": config.days,
        "seed": config.seed,
        "calls": sum(a.arrivals for a in result.daily),
        "absent_sales": sum(a.absent_sales for a in result.daily),
        "present_sales": sum(a.present_sales for a in result.daily),
        "forbidden_events": forbidden,
    }
    text = "\n".join([
        "simulated_q = undefined" if q is None else f"simulated_q = {q:.{REPORT_DECIMALS}f}",
        f"Days: {config.days} | Seed: {config.seed} | Calls: {payload['calls']}",
        "Forbidden events: " + ", ".join(f"{k}={v}" for k, v in forbidden.items()),
    ])
    _emit(payload, text, args.format)
    return ExitStatus.SUCCESS


def run_quantum(args) -> ExitStatus:
    if args.restarts < 1:
        raise UsageError("--restarts must be at least 1")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    if not args.tol > 0:
        raise UsageError(f"--tol must be > 0, got {args.tol}")
    if args.fix_theta is not None and not 0.0 <= args.fix_theta <= math.pi / 2:
        raise UsageError(f"--fix-theta must be in [0, pi/2], got {args.fix_theta}")
    _check_seed(args.seed)
    opt = OptimizerConfig(restarts=args.restarts, constraint_tol=args.tol, seed=args.seed)

    if args.scan:
        if args.scan < 2:
            raise UsageError("--scan needs at least 2 angles")
        thetas = np.linspace(0.0, math.pi / 2, args.scan)
        log("quantum", f"Scanning {args.scan} Schmidt angles")
        rows = theta_scan([float(t) for t in thetas], opt)
        payload = {"scan": [{"theta": t, "q": q} for t, q in rows]}
        text = "\n".join(["theta        q"] + [f"{t:.6f}  {q:.{REPORT_DECIMALS}f}" for t, q in rows])
        _emit(payload, text, args.format)
        return ExitStatus.SUCCESS

    log("quantum", f"Maximizing q over {opt.restarts} restarts (seed {opt.seed})")
    result = maximize_q(
        opt,
        fix_theta=args.fix_theta,
        workers=args.workers,
        progress=lambda done, total: log("quantum", f"restart {done}/{total}"),
    )

    angles = dict(zip(("a1", "a2", "b1", "b2"), result.polar_angles))
    text = "\n".join([
        "=" * 70,
        "QUANTUM MAXIMUM OF q",
        "=" * 70,
        f"q = {result.q:.{REPORT_DECIMALS}f}",
        "Residuals: " + ", ".join(f"p{i}={r:.2e}" for i, r in enumerate(result.residuals, start=1)),
        f"theta = {result.theta:.6f}",
        "Polar angles: " + ", ".join(f"{k}={v:.6f}" for k, v in angles.items()),
        f"Best restart: {result.restart_index} ({result.feasible_restarts}/{opt.restarts} feasible)",
    ])
    _emit(result.to_dict(), text, args.format)
    return ExitStatus.SUCCESS


def run_lhv(args) -> ExitStatus:
    constraints = ConstraintSet.without(*args.drop)
    bound = lhv_max_q(constraints)
    admissible = admissible_strategies(constraints)
    targets = target_strategies(constraints)

    payload = {
        "constraints": constraints.labels(),
        "lhv_max_q": str(bound),
        "lhv_max_q_float": float(bound),
        "admissible_strategies": [s.to_dict() for s in admissible],
        "target_strategies": [s.to_dict() for s in targets],
    }

    def describe(s):
        return f"(a1={int(s.a1):+d}, a2={int(s.a2):+d}, b1={int(s.b1):+d}, b2={int(s.b2):+d})"

    lines = [
        f"Constraints: {', '.join(constraints.labels()) or 'none'}",
        f"lhv_max_q = {bound}",
        f"Admissible strategies: {len(admissible)}/16",
        f"Strategies realizing a2=+1, b2=+1: {len(targets)}",
    ]
    lines += [f"  {describe(s)}" for s in targets]
    _emit(payload, "\n".join(lines), args.format)
    return ExitStatus.SUCCESS


# === PARSER ===

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hna", description="Hardy non-locality: empirical, classical and quantum q")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="Compute q from a daily sales table")
    p.add_argument("input", type=str, help="CSV table (date or day schema)")
    p.add_argument("--exclude-interrupted", action="store_true", help="Drop days flagged as interrupted")
    p.add_argument("--weight", type=str, default="amount", choices=["amount", "count"])
    p.add_argument("--bootstrap", type=int, default=0, help="Bootstrap resamples (default: 0, no interval)")
    p.add_argument("--level", type=float, default=BOOTSTRAP_LEVEL, help="Confidence level (default: 0.95)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Random seed (default: 0)")
    p.add_argument("--format", type=str, default="text", choices=["text", "json"])
    p.set_defaults(handler=run_analyze)

    p = sub.add_parser("simulate", help="Run the call-centre simulator")
    p.add_argument("--config", type=str, default=str(DEFAULT_SIM_CONFIG_PATH), help="KEY=value config file")
    p.add_argument("--seed", type=int, default=None, help="Random seed (default: config file, 0)")
    p.add_argument("--days", type=int, default=None, help="Simulated days (default: config file)")
    p.add_argument("--out", type=str, default=None, help="Daily aggregates CSV path")
    p.add_argument("--events", type=str, default=None, help="Event log CSV path")
    p.add_argument("--format", type=str, default="text", choices=["text", "json"])
    p.set_defaults(handler=run_simulate)

    p = sub.add_parser("quantum", help="Maximize q over two-qubit configurations")
    p.add_argument("--restarts", type=int, default=OPT_RESTARTS, help=f"Random restarts (default: {OPT_RESTARTS})")
    p.add_argument("--tol", type=float, default=OPT_CONSTRAINT_TOL, help="Constraint residual tolerance")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Random seed (default: 0)")
    p.add_argument("--fix-theta", type=float, default=None, help="Pin the Schmidt angle")
    p.add_argument("--workers", type=int, default=1, help="Parallel restart workers (default: 1)")
    p.add_argument("--scan", type=int, default=0, help="Scan N Schmidt angles over [0, pi/2]")
    p.add_argument("--format", type=str, default="text", choices=["text", "json"])
    p.set_defaults(handler=run_quantum)

    p = sub.add_parser("lhv", help="Exact local-hidden-variable maximum of q")
    p.add_argument("--drop", type=int, action="append", default=[], choices=[1, 2, 3],
                   help="Drop a zero condition (repeatable)")
    p.add_argument("--format", type=str, default="text", choices=["text", "json"])
    p.set_defaults(handler=run_lhv)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.handler(args))
    except UsageError as e:
        print(f"Error: {e}", file=sys.stderr)
        return ExitStatus.USAGE_ERROR
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return ExitStatus.DATA_ERROR
    except RuntimeError as e:
        print(f"Numerical failure: {e}", file=sys.stderr)
        return ExitStatus.NUMERICAL_FAILURE
