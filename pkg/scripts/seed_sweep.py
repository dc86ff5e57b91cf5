#!/usr/bin/env python3
"""
Seed sweep for the call-centre simulator

Runs the simulator over many seeds and reports the spread of simulated q,
the forbidden-event tallies and runtime. Writes a JSON file and a markdown
report.

Usage:
    python scripts/seed_sweep.py --name baseline
    python scripts/seed_sweep.py --name short --seeds 20 --days 7
    python scripts/seed_sweep.py --name high_defer --p-defer 0.2
"""

import argparse
import json
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Optional

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.callcenter_sim import EventKind, NoSales, forbidden_event_counts, run_simulation, simulated_q
from src.config import DEFAULT_SIM_CONFIG_PATH, InvalidConfig, load_sim_config


@dataclass
class SeedResult:
    """Result from a single simulator run."""
    seed: int
    simulated_q: Optional[float] = None
    calls: int = 0
    callbacks: int = 0
    absent_sales: int = 0
    present_sales: int = 0
    forbidden_events: dict = field(default_factory=dict)
    runtime_seconds: float = 0.0
    error: Optional[str] = None


@dataclass
class SweepConfig:
    """Configuration for a sweep."""
    name: str
    seeds: int = 10
    first_seed: int = 0
    days: Optional[int] = None
    p_defer: Optional[float] = None
    config_path: str = str(DEFAULT_SIM_CONFIG_PATH)


@dataclass
class SweepResults:
    """Complete sweep results."""
    config: dict
    timestamp: str
    runs: list
    summary: dict


def run_seed(sim_config, seed: int) -> SeedResult:
    result = SeedResult(seed=seed)
    start = time.time()
    sim = run_simulation(replace(sim_config, seed=seed))
    result.runtime_seconds = time.time() - start

    result.calls = sum(a.arrivals for a in sim.daily)
    result.callbacks = sum(e.kind is EventKind.CALLBACK for e in sim.events)
    result.absent_sales = sum(a.absent_sales for a in sim.daily)
    result.present_sales = sum(a.present_sales for a in sim.daily)
    result.forbidden_events = forbidden_event_counts(sim.events)
    try:
        result.simulated_q = simulated_q(sim.daily)
    except NoSales as e:
        result.error = str(e)
    return result


def summarize(runs: list[SeedResult]) -> dict:
    qs = [r.simulated_q for r in runs if r.simulated_q is not None]
    summary = {
        "total_runs": len(runs),
        "runs_with_sales": len(qs),
        "positive_q_runs": sum(q > 0 for q in qs),
        "forbidden_event_total": sum(sum(r.forbidden_events.values()) for r in runs),
        "avg_runtime": statistics.mean(r.runtime_seconds for r in runs) if runs else 0.0,
        "total_time": sum(r.runtime_seconds for r in runs),
    }
    if qs:
        summary.update(
            mean_q=statistics.mean(qs),
            stdev_q=statistics.stdev(qs) if len(qs) > 1 else 0.0,
            min_q=min(qs),
            max_q=max(qs),
        )
    return summary


def run_sweep(config: SweepConfig) -> SweepResults:
    """Run the simulator once per seed."""
    sim_config = load_sim_config(config.config_path, days=config.days, p_defer=config.p_defer)

    print(f"\n{'='*60}")
    print(f"SWEEP: {config.name}")
    print(f"{'='*60}")
    print(f"Seeds: {config.first_seed}..{config.first_seed + config.seeds - 1}")
    print(f"Days: {sim_config.days} | p_defer: {sim_config.p_defer}")
    print(f"{'='*60}\n")

    runs = []
    for i, seed in enumerate(range(config.first_seed, config.first_seed + config.seeds), start=1):
        print(f"[{i}/{config.seeds}] seed {seed}...", end=" ", flush=True)
        r = run_seed(sim_config, seed)
        runs.append(r)
        if r.simulated_q is None:
            print(f"no sales ({r.runtime_seconds:.1f}s)")
        else:
            print(f"q={r.simulated_q:.6f} ({r.runtime_seconds:.1f}s)")

    summary = summarize(runs)
    print(f"\n{'='*60}")
    print("SUMMARY")
    print(f"{'='*60}")
    print(f"Runs with sales: {summary['runs_with_sales']}/{summary['total_runs']}")
    if "mean_q" in summary:
        print(f"Mean q: {summary['mean_q']:.6f} (stdev {summary['stdev_q']:.6f})")
        print(f"Range: [{summary['min_q']:.6f}, {summary['max_q']:.6f}]")
    print(f"Forbidden events: {summary['forbidden_event_total']}")
    print(f"Total Time: {summary['total_time']:.1f}s")

    return SweepResults(
        config=asdict(config),
        timestamp=datetime.now().isoformat(),
        runs=[asdict(r) for r in runs],
        summary=summary,
    )


def generate_markdown_report(results: SweepResults, output_path: Path) -> str:
    """Generate markdown report."""
    config = results.config
    summary = results.summary

    lines = [
        f"# Seed sweep: {config['name']}",
        "",
        "## Configuration",
        f"- **Date:** {results.timestamp}",
        f"- **Seeds:** {config['seeds']} starting at {config['first_seed']}",
        f"- **Days:** {config['days'] if config['days'] is not None else 'config file'}",
        f"- **p_defer:** {config['p_defer'] if config['p_defer'] is not None else 'config file'}",
        f"- **Config:** {config['config_path']}",
        "",
        "## Summary",
        "",
        "| Metric | Value |",
        "|--------|-------|",
        f"| Runs with sales | {summary['runs_with_sales']}/{summary['total_runs']} |",
        f"| Runs with q > 0 | {summary['positive_q_runs']} |",
    ]
    if "mean_q" in summary:
        lines.extend([
            f"| Mean q | {summary['mean_q']:.6f} |",
            f"| StdDev q | {summary['stdev_q']:.6f} |",
            f"| Min / Max q | {summary['min_q']:.6f} / {summary['max_q']:.6f} |",
        ])
    lines.extend([
        f"| Forbidden events | {summary['forbidden_event_total']} |",
        f"| Avg runtime | {summary['avg_runtime']:.1f}s |",
        "",
        "## Individual Runs",
        "",
        "| Seed | q | Calls | Callbacks | Absent sales | Present sales | Runtime |",
        "|------|---|-------|-----------|--------------|---------------|---------|",
    ])
    for r in results.runs:
        q = f"{r['simulated_q']:.6f}" if r["simulated_q"] is not None else "n/a"
        lines.append(
            f"| {r['seed']} | {q} | {r['calls']} | {r['callbacks']} | "
            f"{r['absent_sales']} | {r['present_sales']} | {r['runtime_seconds']:.1f}s |"
        )

    lines.extend([
        "",
        "---",
        f"**Raw Data:** [{output_path.stem}.json]({output_path.stem}.json)",
        "",
    ])
    return "\n".join(lines)


def main():
    parser = argparse.ArgumentParser(description="Call-centre simulator seed sweep")
    parser.add_argument("--name", type=str, required=True, help="Sweep name")
    parser.add_argument("--seeds", type=int, default=10, help="Number of seeds (default: 10)")
    parser.add_argument("--first-seed", type=int, default=0, help="First seed (default: 0)")
    parser.add_argument("--days", type=int, default=None, help="Simulated days (default: config file)")
    parser.add_argument("--p-defer", type=float, default=None, help="Override p_defer")
    parser.add_argument("--config", type=str, default=str(DEFAULT_SIM_CONFIG_PATH))
    parser.add_argument("--output-dir", type=str, default="docs/experiments")
    args = parser.parse_args()

    if args.seeds < 1:
        print("Error: --seeds must be at least 1")
        sys.exit(1)

    config = SweepConfig(
        name=args.name,
        seeds=args.seeds,
        first_seed=args.first_seed,
        days=args.days,
        p_defer=args.p_defer,
        config_path=args.config,
    )

    try:
        results = run_sweep(config)
    except (InvalidConfig, FileNotFoundError) as e:
        print(f"Configuration error: {e}")
        sys.exit(2)

    output_dir = Path(args.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    json_path = output_dir / f"{args.name}.json"
    with open(json_path, "w") as f:
        json.dump(asdict(results), f, indent=2, default=str)
    print(f"\nJSON saved to: {json_path}")

    md_path = output_dir / f"{args.name}.md"
    with open(md_path, "w") as f:
        f.write(generate_markdown_report(results, md_path))
    print(f"Report saved to: {md_path}")


if __name__ == "__main__":
    main()
