# cli for the wind-farm layout optimizer: build the wake matrix, solve a layout, run a benchmark suite or render a layout.

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from agents.matrix_agent import MatrixAgent
from config.settings import build_grid, build_rose, load_config, setup_logging
from run_benchmark import load_suite, print_results, run_suite
from run_pipeline import run_solve
from utils.layout_io import read_layout_csv
from utils.render import render_layout

logger = logging.getLogger("cli")


def _overrides(args) -> dict:
    # only flags the user passed override the config file
    return {
        "solver.name": getattr(args, "solver", None),
        "solver.k": getattr(args, "k", None),
        "solver.seed": getattr(args, "seed", None),
        "solver.cutoff_seconds": getattr(args, "cutoff_seconds", None),
        "solver.max_clusters": getattr(args, "max_clusters", None),
        "solver.clusters_per_round": getattr(args, "clusters_per_round", None),
        "output_dir": getattr(args, "out", None),
    }


def cmd_matrix(args) -> int:
    cfg = load_config(args.config)
    agent = MatrixAgent()
    built = agent.build(cfg)
    out = Path(args.out) if args.out else Path(cfg.output_dir) / "matrix.npy"
    agent.dump(built["matrix"], out)
    matrix = built["matrix"]
    print(f"  matrix: {matrix.n}x{matrix.n} -> {out}")
    print(f"  symmetric: {matrix.is_symmetric()}  one-sided: {matrix.one_sided()}")
    return 0


def cmd_solve(args) -> int:
    cfg = load_config(args.config, overrides=_overrides(args))
    print(f"\nsolving {cfg.name}: k={cfg.solver.k}, solver={cfg.solver.name}\n")
    result = run_solve(cfg)
    evaluation = result["evaluation"]
    print(f"  turbines placed: {len(evaluation.cells)}")
    print(f"  expected power: {evaluation.expected_power_kw:.1f} kW")
    print(f"  aep: {evaluation.aep_kwh:.6g} kWh")
    report = result.get("solve_report")
    if report is not None:
        print(f"  lower bound: {report.lower_bound:.6g}  best energy: {report.best_energy:.6g}  gap: {report.gap:.3g}")
    for kind, path in result["outputs"].items():
        print(f"  {kind}: {path}")
    return 0


def cmd_benchmark(args) -> int:
    suite = load_suite(args.suite)
    if args.cutoff_seconds is not None:
        suite = suite.model_copy(update={"cutoff_seconds": args.cutoff_seconds})
    rows = run_suite(suite, args.out or Path("output") / "benchmark" / suite.name)
    print_results(rows, suite)
    return 0


def cmd_render(args) -> int:
    cfg = load_config(args.config)
    grid = build_grid(cfg)
    cells = read_layout_csv(args.layout)
    direction = None if args.no_wind else build_rose(cfg).dominant_direction()
    out = args.out or str(Path(args.layout).with_suffix(".svg"))
    render_layout(grid, cells, out, wind_direction=direction)
    print(f"  rendered {len(cells)} turbines -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wflo", description="wind-farm layout optimization by map inference")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matrix", help="build and dump the wake interaction matrix")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output file, .npy or .csv")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("solve", help="run the end-to-end layout pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--solver", choices=["mp", "greedy", "local", "brute"])
    p.add_argument("--k", type=int, help="turbine budget")
    p.add_argument("--seed", type=int)
    p.add_argument("--cutoff-seconds", type=float)
    p.add_argument("--max-clusters", type=int)
    p.add_argument("--clusters-per-round", type=int)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("benchmark", help="run a benchmark suite")
    p.add_argument("suite")
    p.add_argument("--cutoff-seconds", type=float)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("render", help="draw a layout csv as svg")
    p.add_argument("--config", required=True)
    p.add_argument("--layout", required=True)
    p.add_argument("--out")
    p.add_argument("--no-wind", action="store_true", help="omit the dominant wind arrow")
    p.set_defaults(func=cmd_render)
    return parser


# main cli entry point; exit code 0 iff every requested output was written
def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        logger.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
