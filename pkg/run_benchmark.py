# benchmark runner: (rose x resolution x k x solver) cases from a suite file, written as csv and json tables.

import copy
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from tqdm import tqdm

from config.settings import CUTOFF_SECONDS, config_from_dict, setup_logging
from farm.evaluation import RunRecord, compare
from run_pipeline import run_solve

logger = logging.getLogger("benchmark")

RESULT_COLUMNS = [
    "suite", "rose", "cells_per_side", "k", "solver", "expected_power_kw", "aep_kwh",
    "surrogate_energy", "lower_bound", "gap", "wall_time", "published_kw", "percent_vs_published",
    "percent_vs_reference", "time_ratio_vs_reference", "error",
]


class BenchmarkCase(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rose: Optional[str] = None
    cells_per_side: List[int] = Field(default_factory=lambda: [10])
    k: List[int] = Field(min_length=1)
    solvers: List[str] = Field(default_factory=lambda: ["local", "mp"])
    # reference power from the literature, keyed by k
    published_kw: Dict[int, float] = Field(default_factory=dict)
    # extra solver-section keys for every run of this case, e.g. {max_clusters: 0}
    solver_options: Dict[str, Any] = Field(default_factory=dict)


class BenchmarkSuite(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "suite"
    base_config: str
    cutoff_seconds: float = Field(default=CUTOFF_SECONDS, gt=0)
    reference_solver: Optional[str] = None
    caveat: Optional[str] = None
    cases: List[BenchmarkCase] = Field(default_factory=list)
    base_dir: str = "."


def load_suite(path) -> BenchmarkSuite:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ValueError(f"could not parse suite {path}: {e}") from e
    raw.setdefault("base_dir", str(path.parent.resolve()))
    try:
        return BenchmarkSuite.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "suite"
        raise ValueError(f"invalid suite field `{where}` in {path}: {first['msg']}") from e


def _case_config(
    suite: BenchmarkSuite,
    case: BenchmarkCase,
    base: Dict[str, Any],
    rose: Optional[str],
    cells: int,
    k: int,
    solver: str,
    out_dir: Path,
):
    raw = copy.deepcopy(base)
    if rose is not None:
        raw["rose"] = {**{key: v for key, v in raw.get("rose", {}).items() if key not in ("file", "builtin")}, "file": rose}
    raw.setdefault("grid", {})["cells_per_side"] = cells
    solver_section = raw.setdefault("solver", {})
    solver_section.update(case.solver_options)
    solver_section.update({"name": solver, "k": k, "cutoff_seconds": suite.cutoff_seconds})
    raw["output_dir"] = str(out_dir / f"{Path(rose).stem if rose else 'base'}_{cells}_{k}_{solver}")
    return raw


def run_suite(suite: BenchmarkSuite, out_dir, write_layouts: bool = False) -> List[Dict[str, Any]]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_path = Path(suite.base_dir) / suite.base_config
    with open(base_path, "r", encoding="utf-8") as f:
        base = yaml.safe_load(f) or {}
    jobs = []
    for case in suite.cases:
        rose = str((Path(suite.base_dir) / case.rose).resolve()) if case.rose else None
        for cells in case.cells_per_side:
            for k in case.k:
                for solver in case.solvers:
                    jobs.append((case, rose, cells, k, solver))
    rows = []
    for case, rose, cells, k, solver in tqdm(jobs, desc="  cases", disable=not jobs):
        row = {
            "suite": suite.name,
            "rose": Path(rose).stem if rose else "base",
            "cells_per_side": cells,
            "k": k,
            "solver": solver,
            "published_kw": case.published_kw.get(k),
            "error": None,
        }
        try:
            raw = _case_config(suite, case, base, rose, cells, k, solver, out_dir)
            cfg = config_from_dict(raw, base_dir=base_path.parent)
            result = run_solve(cfg, write_outputs=write_layouts)
            evaluation = result["evaluation"]
            solve_report = result.get("solve_report")
            row.update({
                "expected_power_kw": evaluation.expected_power_kw,
                "aep_kwh": evaluation.aep_kwh,
                "surrogate_energy": result["report"]["surrogate_energy"],
                "lower_bound": solve_report.lower_bound if solve_report is not None else None,
                "gap": solve_report.gap if solve_report is not None else None,
                "wall_time": result["matrix_seconds"] + result["solve_seconds"],
            })
            if row["published_kw"]:
                row["percent_vs_published"] = 100.0 * (evaluation.expected_power_kw - row["published_kw"]) / row["published_kw"]
        except (ValueError, OSError) as e:
            logger.error("case %s/%d/%d/%s failed: %s", row["rose"], cells, k, solver, e)
            row["error"] = str(e)
        rows.append(row)
    _add_reference_columns(rows, suite.reference_solver)
    _write_results(rows, out_dir, suite)
    return rows


def _add_reference_columns(rows: List[Dict[str, Any]], reference: Optional[str]) -> None:
    if reference is None:
        return
    refs = {
        (r["rose"], r["cells_per_side"], r["k"]): r
        for r in rows if r["solver"] == reference and r["error"] is None
    }
    for row in rows:
        ref = refs.get((row["rose"], row["cells_per_side"], row["k"]))
        if ref is None or row["error"] is not None:
            continue
        try:
            metrics = compare(
                RunRecord(row["solver"], row["expected_power_kw"], row["wall_time"], row["surrogate_energy"]),
                RunRecord(ref["solver"], ref["expected_power_kw"], ref["wall_time"], ref["surrogate_energy"]),
            )
        except ValueError as e:
            logger.warning("no comparison for %s: %s", row["solver"], e)
            continue
        row["percent_vs_reference"] = metrics["percent_difference"]
        row["time_ratio_vs_reference"] = metrics["time_ratio"]


def _write_results(rows: List[Dict[str, Any]], out_dir: Path, suite: BenchmarkSuite) -> None:
    pd.DataFrame(rows, columns=RESULT_COLUMNS).to_csv(out_dir / "results.csv", index=False)
    with open(out_dir / "results.json", "w", encoding="utf-8") as f:
        json.dump({"suite": suite.name, "caveat": suite.caveat, "rows": rows}, f, indent=2)


def print_results(rows: List[Dict[str, Any]], suite: BenchmarkSuite) -> None:
    print(f"\n=== benchmark: {suite.name} ({len(rows)} cases) ===\n")
    for row in rows:
        if row["error"]:
            print(f"  {row['rose']:>6} {row['cells_per_side']:>4} k={row['k']:<4} {row['solver']:<7} error: {row['error']}")
            continue
        published = f"{row['published_kw']:.0f}" if row["published_kw"] else "-"
        print(
            f"  {row['rose']:>6} {row['cells_per_side']:>4} k={row['k']:<4} {row['solver']:<7}"
            f" {row['expected_power_kw']:>10.1f} kW  published {published:>7}  {row['wall_time']:.1f} s"
        )
    if suite.caveat:
        print(f"\nnote: {suite.caveat}")
    print("\n=== end ===\n")


if __name__ == "__main__":
    setup_logging()
    if len(sys.argv) < 2:
        print("usage: python run_benchmark.py SUITE [OUT_DIR]")
        sys.exit(1)
    suite = load_suite(sys.argv[1])
    rows = run_suite(suite, sys.argv[2] if len(sys.argv) > 2 else "output/benchmark")
    print_results(rows, suite)
