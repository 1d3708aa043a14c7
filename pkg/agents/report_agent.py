# ReportAgent: evaluates the final layout with the full wake model and writes layout, report and picture.

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from config.settings import RunConfig
from farm.evaluation import EvaluationReport, evaluate_layout
from farm.farm_domain import FarmGrid, TurbineSpec
from farm.wake_jensen import WakeParams
from farm.wind_resource import WindRose
from inference.qip_mrf import selected_cells
from inference.trws import SolveReport
from utils.layout_io import write_layout_csv
from utils.render import render_layout

logger = logging.getLogger(__name__)


class ReportAgent:
    def evaluate(self, layout, grid: FarmGrid, rose: WindRose, spec: TurbineSpec, params: WakeParams) -> EvaluationReport:
        report = evaluate_layout(selected_cells(layout), grid, rose, spec, params)
        logger.info(
            "%d turbines: expected power %.1f kW, aep %.4g kWh",
            len(report.cells), report.expected_power_kw, report.aep_kwh,
        )
        return report

    def build_report(
        self,
        cfg: RunConfig,
        evaluation: EvaluationReport,
        solve_report: Optional[SolveReport],
        extra: Dict[str, Any],
    ) -> Dict[str, Any]:
        return {
            "timestamp": datetime.now().isoformat(),
            "config": cfg.model_dump(),
            "evaluation": evaluation.to_dict(),
            "solve": solve_report.to_dict() if solve_report is not None else None,
            **extra,
        }

    def write(
        self,
        out_dir,
        layout,
        grid: FarmGrid,
        report: Dict[str, Any],
        wind_direction: Optional[float] = None,
    ) -> Dict[str, str]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        cells = selected_cells(layout)
        layout_path = write_layout_csv(out_dir / "layout.csv", cells, grid)
        report_path = out_dir / "report.json"
        with open(report_path, "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2, default=_json_default)
        svg_path = render_layout(grid, cells, out_dir / "layout.svg", wind_direction=wind_direction)
        logger.info("wrote %s, %s and %s", layout_path, report_path, svg_path)
        return {"layout": str(layout_path), "report": str(report_path), "svg": str(svg_path)}


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


if __name__ == "__main__":
    # this block allows testing the report agent in isolation with the southern row of the bundled instance
    from agents.matrix_agent import MatrixAgent
    from config.settings import CONFIGS_PATH, load_config, setup_logging

    setup_logging()
    cfg = load_config(CONFIGS_PATH / "mosetti_wr1.yaml")
    built = MatrixAgent(progress=False).build(cfg)
    layout = np.zeros(built["grid"].n, dtype=np.int8)
    layout[: cfg.grid.cells_per_side] = 1
    evaluation = ReportAgent().evaluate(layout, built["grid"], built["rose"], built["spec"], built["params"])
    print("\nEvaluation:")
    print("=" * 80)
    print(f"turbines: {len(evaluation.cells)}")
    print(f"expected power: {evaluation.expected_power_kw:.1f} kW")
    print(f"aep: {evaluation.aep_kwh:.6g} kWh")
