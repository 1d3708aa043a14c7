# MatrixAgent: resolves a run config into the farm instance and builds the wake interaction matrix.

import logging
import time
from pathlib import Path
from typing import Any, Dict

from config.settings import RunConfig, build_grid, build_rose, build_turbine, build_wake_params
from farm.farm_domain import proximity_pairs
from farm.wake_jensen import InteractionMatrix, build_interaction_matrix

logger = logging.getLogger(__name__)


class MatrixAgent:
    def __init__(self, progress: bool = True):
        self.progress = progress

    def build(self, cfg: RunConfig) -> Dict[str, Any]:
        start = time.time()
        rose = build_rose(cfg)
        grid = build_grid(cfg)
        spec = build_turbine(cfg)
        params = build_wake_params(cfg, spec, rose)
        exclusions = proximity_pairs(grid, spec, cfg.grid.min_separation_m)
        matrix = build_interaction_matrix(grid, rose, spec, params, progress=self.progress)
        elapsed = time.time() - start
        logger.info(
            "%d cells, %d wind states, %d exclusions; instance ready in %.2f seconds",
            grid.n, len(rose), len(exclusions), elapsed,
        )
        return {
            "rose": rose,
            "grid": grid,
            "spec": spec,
            "params": params,
            "exclusions": exclusions,
            "matrix": matrix,
            "matrix_seconds": elapsed,
        }

    def dump(self, matrix: InteractionMatrix, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        matrix.save(path)
        logger.info("wrote %dx%d matrix to %s", matrix.n, matrix.n, path)
        return path


if __name__ == "__main__":
    # this block allows testing the matrix agent in isolation on the bundled 100-cell instance
    from config.settings import CONFIGS_PATH, load_config, setup_logging

    setup_logging()
    built = MatrixAgent().build(load_config(CONFIGS_PATH / "mosetti_wr1.yaml"))
    matrix = built["matrix"]
    print(f"\ninteraction matrix: {matrix.n} x {matrix.n}, {int((matrix.entries > 0).sum())} nonzero entries")
    print(f"built in {built['matrix_seconds']:.2f} seconds")
