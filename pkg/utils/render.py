# svg rendering of a layout on its candidate grid, with the dominant wind direction as an arrow.

import logging
import math
from pathlib import Path
from typing import Iterable, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from farm.farm_domain import FarmGrid  # noqa: E402

logger = logging.getLogger(__name__)

# fixed ids and no date keep the svg bytes stable
plt.rcParams["svg.hashsalt"] = "wflo"


def render_layout(
    grid: FarmGrid,
    cells: Iterable[int],
    path,
    wind_direction: Optional[float] = None,
    title: Optional[str] = None,
) -> Path:
    chosen = sorted(set(int(c) for c in cells))
    for c in chosen:
        if not 0 <= c < grid.n:
            raise ValueError(f"layout cell {c} is not on the {grid.n}-cell grid")
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 6))
    half = grid.cell_side / 2.0
    for x, y in zip(grid.x, grid.y):
        ax.add_patch(Rectangle((x - half, y - half), grid.cell_side, grid.cell_side, fill=False, lw=0.4, ec="0.7"))
    if chosen:
        ax.scatter(grid.x[chosen], grid.y[chosen], marker="^", s=40, c="tab:blue", zorder=3)
    x0, y0, x1, y1 = grid.bounds
    if x1 <= x0 or y1 <= y0:
        x0, y0 = float(grid.x.min()) - half, float(grid.y.min()) - half
        x1, y1 = float(grid.x.max()) + half, float(grid.y.max()) + half
    if wind_direction is not None:
        # the arrow points the way the wind blows, away from its FROM-direction
        rad = math.radians(wind_direction)
        length = 0.12 * max(x1 - x0, y1 - y0)
        cx, cy = x0 + length, y1 - length
        dx, dy = -math.sin(rad) * length, -math.cos(rad) * length
        ax.annotate("", xy=(cx + dx / 2, cy + dy / 2), xytext=(cx - dx / 2, cy - dy / 2),
                    arrowprops=dict(arrowstyle="->", lw=1.5), annotation_clip=False)
    ax.set_xlim(x0, x1)
    ax.set_ylim(y0, y1)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(title or f"{len(chosen)} turbines on {grid.n} cells")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug("rendered %d turbines to %s", len(chosen), path)
    return path
