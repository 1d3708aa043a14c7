# layout csv files: one selected cell per row as `cell_index,x_m,y_m`.

from pathlib import Path
from typing import Iterable, List

import pandas as pd

from farm.farm_domain import FarmGrid

LAYOUT_COLUMNS = ["cell_index", "x_m", "y_m"]


def write_layout_csv(path, cells: Iterable[int], grid: FarmGrid) -> Path:
    path = Path(path)
    rows = []
    for cell in sorted(set(int(c) for c in cells)):
        x, y = grid.centroid(cell)
        rows.append({"cell_index": cell, "x_m": x, "y_m": y})
    pd.DataFrame(rows, columns=LAYOUT_COLUMNS).to_csv(path, index=False)
    return path


def read_layout_csv(path) -> List[int]:
    try:
        df = pd.read_csv(path)
    except pd.errors.EmptyDataError as e:
        raise ValueError(f"layout file {path} is empty") from e
    df.columns = [str(c).strip() for c in df.columns]
    if "cell_index" not in df.columns:
        raise ValueError(f"layout file {path} has no cell_index column")
    try:
        cells = [int(c) for c in df["cell_index"].tolist()]
    except ValueError as e:
        raise ValueError(f"non-integer cell index in {path}: {e}") from e
    if len(set(cells)) != len(cells):
        raise ValueError(f"layout file {path} repeats a cell")
    return cells
