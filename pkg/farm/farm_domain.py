# farm domain: turbine specification, discretized candidate cells and minimum-separation exclusions.

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

if TYPE_CHECKING:
    from farm.evaluation import PowerCurve

logger = logging.getLogger(__name__)

# turbines closer than this many rotor radii exclude each other
SEPARATION_RADII = 5.0


def load_speed_table(path) -> Tuple[np.ndarray, np.ndarray]:
    # reads a `speed_ms,value` csv, sorted by speed
    df = pd.read_csv(path, comment="#")
    df.columns = [str(c).strip() for c in df.columns]
    if "speed_ms" not in df.columns or "value" not in df.columns:
        raise ValueError(f"{path} must have columns speed_ms,value")
    df = df.sort_values("speed_ms", kind="mergesort")
    speeds = df["speed_ms"].astype(float).to_numpy()
    values = df["value"].astype(float).to_numpy()
    if len(speeds) == 0:
        raise ValueError(f"{path} has no rows")
    if np.any(np.diff(speeds) <= 0):
        raise ValueError(f"{path} has repeated speeds")
    return speeds, values


@dataclass(frozen=True, eq=False)
class ThrustCurve:
    speeds: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        speeds = np.asarray(self.speeds, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if speeds.shape != values.shape or speeds.size == 0:
            raise ValueError("thrust table needs matching, non-empty speed and value columns")
        if np.any(values <= 0) or np.any(values >= 1):
            raise ValueError("thrust coefficients must lie in (0, 1)")
        object.__setattr__(self, "speeds", speeds)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_csv(cls, path) -> "ThrustCurve":
        speeds, values = load_speed_table(path)
        return cls(speeds=speeds, values=values)

    def at(self, speed: float) -> float:
        # clamped at both ends of the table
        return float(np.interp(speed, self.speeds, self.values))


@dataclass(frozen=True)
class TurbineSpec:
    """Rotor radius and hub height in metres; thrust is a constant C_T or a
    speed-indexed table; power_curve None means the cubic law."""

    rotor_radius: float
    hub_height: float = 0.0
    thrust: Union[float, ThrustCurve] = 0.88
    power_curve: Optional["PowerCurve"] = None
    rated_power: Optional[float] = None

    def __post_init__(self):
        if not self.rotor_radius > 0:
            raise ValueError(f"rotor radius must be positive, got {self.rotor_radius}")
        if not isinstance(self.thrust, ThrustCurve) and not 0.0 < float(self.thrust) < 1.0:
            raise ValueError(f"thrust coefficient must lie in (0, 1), got {self.thrust}")
        if self.rated_power is not None and self.rated_power <= 0:
            raise ValueError(f"rated power must be positive, got {self.rated_power}")

    @property
    def min_separation(self) -> float:
        return SEPARATION_RADII * self.rotor_radius

    def thrust_at(self, speed: float) -> float:
        if isinstance(self.thrust, ThrustCurve):
            return self.thrust.at(speed)
        return float(self.thrust)


@dataclass(frozen=True, eq=False)
class FarmGrid:
    """Candidate cells indexed 0..N-1 with centroids in metres. Square grids are
    row-major from the south-west corner (x east, y north)."""

    x: np.ndarray
    y: np.ndarray
    cell_side: float
    bounds: Tuple[float, float, float, float] = field(default=(0.0, 0.0, 0.0, 0.0))
    cells_per_side: Optional[int] = None

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("centroid coordinate arrays must be 1-d and equally long")
        if len(set(zip(x.tolist(), y.tolist()))) != len(x):
            raise ValueError("cell centroids must be pairwise distinct")
        if not self.cell_side > 0:
            raise ValueError(f"cell side must be positive, got {self.cell_side}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_points(cls, xy, cell_side: float) -> "FarmGrid":
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        half = cell_side / 2.0
        bounds = (
            float(xy[:, 0].min() - half),
            float(xy[:, 1].min() - half),
            float(xy[:, 0].max() + half),
            float(xy[:, 1].max() + half),
        ) if len(xy) else (0.0, 0.0, 0.0, 0.0)
        return cls(x=xy[:, 0], y=xy[:, 1], cell_side=cell_side, bounds=bounds)

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def cells(self):
        return [(i, float(self.x[i]), float(self.y[i])) for i in range(self.n)]

    def centroid(self, index: int) -> Tuple[float, float]:
        if not 0 <= index < self.n:
            raise IndexError(f"cell index {index} outside 0..{self.n - 1}")
        return float(self.x[index]), float(self.y[index])

    def positions(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


def make_square_grid(area_side: float, cells_per_side: int) -> FarmGrid:
    if cells_per_side < 1:
        raise ValueError(f"cells_per_side must be at least 1, got {cells_per_side}")
    if not area_side > 0:
        raise ValueError(f"area side must be positive, got {area_side}")
    side = area_side / cells_per_side
    centers = (np.arange(cells_per_side) + 0.5) * side
    # row-major: index = row * cells_per_side + col, row 0 at the south edge
    yy, xx = np.meshgrid(centers, centers, indexing="ij")
    return FarmGrid(
        x=xx.ravel(),
        y=yy.ravel(),
        cell_side=side,
        bounds=(0.0, 0.0, float(area_side), float(area_side)),
        cells_per_side=cells_per_side,
    )


@dataclass(frozen=True)
class ProximityPairs:
    pairs: Tuple[Tuple[int, int], ...]
    min_separation: float

    def __len__(self):
        return len(self.pairs)

    def as_matrix(self, n: int) -> np.ndarray:
        excluded = np.zeros((n, n), dtype=bool)
        if self.pairs:
            idx = np.asarray(self.pairs, dtype=int)
            if idx.max() >= n:
                raise ValueError(f"exclusion pair references cell {idx.max()} but grid has {n} cells")
            excluded[idx[:, 0], idx[:, 1]] = True
            excluded[idx[:, 1], idx[:, 0]] = True
        return excluded

    def violations(self, cells) -> list:
        chosen = set(int(c) for c in cells)
        return [(i, j) for i, j in self.pairs if i in chosen and j in chosen]


def no_exclusions() -> ProximityPairs:
    return ProximityPairs(pairs=(), min_separation=0.0)


def proximity_pairs(grid: FarmGrid, spec: TurbineSpec, min_separation: Optional[float] = None) -> ProximityPairs:
    limit = spec.min_separation if min_separation is None else float(min_separation)
    if limit <= 0 or grid.n < 2:
        return ProximityPairs(pairs=(), min_separation=max(limit, 0.0))
    points = grid.positions()
    tree = cKDTree(points)
    # query_pairs is inclusive at the radius; equality is allowed, so filter strictly
    candidates = tree.query_pairs(r=limit, output_type="ndarray")
    if len(candidates) == 0:
        return ProximityPairs(pairs=(), min_separation=limit)
    candidates = np.sort(candidates, axis=1)
    delta = points[candidates[:, 0]] - points[candidates[:, 1]]
    dist = np.hypot(delta[:, 0], delta[:, 1])
    kept = candidates[dist < limit]
    order = np.lexsort((kept[:, 1], kept[:, 0]))
    pairs = tuple((int(i), int(j)) for i, j in kept[order])
    logger.info("%d proximity exclusions below %.1f m", len(pairs), limit)
    return ProximityPairs(pairs=pairs, min_separation=limit)
