# jensen wake model: single-wake deficits, squared-sum wake combination and the interaction matrix W.

import logging
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from farm.farm_domain import FarmGrid, ThrustCurve, TurbineSpec
from farm.wind_resource import WindRose, WindState

logger = logging.getLogger(__name__)

WAKE_RADIUS_MODES = ("rotor", "expanded")


def axial_induction(c_t: float) -> float:
    # inverse of C_T = 4a(1 - a) on the branch a < 0.5
    if not 0.0 < c_t < 1.0:
        raise ValueError(f"thrust coefficient must lie in (0, 1), got {c_t}")
    return (1.0 - math.sqrt(1.0 - c_t)) / 2.0


@dataclass(frozen=True)
class WakeParams:
    """Wake-decay constant, axial induction factor and which radius seeds the
    wake cone: the rotor radius, or the expanded radius just behind the rotor."""

    decay: float = 0.1
    induction: float = axial_induction(0.88)
    wake_radius: str = "rotor"

    def __post_init__(self):
        if not self.decay > 0:
            raise ValueError(f"wake decay must be positive, got {self.decay}")
        if not 0.0 < self.induction < 0.5:
            raise ValueError(f"axial induction must lie in (0, 0.5), got {self.induction}")
        if self.wake_radius not in WAKE_RADIUS_MODES:
            raise ValueError(f"wake_radius must be one of {WAKE_RADIUS_MODES}, got {self.wake_radius!r}")

    def effective_radius(self, rotor_radius: float) -> float:
        if self.wake_radius == "expanded":
            a = self.induction
            return rotor_radius * math.sqrt((1.0 - a) / (1.0 - 2.0 * a))
        return rotor_radius

    def with_induction(self, induction: float) -> "WakeParams":
        return replace(self, induction=induction)


def wake_params_for(spec: TurbineSpec, speed: float, decay: float = 0.1, wake_radius: str = "rotor") -> WakeParams:
    # table turbines take C_T at the free-stream speed so W stays layout-independent
    return WakeParams(decay=decay, induction=axial_induction(spec.thrust_at(speed)), wake_radius=wake_radius)


def params_for_state(spec: TurbineSpec, state: WindState, params: WakeParams) -> WakeParams:
    if isinstance(spec.thrust, ThrustCurve):
        return params.with_induction(axial_induction(spec.thrust_at(state.speed)))
    return params


def _wind_axes(direction: float) -> Tuple[float, float]:
    # sin/cos of the FROM-direction; opposite directions get exact negations
    base = direction % 180.0
    if base == 0.0:
        s, c = 0.0, 1.0
    elif base == 90.0:
        s, c = 1.0, 0.0
    else:
        rad = math.radians(base)
        s, c = math.sin(rad), math.cos(rad)
    if direction % 360.0 >= 180.0:
        s, c = -s, -c
    return s, c


def single_wake_deficit(upstream, downstream, direction: float, params: WakeParams, rotor_radius: float) -> float:
    s, c = _wind_axes(direction)
    dx = downstream[0] - upstream[0]
    dy = downstream[1] - upstream[1]
    # the wind blows towards (-sin, -cos)
    d = -(dx * s + dy * c)
    r = abs(dx * c - dy * s)
    if d <= 0:
        return 0.0
    radius = params.effective_radius(rotor_radius)
    if r > radius + params.decay * d:
        return 0.0
    return 2.0 * params.induction / (1.0 + params.decay * d / radius) ** 2


def _deficits(xs: np.ndarray, ys: np.ndarray, direction: float, params: WakeParams, rotor_radius: float) -> np.ndarray:
    # entry [i, j] is the deficit at point j caused by a turbine at point i
    s, c = _wind_axes(direction)
    dx = xs[None, :] - xs[:, None]
    dy = ys[None, :] - ys[:, None]
    d = -(dx * s + dy * c)
    r = np.abs(dx * c - dy * s)
    radius = params.effective_radius(rotor_radius)
    inside = (d > 0) & (r <= radius + params.decay * d)
    out = np.zeros_like(d)
    out[inside] = 2.0 * params.induction / (1.0 + params.decay * d[inside] / radius) ** 2
    return out


def deficit_matrix(grid: FarmGrid, direction: float, params: WakeParams, rotor_radius: float) -> np.ndarray:
    return _deficits(grid.x, grid.y, direction, params, rotor_radius)


def combined_speed(
    active_cells: Iterable[int],
    target: int,
    state: WindState,
    grid: FarmGrid,
    params: WakeParams,
    rotor_radius: float,
) -> float:
    target_xy = grid.centroid(target)
    total = 0.0
    for cell in sorted(set(int(c) for c in active_cells)):
        if cell == target:
            continue
        deficit = single_wake_deficit(grid.centroid(cell), target_xy, state.direction, params, rotor_radius)
        total += deficit * deficit
    return max(0.0, state.speed * (1.0 - math.sqrt(total)))


def effective_speeds(
    cells: Sequence[int],
    state: WindState,
    grid: FarmGrid,
    params: WakeParams,
    rotor_radius: float,
) -> np.ndarray:
    idx = np.asarray(cells, dtype=int)
    if idx.size == 0:
        return np.zeros(0)
    deficits = _deficits(grid.x[idx], grid.y[idx], state.direction, params, rotor_radius)
    squared = (deficits * deficits).sum(axis=0)
    return np.maximum(0.0, state.speed * (1.0 - np.sqrt(squared)))


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    entries: np.ndarray

    def __post_init__(self):
        w = np.array(self.entries, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"interaction matrix must be square, got shape {w.shape}")
        if np.any(np.diag(w) != 0.0):
            raise ValueError("interaction matrix diagonal must be zero")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("interaction matrix entries must be finite and nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "entries", w)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    def symmetrized(self) -> np.ndarray:
        return self.entries + self.entries.T

    def max_asymmetry(self) -> float:
        if self.n == 0:
            return 0.0
        return float(np.max(np.abs(self.entries - self.entries.T)))

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return self.max_asymmetry() < tol

    def one_sided(self) -> bool:
        # no pair of cells wakes each other
        return bool(np.all(self.entries * self.entries.T == 0.0))

    def save(self, path) -> None:
        path = Path(path)
        if path.suffix == ".npy":
            np.save(path, self.entries)
            return
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(f"n\n{self.n}\n")
            pd.DataFrame(self.entries).to_csv(f, header=False, index=False, float_format="%.17g")

    @classmethod
    def load(cls, path) -> "InteractionMatrix":
        path = Path(path)
        if path.suffix == ".npy":
            return cls(entries=np.load(path))
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().strip()
            if header != "n":
                raise ValueError(f"{path} does not start with the `n` header row")
            n = int(f.readline().strip())
            if n == 0:
                return cls(entries=np.zeros((0, 0)))
            values = pd.read_csv(f, header=None).to_numpy(dtype=float)
        if values.shape != (n, n):
            raise ValueError(f"{path} declares n={n} but holds a {values.shape} table")
        return cls(entries=values)


def build_interaction_matrix(
    grid: FarmGrid,
    rose: WindRose,
    spec: TurbineSpec,
    params: WakeParams,
    progress: bool = False,
) -> InteractionMatrix:
    start = time.time()
    # states sharing a deficit field are grouped; keys keep first-appearance order
    groups = {}
    for state in rose.states:
        state_params = params_for_state(spec, state, params)
        key = (state.direction % 360.0, state_params.induction)
        groups.setdefault(key, (state_params, []))[1].append(state)
    w = np.zeros((grid.n, grid.n))
    for (direction, _), (state_params, states) in tqdm(
        groups.items(), desc="  wake fields", disable=not progress
    ):
        deficits = deficit_matrix(grid, direction, state_params, spec.rotor_radius)
        squared = deficits * deficits
        for state in states:
            w += (state.probability * state.speed) * squared
    np.fill_diagonal(w, 0.0)
    elapsed = time.time() - start
    logger.info("interaction matrix %dx%d from %d wind states in %.2f seconds", grid.n, grid.n, len(rose), elapsed)
    return InteractionMatrix(entries=w)
