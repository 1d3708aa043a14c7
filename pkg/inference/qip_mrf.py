# qip_mrf: turbine-budget quadratic program, penalty expansion and the pairwise binary mrf it induces.

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from farm.farm_domain import ProximityPairs, no_exclusions
from farm.wake_jensen import InteractionMatrix

logger = logging.getLogger(__name__)

# exclusion penalty as a multiple of beta
EXCLUSION_FACTOR = 1e3


@dataclass(frozen=True, eq=False)
class QipModel:
    w: InteractionMatrix
    k: int
    exclusions: ProximityPairs = no_exclusions()

    def __post_init__(self):
        if not 0 <= self.k <= self.w.n:
            raise ValueError(f"turbine budget k={self.k} outside 0..{self.w.n}")
        for i, j in self.exclusions.pairs:
            if not (0 <= i < self.w.n and 0 <= j < self.w.n) or i == j:
                raise ValueError(f"exclusion pair ({i}, {j}) is not a valid pair of cells")

    @property
    def n(self) -> int:
        return self.w.n


@dataclass(frozen=True, eq=False)
class MrfModel:
    """Pairwise binary energy. unary is (n, 2); edge_index holds canonical
    (s, t) rows with s < t sorted lexicographically; edge_pot is (m, 2, 2)
    indexed [x_s, x_t]."""

    n_vertices: int
    unary: np.ndarray
    edge_index: np.ndarray
    edge_pot: np.ndarray
    constant: float = 0.0

    def __post_init__(self):
        unary = np.array(self.unary, dtype=float).reshape(self.n_vertices, 2)
        index = np.array(self.edge_index, dtype=np.int64).reshape(-1, 2)
        pot = np.array(self.edge_pot, dtype=float).reshape(-1, 2, 2)
        if len(index) != len(pot):
            raise ValueError(f"{len(index)} edges but {len(pot)} pairwise tables")
        if len(index):
            if np.any(index[:, 0] >= index[:, 1]):
                raise ValueError("every edge must be stored as (s, t) with s < t")
            if index.min() < 0 or index.max() >= self.n_vertices:
                raise ValueError("edge references a vertex outside the model")
            keys = index[:, 0] * self.n_vertices + index[:, 1]
            order = np.argsort(keys, kind="stable")
            if np.any(np.diff(keys[order]) == 0):
                raise ValueError("duplicate edge in model")
            index, pot = index[order], pot[order]
        if not (np.all(np.isfinite(unary)) and np.all(np.isfinite(pot)) and np.isfinite(self.constant)):
            raise ValueError("all potentials must be finite")
        for arr in (unary, index, pot):
            arr.setflags(write=False)
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "edge_index", index)
        object.__setattr__(self, "edge_pot", pot)
        object.__setattr__(self, "constant", float(self.constant))

    @classmethod
    def from_edges(cls, n_vertices: int, unary, edges: Iterable[Sequence[float]], constant: float = 0.0) -> "MrfModel":
        # edges as (s, t, f00, f01, f10, f11); reversed pairs are transposed
        index, pot = [], []
        for s, t, f00, f01, f10, f11 in edges:
            table = np.array([[f00, f01], [f10, f11]], dtype=float)
            if s > t:
                s, t, table = t, s, table.T
            index.append((int(s), int(t)))
            pot.append(table)
        return cls(
            n_vertices=n_vertices,
            unary=unary,
            edge_index=np.array(index, dtype=np.int64).reshape(-1, 2),
            edge_pot=np.array(pot, dtype=float).reshape(-1, 2, 2),
            constant=constant,
        )

    @property
    def n_edges(self) -> int:
        return int(len(self.edge_index))

    @property
    def edges(self) -> List[Tuple[int, int, float, float, float, float]]:
        return [
            (int(s), int(t), float(p[0, 0]), float(p[0, 1]), float(p[1, 0]), float(p[1, 1]))
            for (s, t), p in zip(self.edge_index, self.edge_pot)
        ]

    def edge_keys(self) -> np.ndarray:
        return self.edge_index[:, 0] * self.n_vertices + self.edge_index[:, 1]

    def find_edges(self, pairs) -> np.ndarray:
        # edge ids of canonical (s, t) pairs; -1 where absent
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if len(pairs) == 0:
            return np.zeros(0, dtype=np.int64)
        lo, hi = pairs.min(axis=1), pairs.max(axis=1)
        wanted = lo * self.n_vertices + hi
        keys = self.edge_keys()
        if len(keys) == 0:
            return np.full(len(wanted), -1, dtype=np.int64)
        pos = np.minimum(np.searchsorted(keys, wanted), len(keys) - 1)
        return np.where(keys[pos] == wanted, pos, -1)

    def with_edges(self, pairs, tables) -> "MrfModel":
        # adds tables onto existing edges and creates absent ones
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        tables = np.asarray(tables, dtype=float).reshape(-1, 2, 2)
        index = self.edge_index.copy()
        pot = self.edge_pot.copy()
        ids = self.find_edges(pairs)
        new_index, new_pot = [], []
        for (s, t), table, eid in zip(pairs, tables, ids):
            if s > t:
                s, t, table = t, s, table.T
            if eid >= 0:
                pot[eid] += table
            else:
                new_index.append((s, t))
                new_pot.append(table)
        if new_index:
            # repeated absent pairs in one call are merged
            merged = {}
            for key, table in zip(new_index, new_pot):
                merged[key] = merged.get(key, 0.0) + table
            index = np.vstack([index, np.array(list(merged.keys()), dtype=np.int64)])
            pot = np.concatenate([pot, np.array(list(merged.values()), dtype=float)])
        return MrfModel(self.n_vertices, self.unary, index, pot, self.constant)

    def edge_strength(self) -> np.ndarray:
        p = self.edge_pot
        return np.abs(p[:, 0, 0] + p[:, 1, 1] - p[:, 0, 1] - p[:, 1, 0])

    def dump(self, path) -> None:
        with open(Path(path), "w", encoding="utf-8") as f:
            f.write(f"# n {self.n_vertices} constant {self.constant!r}\n")
            for s, (f0, f1) in enumerate(self.unary):
                f.write(f"u {s} {float(f0)!r} {float(f1)!r}\n")
            for s, t, f00, f01, f10, f11 in self.edges:
                f.write(f"e {s} {t} {f00!r} {f01!r} {f10!r} {f11!r}\n")


def _as_layout(x, n: int) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (n,):
        raise ValueError(f"layout has length {x.size}, model has {n} vertices")
    if not np.all((x == 0) | (x == 1)):
        raise ValueError("layout entries must be 0 or 1")
    return x.astype(np.int64)


def layout_from_cells(cells: Iterable[int], n: int) -> np.ndarray:
    x = np.zeros(n, dtype=np.int8)
    idx = np.asarray(sorted(set(int(c) for c in cells)), dtype=np.int64)
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise ValueError(f"cell index outside 0..{n - 1}")
    x[idx] = 1
    return x


def selected_cells(layout) -> List[int]:
    return [int(i) for i in np.flatnonzero(np.asarray(layout))]


def mrf_energy(model: MrfModel, x) -> float:
    x = _as_layout(x, model.n_vertices)
    energy = model.constant + float(model.unary[np.arange(model.n_vertices), x].sum())
    if model.n_edges:
        s, t = model.edge_index[:, 0], model.edge_index[:, 1]
        energy += float(model.edge_pot[np.arange(model.n_edges), x[s], x[t]].sum())
    return energy


def surrogate_energy(w: InteractionMatrix, cells: Iterable[int]) -> float:
    idx = np.asarray(sorted(set(int(c) for c in cells)), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    return float(w.entries[np.ix_(idx, idx)].sum())


def default_beta(w: InteractionMatrix, k: int) -> float:
    # one violation of the budget always costs more than any set of k cells interacts
    if k == 0 or w.n == 0:
        return 1.0
    rows = np.sort(w.symmetrized().sum(axis=1))[::-1]
    return 1.0 + float(rows[:k].sum())


def build_penalized_mrf(qip: QipModel, beta: float) -> MrfModel:
    if not beta > 0:
        raise ValueError(f"penalty factor beta must be positive, got {beta}")
    n, k = qip.n, qip.k
    unary = np.zeros((n, 2))
    unary[:, 1] = beta * (1 - 2 * k)
    s, t = np.triu_indices(n, 1)
    phi11 = qip.w.entries[s, t] + qip.w.entries[t, s] + 2.0 * beta
    keep = phi11 != 0.0
    pot = np.zeros((int(keep.sum()), 2, 2))
    pot[:, 1, 1] = phi11[keep]
    model = MrfModel(
        n_vertices=n,
        unary=unary,
        edge_index=np.column_stack([s[keep], t[keep]]),
        edge_pot=pot,
        constant=beta * k * k,
    )
    logger.info("penalized mrf: %d vertices, %d edges, beta %.6g", n, model.n_edges, beta)
    return model


def add_exclusions(model: MrfModel, exclusions: ProximityPairs, penalty_m: float) -> MrfModel:
    if not penalty_m > 0:
        raise ValueError(f"exclusion penalty must be positive, got {penalty_m}")
    if not exclusions.pairs:
        return model
    tables = np.zeros((len(exclusions.pairs), 2, 2))
    tables[:, 1, 1] = penalty_m
    return model.with_edges(np.array(exclusions.pairs, dtype=np.int64), tables)


def build_wflo_mrf(qip: QipModel, beta: Optional[float] = None, exclusion_factor: float = EXCLUSION_FACTOR) -> Tuple[MrfModel, float]:
    beta = default_beta(qip.w, qip.k) if beta is None else float(beta)
    model = build_penalized_mrf(qip, beta)
    return add_exclusions(model, qip.exclusions, exclusion_factor * beta), beta
