# trws: sequential tree-reweighted message passing over pairwise and triplet factors with a monotone lower bound.

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from inference.qip_mrf import MrfModel, mrf_energy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Sweeps are deterministic. `seed` is carried so that randomized decode
    restarts built on a solve can share the run's seed; the solver never draws
    from it."""

    max_sweeps: int = 2000
    tolerance: float = 1e-9
    cutoff_seconds: Optional[float] = 3600.0
    seed: int = 0

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be positive, got {self.max_sweeps}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.cutoff_seconds is not None and not self.cutoff_seconds > 0:
            raise ValueError(f"cutoff_seconds must be positive, got {self.cutoff_seconds}")


@dataclass(frozen=True)
class ChainDecomposition:
    """`rho` is the edge-appearance weight of each chain under the uniform
    distribution over chains. It is informational: TrwsSolver weights each
    vertex by 1 / chains_through(v), recounted when clusters join."""

    vertex_order: Tuple[int, ...]
    chains: Tuple[Tuple[int, ...], ...]
    rho: Tuple[float, ...]

    def chains_through(self, v: int) -> int:
        return sum(1 for chain in self.chains if v in chain)


def decompose(model: MrfModel) -> ChainDecomposition:
    """Covers every edge by exactly one chain that is increasing in vertex order.

    Each chain entering a vertex leaves through its lowest uncovered outgoing
    edge, so vertex v lies on max(in-degree, out-degree) chains. Those counts
    are the per-vertex averaging weights the solver uses."""
    n = model.n_vertices
    if n < 1:
        raise ValueError("cannot decompose a model without vertices")
    index = model.edge_index
    starts = np.searchsorted(index[:, 0], np.arange(n + 1))
    targets = index[:, 1]
    cursor = starts[:-1].copy()
    chains = []
    for s in range(n):
        while cursor[s] < starts[s + 1]:
            chain = [s]
            v = s
            while cursor[v] < starts[v + 1]:
                u = int(targets[cursor[v]])
                cursor[v] += 1
                chain.append(u)
                v = u
            chains.append(tuple(chain))
    rho = tuple(1.0 / len(chains) for _ in chains)
    return ChainDecomposition(vertex_order=tuple(range(n)), chains=tuple(chains), rho=rho)


@dataclass(eq=False)
class MessageState:
    """Reparameterized potentials. Messages are folded into the tables, so
    the energy of every labelling stays that of the original model."""

    unary: np.ndarray
    pair: np.ndarray
    edge_index: np.ndarray
    constant: float
    edge_active: np.ndarray
    clusters: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))
    cluster_pot: np.ndarray = field(default_factory=lambda: np.zeros((0, 2, 2, 2)))

    @classmethod
    def from_model(cls, model: MrfModel) -> "MessageState":
        return cls(
            unary=model.unary.copy(),
            pair=model.edge_pot.copy(),
            edge_index=model.edge_index.copy(),
            constant=model.constant,
            edge_active=np.ones(model.n_edges, dtype=bool),
        )

    @property
    def n_vertices(self) -> int:
        return int(self.unary.shape[0])

    def copy(self) -> "MessageState":
        return MessageState(
            unary=self.unary.copy(),
            pair=self.pair.copy(),
            edge_index=self.edge_index.copy(),
            constant=self.constant,
            edge_active=self.edge_active.copy(),
            clusters=self.clusters.copy(),
            cluster_pot=self.cluster_pot.copy(),
        )

    def energy(self, x) -> float:
        x = np.asarray(x, dtype=np.int64)
        if x.shape != (self.n_vertices,):
            raise ValueError(f"labelling has length {x.size}, state has {self.n_vertices} vertices")
        total = self.constant + float(self.unary[np.arange(self.n_vertices), x].sum())
        if len(self.pair):
            s, t = self.edge_index[:, 0], self.edge_index[:, 1]
            total += float(self.pair[np.arange(len(self.pair)), x[s], x[t]].sum())
        if len(self.clusters):
            c = self.clusters
            total += float(self.cluster_pot[np.arange(len(c)), x[c[:, 0]], x[c[:, 1]], x[c[:, 2]]].sum())
        return total

    def lower_bound(self) -> float:
        bound = self.constant + float(self.unary.min(axis=1).sum())
        if len(self.pair):
            bound += float(self.pair.min(axis=(1, 2)).sum())
        if len(self.cluster_pot):
            bound += float(self.cluster_pot.min(axis=(1, 2, 3)).sum())
        return bound

    def lookup(self, pairs) -> np.ndarray:
        # edge ids of (s, t) pairs in either orientation; -1 where absent
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        n = self.n_vertices
        wanted = pairs.min(axis=1) * n + pairs.max(axis=1)
        if len(self.edge_index) == 0:
            return np.full(len(wanted), -1, dtype=np.int64)
        keys = self.edge_index[:, 0] * n + self.edge_index[:, 1]
        pos = np.minimum(np.searchsorted(keys, wanted), len(keys) - 1)
        return np.where(keys[pos] == wanted, pos, -1)

    def ensure_edges(self, pairs) -> None:
        # absent edges are created with zero tables; ids of existing edges may shift
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        missing = pairs[self.lookup(pairs) < 0]
        if len(missing) == 0:
            return
        missing = np.unique(np.sort(missing, axis=1), axis=0)
        index = np.vstack([self.edge_index, missing])
        pair = np.concatenate([self.pair, np.zeros((len(missing), 2, 2))])
        active = np.concatenate([self.edge_active, np.ones(len(missing), dtype=bool)])
        order = np.argsort(index[:, 0] * self.n_vertices + index[:, 1], kind="stable")
        self.edge_index, self.pair, self.edge_active = index[order], pair[order], active[order]


def compute_message(state: MessageState, s: int, t: int, weight: float = 1.0) -> np.ndarray:
    eid = int(state.lookup([(s, t)])[0])
    if eid < 0:
        raise ValueError(f"no edge between {s} and {t}")
    table = state.pair[eid] if s < t else state.pair[eid].T
    return (weight * state.unary[s][:, None] + table).min(axis=0)


def pass_message(state: MessageState, s: int, t: int, weight: float = 1.0) -> MessageState:
    """Sends m_st(j) = min_i {w phi_s(i) + phi_st(i, j)} and folds it in.

    The sent share w phi_s moves into the edge table before m_st is moved from
    the edge to t, so every labelling keeps its energy and the bound does not
    drop."""
    eid = int(state.lookup([(s, t)])[0])
    if eid < 0:
        raise ValueError(f"no edge between {s} and {t}")
    share = weight * state.unary[s]
    table = state.pair[eid] if s < t else state.pair[eid].T
    message = (share[:, None] + table).min(axis=0)
    updated = table + share[:, None] - message[None, :]
    state.pair[eid] = updated if s < t else updated.T
    state.unary[s] -= share
    state.unary[t] += message
    return state


@dataclass
class SolveReport:
    best_assignment: np.ndarray
    best_energy: float
    lower_bound_trace: List[float]
    sweeps: int
    wall_time: float
    converged: bool
    min_marginals: np.ndarray
    initial_bound: float = float("-inf")

    @property
    def lower_bound(self) -> float:
        return self.lower_bound_trace[-1] if self.lower_bound_trace else self.initial_bound

    @property
    def gap(self) -> float:
        return self.best_energy - self.lower_bound

    def to_dict(self) -> Dict:
        return {
            "best_assignment": [int(v) for v in self.best_assignment],
            "best_energy": self.best_energy,
            "lower_bound": self.lower_bound,
            "gap": self.gap,
            "lower_bound_trace": list(self.lower_bound_trace),
            "sweeps": self.sweeps,
            "wall_time": self.wall_time,
            "converged": self.converged,
            "min_marginals": self.min_marginals.tolist(),
        }


class TrwsSolver:
    """Keeps its MessageState between solve() calls so clusters can be added
    and solving resumed from the current reparameterization.

    Vertices are visited in index order, forward then backward. At each vertex
    every incident factor hands its min-marginal to the unary term, and the
    unary term is then split over the factors leading onward with weight
    1 / max(n_in, n_out), the number of monotonic chains through the vertex."""

    def __init__(self, model: MrfModel, cfg: Optional[SolverConfig] = None):
        if model.n_vertices < 1:
            raise ValueError("cannot solve an empty model")
        self.model = model
        self.cfg = cfg or SolverConfig()
        self.state = MessageState.from_model(model)
        self.best_assignment: Optional[np.ndarray] = None
        self.best_energy = float("inf")
        self.min_marginals = self.state.unary.copy()
        self.sweeps = 0
        self._cluster_set = set()
        self._build_incidence()

    @property
    def clusters(self) -> List[Tuple[int, int, int]]:
        return [tuple(int(v) for v in row) for row in self.state.clusters]

    @property
    def cluster_set(self):
        return frozenset(self._cluster_set)

    @property
    def n_clusters(self) -> int:
        return len(self.state.clusters)

    def _build_incidence(self) -> None:
        n = self.state.n_vertices
        ids = np.flatnonzero(self.state.edge_active)
        s = self.state.edge_index[ids, 0]
        t = self.state.edge_index[ids, 1]
        by_s = np.argsort(s, kind="stable")
        bounds = np.searchsorted(s[by_s], np.arange(1, n))
        self._first = np.split(ids[by_s], bounds)
        by_t = np.argsort(t, kind="stable")
        bounds = np.searchsorted(t[by_t], np.arange(1, n))
        self._second = np.split(ids[by_t], bounds)
        self._second_other = np.split(s[by_t], bounds)
        self._slots = [[] for _ in range(n)]
        for c, members in enumerate(self.state.clusters):
            for p, v in enumerate(members):
                self._slots[int(v)].append((c, p))
        # clusters with a member before / after the vertex
        self._cl_before = np.array([sum(1 for _, p in slot if p > 0) for slot in self._slots])
        self._cl_after = np.array([sum(1 for _, p in slot if p < 2) for slot in self._slots])

    def add_clusters(self, triplets: Iterable[Sequence[int]]) -> int:
        n = self.state.n_vertices
        fresh = []
        for tri in triplets:
            a, b, c = sorted(int(v) for v in tri)
            if a == b or b == c:
                raise ValueError(f"cluster {tuple(tri)} needs three distinct vertices")
            if a < 0 or c >= n:
                raise ValueError(f"cluster {tuple(tri)} references a vertex outside 0..{n - 1}")
            if (a, b, c) in self._cluster_set or (a, b, c) in fresh:
                continue
            fresh.append((a, b, c))
        if not fresh:
            return 0
        st = self.state
        st.ensure_edges([pair for a, b, c in fresh for pair in ((a, b), (a, c), (b, c))])
        tables = np.zeros((len(fresh), 2, 2, 2))
        for i, (a, b, c) in enumerate(fresh):
            ab, ac, bc = st.lookup([(a, b), (a, c), (b, c)])
            # each edge table moves into at most one cluster
            if st.edge_active[ab]:
                tables[i] += st.pair[ab][:, :, None]
                st.pair[ab] = 0.0
                st.edge_active[ab] = False
            if st.edge_active[ac]:
                tables[i] += st.pair[ac][:, None, :]
                st.pair[ac] = 0.0
                st.edge_active[ac] = False
            if st.edge_active[bc]:
                tables[i] += st.pair[bc][None, :, :]
                st.pair[bc] = 0.0
                st.edge_active[bc] = False
            self._cluster_set.add((a, b, c))
        st.clusters = np.vstack([st.clusters, np.array(fresh, dtype=np.int64)])
        st.cluster_pot = np.concatenate([st.cluster_pot, tables])
        self._build_incidence()
        logger.debug("added %d clusters, %d in total", len(fresh), len(st.clusters))
        return len(fresh)

    def _collect(self, v: int) -> None:
        st = self.state
        first, second = self._first[v], self._second[v]
        if first.size:
            block = st.pair[first]
            delta = block.min(axis=2)
            st.pair[first] = block - delta[:, :, None]
            st.unary[v] += delta.sum(axis=0)
        if second.size:
            block = st.pair[second]
            delta = block.min(axis=1)
            st.pair[second] = block - delta[:, None, :]
            st.unary[v] += delta.sum(axis=0)
        for c, p in self._slots[v]:
            table = st.cluster_pot[c]
            delta = table.min(axis=tuple(q for q in range(3) if q != p))
            shape = [1, 1, 1]
            shape[p] = 2
            st.cluster_pot[c] = table - delta.reshape(shape)
            st.unary[v] += delta

    def _cluster_score(self, c: int, p: int, v: int, labels: np.ndarray) -> np.ndarray:
        members = self.state.clusters[c]
        table = np.moveaxis(self.state.cluster_pot[c], p, 0)
        others = [int(m) for q, m in enumerate(members) if q != p]
        # reduce the last axis first so the remaining axis numbers stay valid
        for axis in (2, 1):
            m = others[axis - 1]
            table = table.take(labels[m], axis=axis) if m < v else table.min(axis=axis)
        return table

    def _decode(self, v: int, labels: np.ndarray) -> None:
        st = self.state
        score = st.unary[v].copy()
        second = self._second[v]
        if second.size:
            score += st.pair[second, labels[self._second_other[v]], :].sum(axis=0)
        for c, p in self._slots[v]:
            score += self._cluster_score(c, p, v, labels)
        # label 0 on ties
        labels[v] = 0 if score[0] <= score[1] else 1
        self.min_marginals[v] = st.unary[v]

    def _distribute(self, v: int, forward: bool) -> None:
        st = self.state
        first, second = self._first[v], self._second[v]
        if forward:
            n_out = first.size + self._cl_after[v]
            n_in = second.size + self._cl_before[v]
        else:
            n_out = second.size + self._cl_before[v]
            n_in = first.size + self._cl_after[v]
        if n_out == 0:
            return
        share = st.unary[v] / max(n_in, n_out)
        if forward and first.size:
            st.pair[first] += share[None, :, None]
        elif not forward and second.size:
            st.pair[second] += share[None, None, :]
        for c, p in self._slots[v]:
            if (forward and p < 2) or (not forward and p > 0):
                shape = [1, 1, 1]
                shape[p] = 2
                st.cluster_pot[c] += share.reshape(shape)
        st.unary[v] -= n_out * share

    def _sweep(self) -> np.ndarray:
        n = self.state.n_vertices
        labels = np.zeros(n, dtype=np.int64)
        for v in range(n):
            self._collect(v)
            self._decode(v, labels)
            self._distribute(v, forward=True)
        for v in range(n - 1, -1, -1):
            self._collect(v)
            self._distribute(v, forward=False)
        return labels

    def solve(self, deadline: Optional[float] = None) -> SolveReport:
        # at least one sweep runs; the cut-off is checked between sweeps
        start = time.time()
        if deadline is None and self.cfg.cutoff_seconds is not None:
            deadline = start + self.cfg.cutoff_seconds
        initial = self.state.lower_bound()
        previous = initial
        trace = []
        converged = False
        sweeps = 0
        while True:
            labels = self._sweep()
            sweeps += 1
            self.sweeps += 1
            energy = mrf_energy(self.model, labels)
            if energy < self.best_energy:
                self.best_energy = energy
                self.best_assignment = labels.astype(np.int8)
            bound = self.state.lower_bound()
            trace.append(bound)
            logger.debug("sweep %d: lower bound %.10g, best energy %.10g", self.sweeps, bound, self.best_energy)
            if bound - previous < self.cfg.tolerance:
                converged = True
                break
            previous = bound
            if sweeps >= self.cfg.max_sweeps:
                break
            if deadline is not None and time.time() >= deadline:
                logger.info("cut-off reached after %d sweeps", sweeps)
                break
        elapsed = time.time() - start
        logger.info(
            "trws: %d sweeps in %.2f seconds, bound %.6g, best energy %.6g, converged %s",
            sweeps, elapsed, trace[-1], self.best_energy, converged,
        )
        return SolveReport(
            best_assignment=self.best_assignment.copy(),
            best_energy=self.best_energy,
            lower_bound_trace=trace,
            sweeps=sweeps,
            wall_time=elapsed,
            converged=converged,
            min_marginals=self.min_marginals.copy(),
            initial_bound=initial,
        )


def run(model: MrfModel, cfg: Optional[SolverConfig] = None) -> SolveReport:
    return TrwsSolver(model, cfg).solve()
