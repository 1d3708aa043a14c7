# tightening: triplet clusters that tighten the relaxation, chosen by guaranteed dual-bound gain.

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from inference.qip_mrf import MrfModel
from inference.trws import MessageState, SolveReport, SolverConfig, TrwsSolver

logger = logging.getLogger(__name__)

Triplet = Tuple[int, int, int]


@dataclass(frozen=True)
class TripletCluster:
    vertices: Triplet

    def __post_init__(self):
        a, b, c = sorted(int(v) for v in self.vertices)
        if a == b or b == c:
            raise ValueError(f"triplet {self.vertices} needs three distinct vertices")
        object.__setattr__(self, "vertices", (a, b, c))


@dataclass
class TightenedModel:
    base: MrfModel
    clusters: List[TripletCluster] = field(default_factory=list)
    polytope_generation: int = 0


@dataclass(frozen=True)
class TightenConfig:
    max_clusters: int = 5000
    clusters_per_round: int = 20
    # candidate edges come from this top share of edge strengths
    top_percent: float = 5.0
    max_candidates: int = 50000
    min_score: float = 1e-9

    def __post_init__(self):
        if self.max_clusters < 0:
            raise ValueError(f"max_clusters must be nonnegative, got {self.max_clusters}")
        if self.clusters_per_round < 1:
            raise ValueError(f"clusters_per_round must be positive, got {self.clusters_per_round}")
        if not 0 < self.top_percent <= 100:
            raise ValueError(f"top_percent must lie in (0, 100], got {self.top_percent}")


def candidate_triplets(model: MrfModel, top_percent: float = 5.0, max_candidates: int = 50000) -> np.ndarray:
    # triangles whose three edges are all among the strongest, in lexicographic order
    if model.n_edges == 0:
        return np.zeros((0, 3), dtype=np.int64)
    strength = model.edge_strength()
    threshold = np.percentile(strength, 100.0 - top_percent)
    strong = model.edge_index[strength >= threshold]
    higher = {}
    for a, b in strong:
        higher.setdefault(int(a), set()).add(int(b))
    found = []
    for a in sorted(higher):
        nbrs = sorted(higher[a])
        for i, b in enumerate(nbrs):
            b_higher = higher.get(b, ())
            for c in nbrs[i + 1:]:
                if c in b_higher:
                    found.append((a, b, c))
                    if len(found) >= max_candidates:
                        return np.array(found, dtype=np.int64)
    return np.array(found, dtype=np.int64).reshape(-1, 3)


def triplet_scores(state: MessageState, triplets: np.ndarray) -> np.ndarray:
    # joint minimum of the three edge tables minus their separate minima
    triplets = np.asarray(triplets, dtype=np.int64).reshape(-1, 3)
    if len(triplets) == 0:
        return np.zeros(0)
    a, b, c = triplets[:, 0], triplets[:, 1], triplets[:, 2]
    ids = [state.lookup(np.column_stack(p)) for p in ((a, b), (a, c), (b, c))]
    tables = []
    for eid in ids:
        t = np.zeros((len(triplets), 2, 2))
        present = eid >= 0
        t[present] = state.pair[eid[present]]
        tables.append(t)
    ab, ac, bc = tables
    joint = ab[:, :, :, None] + ac[:, :, None, :] + bc[:, None, :, :]
    separate = ab.min(axis=(1, 2)) + ac.min(axis=(1, 2)) + bc.min(axis=(1, 2))
    return np.maximum(joint.reshape(len(triplets), -1).min(axis=1) - separate, 0.0)


def score_candidate_triplets(
    model: MrfModel,
    solver_state: MessageState,
    max_candidates: int = 50000,
    top_percent: float = 5.0,
    exclude: Iterable[Triplet] = (),
) -> List[Tuple[Triplet, float]]:
    triplets = candidate_triplets(model, top_percent, max_candidates)
    skip = set(tuple(t) for t in exclude)
    if skip and len(triplets):
        keep = np.array([tuple(int(v) for v in t) not in skip for t in triplets], dtype=bool)
        triplets = triplets[keep]
    if len(triplets) == 0:
        return []
    scores = triplet_scores(solver_state, triplets)
    # best score first, ties in lexicographic vertex order
    order = np.lexsort((triplets[:, 2], triplets[:, 1], triplets[:, 0], -scores))
    return [(tuple(int(v) for v in triplets[i]), float(scores[i])) for i in order]


def _with_cluster_edges(model: MrfModel, clusters: Sequence[Triplet]) -> MrfModel:
    pairs = np.array([p for a, b, c in clusters for p in ((a, b), (a, c), (b, c))], dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        return model
    missing = np.unique(pairs[model.find_edges(pairs) < 0], axis=0)
    if len(missing) == 0:
        return model
    return model.with_edges(missing, np.zeros((len(missing), 2, 2)))


def _merge_reports(reports: List[SolveReport], solver: TrwsSolver) -> SolveReport:
    last = reports[-1]
    return SolveReport(
        best_assignment=solver.best_assignment.copy(),
        best_energy=solver.best_energy,
        lower_bound_trace=[b for r in reports for b in r.lower_bound_trace],
        sweeps=sum(r.sweeps for r in reports),
        wall_time=sum(r.wall_time for r in reports),
        converged=last.converged,
        min_marginals=last.min_marginals,
        initial_bound=reports[0].initial_bound,
    )


def tighten(
    solver: TrwsSolver,
    cfg: TightenConfig,
    deadline: Optional[float] = None,
    report: Optional[SolveReport] = None,
) -> Tuple[TightenedModel, SolveReport]:
    """Alternates scoring, adding the best clusters and re-solving on an
    existing solver until the cluster budget, the candidate pool or the
    cut-off runs out. Pass the report of the solve already done, if any."""
    reports = [report] if report is not None else [solver.solve(deadline)]
    generation = 0
    while solver.n_clusters < cfg.max_clusters:
        if deadline is not None and time.time() >= deadline:
            logger.info("cut-off reached while tightening, %d clusters", solver.n_clusters)
            break
        ranked = score_candidate_triplets(
            solver.model, solver.state, cfg.max_candidates, cfg.top_percent, exclude=solver.cluster_set
        )
        room = min(cfg.clusters_per_round, cfg.max_clusters - solver.n_clusters)
        chosen = [tri for tri, score in ranked if score > cfg.min_score][:room]
        if not chosen:
            break
        solver.add_clusters(chosen)
        generation += 1
        reports.append(solver.solve(deadline))
        logger.debug("round %d: %d clusters, bound %.10g", generation, solver.n_clusters, reports[-1].lower_bound)
    clusters = solver.clusters
    tightened = TightenedModel(
        base=_with_cluster_edges(solver.model, clusters),
        clusters=[TripletCluster(t) for t in clusters],
        polytope_generation=generation,
    )
    if generation:
        logger.info("tightening: %d clusters over %d rounds, bound %.6g", len(clusters), generation, reports[-1].lower_bound)
    return tightened, _merge_reports(reports, solver)


def tighten_and_resolve(
    model: MrfModel,
    cfg: TightenConfig,
    solver_cfg: Optional[SolverConfig] = None,
    clusters: Optional[Sequence[TripletCluster]] = None,
) -> Tuple[TightenedModel, SolveReport]:
    solver_cfg = solver_cfg or SolverConfig()
    start = time.time()
    deadline = start + solver_cfg.cutoff_seconds if solver_cfg.cutoff_seconds is not None else None
    solver = TrwsSolver(model, solver_cfg)
    if clusters:
        # pre-generated clusters count against the budget
        solver.add_clusters([c.vertices for c in clusters][: cfg.max_clusters])
    return tighten(solver, cfg, deadline)


def dump_clusters(clusters: Iterable[TripletCluster], path) -> None:
    with open(Path(path), "w", encoding="utf-8") as f:
        for cluster in clusters:
            a, b, c = cluster.vertices
            f.write(f"c {a} {b} {c}\n")


def load_clusters(path) -> List[TripletCluster]:
    clusters = []
    with open(Path(path), "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] != "c" or len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected `c a b c`, got {line.strip()!r}")
            try:
                clusters.append(TripletCluster(tuple(int(p) for p in parts[1:])))
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from e
    logger.info("loaded %d clusters from %s", len(clusters), path)
    return clusters
