# decode_round: min-marginal rounding to exactly k turbines, then best-improvement swap repair.

import logging

import numpy as np

from farm.farm_domain import ProximityPairs
from inference.qip_mrf import QipModel, surrogate_energy
from inference.trws import SolveReport

logger = logging.getLogger(__name__)


class InfeasibleLayoutError(ValueError):
    pass


def check_feasible(layout, qip: QipModel) -> np.ndarray:
    x = np.asarray(layout)
    if x.shape != (qip.n,):
        raise InfeasibleLayoutError(f"layout has length {x.size}, expected {qip.n}")
    x = x.astype(bool)
    if int(x.sum()) != qip.k:
        raise InfeasibleLayoutError(f"layout places {int(x.sum())} turbines, budget is {qip.k}")
    violated = qip.exclusions.violations(np.flatnonzero(x))
    if violated:
        raise InfeasibleLayoutError(f"layout violates {len(violated)} exclusion pairs, first {violated[0]}")
    return x


def round_top_k(report: SolveReport, k: int, exclusions: ProximityPairs) -> np.ndarray:
    mm = np.asarray(report.min_marginals, dtype=float)
    n = len(mm)
    if not 0 <= k <= n:
        raise ValueError(f"turbine budget k={k} outside 0..{n}")
    advantage = mm[:, 0] - mm[:, 1]
    # descending advantage, ties to the lower index
    order = np.lexsort((np.arange(n), -advantage))
    excluded = exclusions.as_matrix(n)
    blocked = np.zeros(n, dtype=bool)
    chosen = []
    for v in order:
        if len(chosen) == k:
            break
        if blocked[v]:
            continue
        chosen.append(int(v))
        blocked |= excluded[v]
    if len(chosen) < k:
        raise InfeasibleLayoutError(f"only {len(chosen)} mutually compatible cells found for k={k}")
    layout = np.zeros(n, dtype=np.int8)
    layout[chosen] = 1
    return layout


def decode_layout(report: SolveReport, qip: QipModel) -> np.ndarray:
    """Start point for repair: the rounded min-marginals, or the solver's best
    labelling when it already places exactly k compatible turbines and scores
    lower in X^T W X."""
    try:
        labelled = check_feasible(report.best_assignment, qip)
    except InfeasibleLayoutError:
        labelled = None
    try:
        rounded = round_top_k(report, qip.k, qip.exclusions)
    except InfeasibleLayoutError:
        if labelled is None:
            raise
        return labelled.astype(np.int8)
    if labelled is None:
        return rounded
    kept = surrogate_energy(qip.w, np.flatnonzero(labelled))
    candidate = surrogate_energy(qip.w, np.flatnonzero(rounded))
    if kept < candidate:
        logger.debug("solver labelling %.6g beats rounding %.6g", kept, candidate)
        return labelled.astype(np.int8)
    return rounded


def repair_swap(layout, qip: QipModel, max_passes: int = 1000, eps: float = 1e-12) -> np.ndarray:
    """Moves one turbine to one empty cell per pass, taking the feasible move
    that lowers X^T W X the most, until no move improves by more than eps."""
    x = check_feasible(layout, qip).copy()
    sym = qip.w.symmetrized()
    excluded = qip.exclusions.as_matrix(qip.n)
    for _ in range(max_passes):
        active = np.flatnonzero(x)
        empty = np.flatnonzero(~x)
        if active.size == 0 or empty.size == 0:
            break
        gain = sym[:, active].sum(axis=1)
        # moving a to e changes the energy by g_e - S[e, a] - g_a
        delta = gain[empty][None, :] - sym[np.ix_(active, empty)] - gain[active][:, None]
        clash = excluded[np.ix_(active, empty)]
        feasible = (clash.sum(axis=0)[None, :] - clash) == 0
        delta = np.where(feasible, delta, np.inf)
        best = int(np.argmin(delta))
        i, j = np.unravel_index(best, delta.shape)
        if not delta[i, j] < -eps:
            break
        x[active[i]] = False
        x[empty[j]] = True
    else:
        logger.info("repair stopped at max_passes=%d", max_passes)
    return x.astype(np.int8)
