# baselines: exact enumeration oracle, greedy construction and seeded swap local search.

import itertools
import logging
import math
import time
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from inference.decode_round import InfeasibleLayoutError, repair_swap
from inference.qip_mrf import QipModel, layout_from_cells, surrogate_energy

logger = logging.getLogger(__name__)

ENUMERATION_BUDGET = 10 ** 7
BATCH_SIZE = 20000


class EnumerationBudgetError(ValueError):
    pass


def _batch_energies(combos: np.ndarray, sym: np.ndarray, excluded: np.ndarray) -> np.ndarray:
    k = combos.shape[1]
    energy = np.zeros(len(combos))
    clash = np.zeros(len(combos), dtype=bool)
    for p in range(k):
        for q in range(p + 1, k):
            energy += sym[combos[:, p], combos[:, q]]
            clash |= excluded[combos[:, p], combos[:, q]]
    return np.where(clash, np.inf, energy)


def brute_force(
    qip: QipModel,
    objective: Optional[Callable[[Sequence[int]], float]] = None,
    budget: int = ENUMERATION_BUDGET,
) -> Tuple[np.ndarray, float]:
    """Enumerates every k-subset in lexicographic order and keeps the first
    minimum. Without an objective the value is X^T W X; a callable objective is
    minimized as given (PowerObjective returns negated expected power)."""
    n, k = qip.n, qip.k
    total = math.comb(n, k)
    if total > budget:
        raise EnumerationBudgetError(f"C({n}, {k}) = {total} layouts exceeds the enumeration budget {budget}")
    start = time.time()
    sym = qip.w.symmetrized()
    excluded = qip.exclusions.as_matrix(n)
    combos_iter = itertools.combinations(range(n), k)
    best_cells, best_value = None, math.inf
    while True:
        batch = list(itertools.islice(combos_iter, BATCH_SIZE))
        if not batch:
            break
        combos = np.array(batch, dtype=np.int64).reshape(len(batch), k)
        if objective is None:
            values = _batch_energies(combos, sym, excluded)
        else:
            feasible = np.isfinite(_batch_energies(combos, np.zeros_like(sym), excluded))
            values = np.array([objective(c) if ok else math.inf for c, ok in zip(combos.tolist(), feasible)])
        i = int(np.argmin(values))
        if values[i] < best_value:
            best_value = float(values[i])
            best_cells = combos[i].tolist()
    if best_cells is None:
        raise InfeasibleLayoutError(f"no layout of {k} turbines respects the exclusions")
    logger.info("brute force over %d layouts in %.2f seconds: %.10g", total, time.time() - start, best_value)
    return layout_from_cells(best_cells, n), best_value


def greedy_construct(qip: QipModel) -> np.ndarray:
    n = qip.n
    sym = qip.w.symmetrized()
    excluded = qip.exclusions.as_matrix(n)
    placed = np.zeros(n, dtype=bool)
    blocked = np.zeros(n, dtype=bool)
    marginal = np.zeros(n)
    for step in range(qip.k):
        cost = np.where(placed | blocked, np.inf, marginal)
        e = int(np.argmin(cost))
        if not np.isfinite(cost[e]):
            raise InfeasibleLayoutError(f"greedy placement stuck after {step} of {qip.k} turbines")
        placed[e] = True
        blocked |= excluded[e]
        marginal += sym[e]
    return placed.astype(np.int8)


def random_feasible_layout(qip: QipModel, rng: np.random.Generator, max_tries: int = 1000) -> np.ndarray:
    n, k = qip.n, qip.k
    for _ in range(max_tries):
        cells = rng.choice(n, size=k, replace=False)
        if not qip.exclusions.violations(cells):
            return layout_from_cells(cells, n)
    # dense exclusions: place along a random permutation instead
    excluded = qip.exclusions.as_matrix(n)
    blocked = np.zeros(n, dtype=bool)
    cells = []
    for v in rng.permutation(n):
        if len(cells) == k:
            break
        if not blocked[v]:
            cells.append(int(v))
            blocked |= excluded[v]
    if len(cells) < k:
        raise InfeasibleLayoutError(f"could not sample a feasible layout of {k} turbines")
    return layout_from_cells(cells, n)


def local_search(
    qip: QipModel,
    restarts: int = 20,
    seed: int = 0,
    max_passes: int = 1000,
    progress: bool = False,
) -> Tuple[np.ndarray, float]:
    if restarts < 1:
        raise ValueError(f"restarts must be at least 1, got {restarts}")
    start = time.time()
    best = repair_swap(greedy_construct(qip), qip, max_passes)
    best_value = surrogate_energy(qip.w, np.flatnonzero(best))
    rng = np.random.default_rng(seed)
    for _ in tqdm(range(restarts - 1), desc="  restarts", disable=not progress):
        layout = repair_swap(random_feasible_layout(qip, rng), qip, max_passes)
        value = surrogate_energy(qip.w, np.flatnonzero(layout))
        if value < best_value:
            best, best_value = layout, value
    logger.info("local search, %d restarts in %.2f seconds: %.10g", restarts, time.time() - start, best_value)
    return best, best_value
