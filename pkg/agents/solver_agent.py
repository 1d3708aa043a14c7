# SolverAgent: turns the interaction matrix into a layout, by message passing or by one of the baselines.

import logging
import time
from typing import Optional, Tuple

import numpy as np

from config.settings import RunConfig
from farm.farm_domain import ProximityPairs
from farm.wake_jensen import InteractionMatrix
from inference.baselines import brute_force, greedy_construct, local_search
from inference.decode_round import decode_layout, repair_swap
from inference.qip_mrf import MrfModel, QipModel, build_wflo_mrf, surrogate_energy
from inference.tightening import (
    TightenConfig,
    TightenedModel,
    dump_clusters,
    load_clusters,
    tighten,
)
from inference.trws import SolveReport, SolverConfig, TrwsSolver

logger = logging.getLogger(__name__)


class SolverAgent:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        s = cfg.solver
        self.solver_cfg = SolverConfig(
            max_sweeps=s.max_sweeps, tolerance=s.tolerance, cutoff_seconds=s.cutoff_seconds, seed=s.seed
        )
        self.tighten_cfg = TightenConfig(
            max_clusters=s.max_clusters,
            clusters_per_round=s.clusters_per_round,
            top_percent=s.top_percent,
            max_candidates=s.max_candidates,
        )

    def qip(self, matrix: InteractionMatrix, exclusions: ProximityPairs) -> QipModel:
        return QipModel(w=matrix, k=self.cfg.solver.k, exclusions=exclusions)

    def model(self, qip: QipModel, beta: Optional[float] = None) -> Tuple[MrfModel, float]:
        beta = self.cfg.penalty.beta if beta is None else beta
        return build_wflo_mrf(qip, beta, self.cfg.penalty.exclusion_factor)

    def solve(self, mrf: MrfModel, deadline: Optional[float] = None) -> Tuple[TrwsSolver, SolveReport, float]:
        # an escalated re-solve keeps the deadline of the first solve
        if deadline is None:
            deadline = time.time() + self.solver_cfg.cutoff_seconds
        solver = TrwsSolver(mrf, self.solver_cfg)
        cluster_file = self.cfg.solver.cluster_file
        if cluster_file and self.tighten_cfg.max_clusters > 0:
            clusters = load_clusters(cluster_file)[: self.tighten_cfg.max_clusters]
            solver.add_clusters([c.vertices for c in clusters])
        return solver, solver.solve(deadline), deadline

    def tighten(self, solver: TrwsSolver, report: SolveReport, deadline: float) -> Tuple[TightenedModel, SolveReport]:
        tightened, report = tighten(solver, self.tighten_cfg, deadline, report)
        if self.cfg.solver.dump_clusters:
            dump_clusters(tightened.clusters, self.cfg.solver.dump_clusters)
        return tightened, report

    def needs_escalation(self, report: SolveReport, k: int) -> bool:
        placed = int(np.sum(report.best_assignment))
        return abs(placed - k) > self.cfg.penalty.budget_slack

    def decode(self, report: SolveReport, qip: QipModel) -> np.ndarray:
        return decode_layout(report, qip)

    def repair(self, layout: np.ndarray, qip: QipModel) -> np.ndarray:
        start = time.time()
        before = surrogate_energy(qip.w, np.flatnonzero(layout))
        repaired = repair_swap(layout, qip, self.cfg.solver.repair_passes)
        after = surrogate_energy(qip.w, np.flatnonzero(repaired))
        logger.info("repair: surrogate %.6g -> %.6g in %.2f seconds", before, after, time.time() - start)
        return repaired

    def baseline(self, qip: QipModel, progress: bool = False) -> np.ndarray:
        s = self.cfg.solver
        start = time.time()
        if s.name == "greedy":
            layout = greedy_construct(qip)
        elif s.name == "local":
            layout, _ = local_search(qip, restarts=s.restarts, seed=s.seed, max_passes=s.repair_passes, progress=progress)
        elif s.name == "brute":
            layout, _ = brute_force(qip, budget=s.enumeration_budget)
        else:
            raise ValueError(f"unknown baseline solver {s.name!r}")
        logger.info("%s baseline in %.2f seconds", s.name, time.time() - start)
        return layout


if __name__ == "__main__":
    # this block allows testing the solver agent in isolation: one message-passing solve on the bundled instance
    from agents.matrix_agent import MatrixAgent
    from config.settings import CONFIGS_PATH, load_config, setup_logging

    setup_logging()
    cfg = load_config(CONFIGS_PATH / "mosetti_wr1.yaml")
    built = MatrixAgent().build(cfg)
    agent = SolverAgent(cfg)
    qip = agent.qip(built["matrix"], built["exclusions"])
    mrf, beta = agent.model(qip)
    solver, report, deadline = agent.solve(mrf)
    _, report = agent.tighten(solver, report, deadline)
    layout = agent.repair(agent.decode(report, qip), qip)
    print(f"\nbeta {beta:.6g}, lower bound {report.lower_bound:.6g}, gap {report.gap:.6g}")
    print(f"cells: {np.flatnonzero(layout).tolist()}")
    print(f"surrogate energy: {surrogate_energy(qip.w, np.flatnonzero(layout)):.6g}")
