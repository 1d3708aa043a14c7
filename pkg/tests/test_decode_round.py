import numpy as np
import pytest

from farm.farm_domain import FarmGrid, ProximityPairs, make_square_grid, no_exclusions
from farm.wake_jensen import InteractionMatrix, build_interaction_matrix
from inference.baselines import brute_force
from inference.decode_round import (
    InfeasibleLayoutError,
    check_feasible,
    decode_layout,
    repair_swap,
    round_top_k,
)
from inference.qip_mrf import QipModel, build_wflo_mrf, surrogate_energy
from inference.tightening import TightenConfig, tighten_and_resolve
from inference.trws import SolveReport, SolverConfig


def report_with_marginals(mm):
    mm = np.asarray(mm, dtype=float)
    return SolveReport(
        best_assignment=np.zeros(len(mm), dtype=np.int8),
        best_energy=0.0,
        lower_bound_trace=[0.0],
        sweeps=1,
        wall_time=0.0,
        converged=True,
        min_marginals=mm,
    )


class TestRounding:
    def test_takes_the_k_strongest_preferences(self):
        report = report_with_marginals([[0, 1], [3, 0], [2, 0], [0, 0.5]])
        assert round_top_k(report, 2, no_exclusions()).tolist() == [0, 1, 1, 0]

    def test_ties_go_to_the_lower_index(self):
        report = report_with_marginals([[1, 0], [1, 0], [1, 0]])
        assert round_top_k(report, 2, no_exclusions()).tolist() == [1, 1, 0]

    def test_skips_excluded_partners(self):
        report = report_with_marginals([[3, 0], [2, 0], [1, 0]])
        exclusions = ProximityPairs(pairs=((0, 1),), min_separation=100.0)
        assert round_top_k(report, 2, exclusions).tolist() == [1, 0, 1]

    def test_infeasible_budget(self):
        report = report_with_marginals([[1, 0], [1, 0]])
        exclusions = ProximityPairs(pairs=((0, 1),), min_separation=100.0)
        with pytest.raises(InfeasibleLayoutError):
            round_top_k(report, 2, exclusions)

    def test_zero_budget(self):
        report = report_with_marginals([[1, 0], [1, 0]])
        assert round_top_k(report, 0, no_exclusions()).tolist() == [0, 0]


class TestRepair:
    def test_line_moves_to_the_endpoints(self, spec, params, wr1, line3):
        w = build_interaction_matrix(line3, wr1, spec, params)
        qip = QipModel(w=w, k=2)
        repaired = repair_swap(np.array([1, 1, 0]), qip)
        assert repaired.tolist() == [1, 0, 1]
        assert surrogate_energy(w, [0, 2]) == pytest.approx(0.063285, abs=1e-5)

    def test_never_increases_energy(self):
        rng = np.random.default_rng(4)
        entries = rng.random((8, 8))
        np.fill_diagonal(entries, 0.0)
        w = InteractionMatrix(entries=entries)
        qip = QipModel(w=w, k=3)
        start = np.array([1, 1, 1, 0, 0, 0, 0, 0])
        repaired = repair_swap(start, qip)
        assert repaired.sum() == 3
        assert surrogate_energy(w, np.flatnonzero(repaired)) <= surrogate_energy(w, [0, 1, 2])

    def test_respects_exclusions(self):
        entries = np.zeros((3, 3))
        entries[0, 1] = 5.0
        qip = QipModel(
            w=InteractionMatrix(entries=entries),
            k=2,
            exclusions=ProximityPairs(pairs=((0, 2), (1, 2)), min_separation=100.0),
        )
        # every move into cell 2 clashes with the turbine that stays
        assert repair_swap(np.array([1, 1, 0]), qip).tolist() == [1, 1, 0]

    def test_rejects_wrong_count(self):
        qip = QipModel(w=InteractionMatrix(entries=np.zeros((3, 3))), k=2)
        with pytest.raises(InfeasibleLayoutError):
            check_feasible([1, 0, 0], qip)


class TestDecodeLayout:
    def test_keeps_a_better_solver_labelling(self, spec, params, wr1, line3):
        qip = QipModel(w=build_interaction_matrix(line3, wr1, spec, params), k=2)
        report = report_with_marginals([[3, 0], [2, 0], [1, 0]])
        assert round_top_k(report, 2, no_exclusions()).tolist() == [1, 1, 0]
        report.best_assignment = np.array([1, 0, 1], dtype=np.int8)
        assert decode_layout(report, qip).tolist() == [1, 0, 1]

    def test_falls_back_to_rounding(self, spec, params, wr1, line3):
        qip = QipModel(w=build_interaction_matrix(line3, wr1, spec, params), k=2)
        report = report_with_marginals([[3, 0], [1, 0], [2, 0]])
        # wrong count
        report.best_assignment = np.array([1, 1, 1], dtype=np.int8)
        assert decode_layout(report, qip).tolist() == [1, 0, 1]
        # feasible but worse than the rounded layout
        report.best_assignment = np.array([1, 1, 0], dtype=np.int8)
        assert decode_layout(report, qip).tolist() == [1, 0, 1]

    def test_labelling_with_an_exclusion_is_not_kept(self):
        qip = QipModel(
            w=InteractionMatrix(entries=np.zeros((3, 3))),
            k=2,
            exclusions=ProximityPairs(pairs=((0, 1),), min_separation=100.0),
        )
        report = report_with_marginals([[3, 0], [2, 0], [1, 0]])
        report.best_assignment = np.array([1, 1, 0], dtype=np.int8)
        assert decode_layout(report, qip).tolist() == [1, 0, 1]


def sixteen_cells(shape):
    if shape == "grid":
        return make_square_grid(800.0, 4)
    return FarmGrid.from_points([(0.0, 200.0 * (15 - i)) for i in range(16)], cell_side=200.0)


class TestAgainstBruteForce:
    @pytest.mark.parametrize("shape", ["grid", "line"])
    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_sixteen_cells(self, spec, params, wr1, shape, k):
        w = build_interaction_matrix(sixteen_cells(shape), wr1, spec, params)
        qip = QipModel(w=w, k=k)
        model, _ = build_wflo_mrf(qip)
        _, report = tighten_and_resolve(
            model,
            TightenConfig(max_clusters=100, clusters_per_round=10),
            SolverConfig(max_sweeps=500, cutoff_seconds=60),
        )
        _, optimum = brute_force(qip)
        # with exactly k turbines the penalized energy is X^T W X
        assert report.lower_bound <= optimum + 1e-9
        layout = repair_swap(decode_layout(report, qip), qip)
        assert layout.sum() == k
        assert surrogate_energy(w, np.flatnonzero(layout)) <= 1.05 * optimum + 1e-12
