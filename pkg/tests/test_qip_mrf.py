import itertools

import numpy as np
import pytest

from farm.farm_domain import ProximityPairs
from farm.wake_jensen import InteractionMatrix
from inference.qip_mrf import (
    MrfModel,
    QipModel,
    add_exclusions,
    build_penalized_mrf,
    build_wflo_mrf,
    default_beta,
    layout_from_cells,
    mrf_energy,
    surrogate_energy,
)


def random_matrix(n, seed=0):
    rng = np.random.default_rng(seed)
    w = rng.random((n, n))
    np.fill_diagonal(w, 0.0)
    return InteractionMatrix(entries=w)


class TestMrfModel:
    def test_edges_are_canonical_and_sorted(self):
        model = MrfModel.from_edges(3, np.zeros((3, 2)), [(2, 1, 0, 1, 2, 3), (0, 1, 0, 0, 0, 5)])
        assert model.edge_index.tolist() == [[0, 1], [1, 2]]
        # the reversed (2, 1) table is transposed
        assert model.edge_pot[1].tolist() == [[0.0, 2.0], [1.0, 3.0]]

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ValueError):
            MrfModel.from_edges(2, np.zeros((2, 2)), [(0, 1, 0, 0, 0, 1), (1, 0, 0, 0, 0, 1)])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            MrfModel.from_edges(2, [[0, np.inf], [0, 0]], [])

    def test_find_and_extend_edges(self):
        model = MrfModel.from_edges(4, np.zeros((4, 2)), [(0, 2, 0, 0, 0, 1)])
        assert model.find_edges([(2, 0), (0, 1)]).tolist() == [0, -1]
        bigger = model.with_edges([(0, 2), (1, 3)], [[[0, 0], [0, 2]], [[0, 0], [0, 4]]])
        assert bigger.edge_index.tolist() == [[0, 2], [1, 3]]
        assert bigger.edge_pot[0, 1, 1] == 3.0
        assert model.n_edges == 1

    def test_energy(self):
        model = MrfModel.from_edges(2, [[0, 1], [0, 2]], [(0, 1, 0, 0, 0, 5)], constant=0.5)
        assert mrf_energy(model, [0, 0]) == 0.5
        assert mrf_energy(model, [1, 1]) == pytest.approx(8.5)
        with pytest.raises(ValueError):
            mrf_energy(model, [0, 2])

    def test_dump(self, tmp_path):
        model = MrfModel.from_edges(2, [[0, 1], [0, 2]], [(0, 1, 0, 0, 0, 5)])
        path = tmp_path / "model.txt"
        model.dump(path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# n 2")
        assert lines[1:] == ["u 0 0.0 1.0", "u 1 0.0 2.0", "e 0 1 0.0 0.0 0.0 5.0"]


class TestPenaltyExpansion:
    def test_energy_matches_penalized_objective(self):
        w = random_matrix(6)
        qip = QipModel(w=w, k=2)
        beta = 3.5
        model = build_penalized_mrf(qip, beta)
        for bits in itertools.product([0, 1], repeat=6):
            x = np.array(bits)
            cells = np.flatnonzero(x)
            expected = surrogate_energy(w, cells) + beta * (x.sum() - 2) ** 2
            assert mrf_energy(model, x) == pytest.approx(expected)

    def test_complete_graph(self):
        model = build_penalized_mrf(QipModel(w=random_matrix(5), k=2), 1.0)
        assert model.n_edges == 10
        assert np.all(model.edge_pot[:, 0, 0] == 0)
        assert np.all(model.edge_pot[:, 0, 1] == 0)
        assert np.all(model.edge_pot[:, 1, 0] == 0)

    def test_default_beta_exceeds_any_budget_interaction(self):
        w = random_matrix(6, seed=3)
        beta = default_beta(w, 3)
        worst = max(surrogate_energy(w, c) for c in itertools.combinations(range(6), 3))
        assert beta > worst
        assert default_beta(w, 0) == 1.0

    def test_penalty_minimizer_places_k_turbines(self):
        w = random_matrix(7, seed=5)
        qip = QipModel(w=w, k=3)
        model, _ = build_wflo_mrf(qip)
        best = min(itertools.product([0, 1], repeat=7), key=lambda x: mrf_energy(model, np.array(x)))
        assert sum(best) == 3

    def test_exclusions_raise_the_pair_table(self):
        w = InteractionMatrix(entries=np.zeros((3, 3)))
        qip = QipModel(w=w, k=2, exclusions=ProximityPairs(pairs=((0, 1),), min_separation=100.0))
        model, beta = build_wflo_mrf(qip, beta=2.0, exclusion_factor=10.0)
        assert beta == 2.0
        eid = model.find_edges([(0, 1)])[0]
        assert model.edge_pot[eid, 1, 1] == pytest.approx(2 * 2.0 + 20.0)
        assert mrf_energy(model, [1, 1, 0]) > mrf_energy(model, [1, 0, 1])

    def test_exclusion_penalty_must_be_positive(self):
        model = build_penalized_mrf(QipModel(w=random_matrix(3), k=1), 1.0)
        with pytest.raises(ValueError):
            add_exclusions(model, ProximityPairs(pairs=((0, 1),), min_separation=1.0), 0.0)

    def test_budget_range(self):
        with pytest.raises(ValueError):
            QipModel(w=random_matrix(3), k=4)
        assert QipModel(w=random_matrix(3), k=0).k == 0


class TestLayouts:
    def test_layout_from_cells(self):
        assert layout_from_cells([3, 1], 5).tolist() == [0, 1, 0, 1, 0]
        with pytest.raises(ValueError):
            layout_from_cells([5], 5)

    def test_surrogate_energy(self):
        w = InteractionMatrix(entries=np.array([[0.0, 1.0, 2.0], [0.5, 0.0, 0.0], [0.0, 0.0, 0.0]]))
        assert surrogate_energy(w, [0, 1]) == pytest.approx(1.5)
        assert surrogate_energy(w, []) == 0.0


class TestRandomIdentity:
    def test_energy_equals_lagrangian(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            k = int(rng.integers(0, n + 1))
            w = random_matrix(n, seed=int(rng.integers(1 << 30)))
            beta = float(rng.uniform(0.1, 10.0))
            model = build_penalized_mrf(QipModel(w=w, k=k), beta)
            x = rng.integers(0, 2, size=n)
            expected = float(x @ w.entries @ x) + beta * (x.sum() - k) ** 2
            assert mrf_energy(model, x) == pytest.approx(expected, rel=1e-9, abs=1e-12)
