import numpy as np
import pytest

from matchclust.adversarial import FamilySpec, generate, reference_hierarchy
from matchclust.clusterers import MODE_MAX, TieBreakPolicy, affinity_boruvka, matching_affinity
from matchclust.graph_core import DISSIMILARITY, SIMILARITY, Clustering, WeightedGraph
from matchclust.hierarchy import DendrogramBuilder
from matchclust.matching_engine import EngineChoice
from matchclust.objectives import (
    ObjectiveError,
    clustering_cost,
    clustering_revenue,
    dasgupta_cost,
    is_binary_transition,
    merge_cost,
    merge_revenue,
    objective_report,
    revenue,
    value,
)
from matchclust.selftest import random_binary_dendrogram

EXACT = EngineChoice.parse("exact")


def unit_graph(n, orientation=SIMILARITY):
    return WeightedGraph(np.ones((n, n)) - np.eye(n), orientation)


def any_binary_tree(n, seed=0):
    return random_binary_dendrogram(np.random.default_rng(seed), n)


class TestCost:
    def test_k3_unit_any_tree(self):
        g = unit_graph(3)
        for seed in range(5):
            assert dasgupta_cost(g, any_binary_tree(3, seed)) == 8.0

    def test_two_vertices(self):
        w = np.zeros((2, 2))
        w[0, 1] = w[1, 0] = 5.0
        g = WeightedGraph(w, SIMILARITY)
        assert dasgupta_cost(g, any_binary_tree(2)) == 10.0

    def test_k4_unit_tree_independent(self):
        g = unit_graph(4)
        assert {dasgupta_cost(g, any_binary_tree(4, s)) for s in range(10)} == {20.0}

    def test_size_mismatch(self):
        with pytest.raises(ObjectiveError):
            dasgupta_cost(unit_graph(3), any_binary_tree(4))

    def test_orientation_check(self):
        with pytest.raises(ObjectiveError):
            dasgupta_cost(unit_graph(3, DISSIMILARITY), any_binary_tree(3))


class TestRevenue:
    def test_k3_unit(self):
        assert revenue(unit_graph(3), any_binary_tree(3)) == 1.0

    def test_star_hierarchy_zero(self):
        # all leaves merged in one multiway root: no non-leaves anywhere
        b = DendrogramBuilder(5)
        b.merge_round([[0, 1, 2, 3, 4]])
        assert revenue(unit_graph(5), b.build()) == 0.0

    def test_k22_matching_hierarchy(self):
        w = np.zeros((4, 4))
        for i in (0, 1):
            for j in (2, 3):
                w[i, j] = w[j, i] = 1.0
        g = WeightedGraph(w, SIMILARITY)
        d, _ = matching_affinity(g, MODE_MAX, EXACT)
        assert revenue(g, d) == 4.0


class TestValue:
    def test_k3_unit_distances(self):
        assert value(unit_graph(3, DISSIMILARITY), any_binary_tree(3)) == 8.0

    def test_disjoint_matching_reference(self):
        spec = FamilySpec("disjoint_matching", n_sets=2)
        assert value(generate(spec), reference_hierarchy(spec)) == 32.0

    def test_zero_graph(self):
        g = WeightedGraph(np.zeros((4, 4)), DISSIMILARITY)
        assert value(g, any_binary_tree(4)) == 0.0

    def test_orientation_check(self):
        with pytest.raises(ObjectiveError):
            value(unit_graph(3), any_binary_tree(3))


class TestMergeDecompositions:
    def test_merge_revenue_single_edge(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 5.0
        g = WeightedGraph(w, SIMILARITY)
        assert merge_revenue(g, (0,), (1,)) == 10.0  # (4 - 2) * 5

    def test_final_merge_is_free(self):
        g = unit_graph(4)
        assert merge_revenue(g, (0, 1), (2, 3)) == 0.0
        assert merge_cost(g, (0, 1), (2, 3)) == 0.0

    def test_merge_cost_k3(self):
        assert merge_cost(unit_graph(3), (0,), (1,)) == 2.0

    def test_rejects_overlap(self):
        with pytest.raises(ObjectiveError):
            merge_cost(unit_graph(3), (0, 1), (1,))


class TestClusteringTransitions:
    def test_identity_transition_is_zero(self):
        g = unit_graph(4)
        c = Clustering(((0, 1), (2, 3)))
        assert clustering_cost(g, c, c) == 0.0
        assert clustering_revenue(g, c, c) == 0.0

    def test_single_merge(self):
        g = unit_graph(3)
        fine = Clustering(((0,), (1,), (2,)))
        coarse = Clustering(((0, 1), (2,)))
        assert clustering_revenue(g, fine, coarse) == 1.0

    def test_rejects_non_coarsening(self):
        g = unit_graph(4)
        fine = Clustering(((0, 1), (2, 3)))
        other = Clustering(((0, 2), (1, 3)))
        with pytest.raises(ObjectiveError):
            clustering_cost(g, fine, other)

    def test_level_sums_match_revenue(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            n = int(rng.integers(3, 11))
            a = rng.integers(0, 9, size=(n, n)).astype(float)
            a = np.triu(a, 1)
            g = WeightedGraph(a + a.T, SIMILARITY)
            d = random_binary_dendrogram(rng, n)
            total = sum(
                clustering_revenue(g, d.level_clustering(i), d.level_clustering(i + 1))
                for i in range(d.level_count - 1)
            )
            assert total == pytest.approx(revenue(g, d), rel=1e-12)

    def test_multiway_flagged_not_binary(self):
        fine = Clustering(((0,), (1,), (2,)))
        coarse = Clustering(((0, 1, 2),))
        assert not is_binary_transition(fine, coarse)
        assert is_binary_transition(Clustering(((0, 1), (2,))), coarse)


class TestObjectiveReport:
    def test_similarity_report(self):
        g = unit_graph(4)
        d = any_binary_tree(4)
        rep = objective_report(g, d)
        assert rep.cost == 20.0
        assert rep.revenue == pytest.approx(4 * g.total_weight() - 20.0)
        assert rep.value is None
        assert len(rep.per_level) == d.level_count - 1
        assert all(r.binary for r in rep.per_level)

    def test_dissimilarity_report(self):
        g = unit_graph(4, DISSIMILARITY)
        rep = objective_report(g, any_binary_tree(4))
        assert rep.value == 20.0 and rep.cost is None and rep.revenue is None

    def test_multiway_row_flag(self):
        g = unit_graph(5)
        d, _ = affinity_boruvka(
            WeightedGraph(_star(5), SIMILARITY), MODE_MAX, TieBreakPolicy()
        )
        rep = objective_report(WeightedGraph(_star(5), SIMILARITY), d)
        assert any(not r.binary for r in rep.per_level)

    def test_csv_rows_stable(self):
        g = unit_graph(4)
        rep = objective_report(g, any_binary_tree(4))
        rows = rep.csv_rows()
        assert rows[0] == "level_from,level_to,clustering_cost,clustering_revenue,binary"
        assert rep.csv_rows() == rows


def _star(n):
    w = np.zeros((n, n))
    w[0, 1:] = 1.0
    w[1:, 0] = 1.0
    return w
