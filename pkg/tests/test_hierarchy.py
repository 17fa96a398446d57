import numpy as np
import pytest

from matchclust.clusterers import MODE_MAX, TieBreakPolicy, affinity_boruvka, matching_affinity
from matchclust.graph_core import SIMILARITY, WeightedGraph
from matchclust.hierarchy import (
    DendrogramBuilder,
    HierarchyError,
    balance_per_level,
    dendrogram_summary,
    dendrogram_to_text,
    extract_k_clustering,
    levels,
    validate,
)
from matchclust.matching_engine import EngineChoice

EXACT = EngineChoice.parse("exact")


def unit_graph(n):
    return WeightedGraph(np.ones((n, n)) - np.eye(n), SIMILARITY)


def mac(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.integers(1, 9, size=(n, n)).astype(float)
    a = np.triu(a, 1)
    g = WeightedGraph(a + a.T, SIMILARITY)
    d, _ = matching_affinity(g, MODE_MAX, EXACT)
    return g, d


class TestBuilder:
    def test_manual_binary_tree(self):
        b = DendrogramBuilder(4)
        b.merge_round([[0, 1], [2, 3]])
        b.merge_round([[4, 5]])
        d = b.build()
        assert d.node(4).members == (0, 1)
        assert d.node(6).members == (0, 1, 2, 3)
        assert validate(d) == []

    def test_carried_nodes(self):
        b = DendrogramBuilder(3)
        b.merge_round([[0, 1]])
        b.merge_round([[3, 2]])
        d = b.build()
        assert [len(f) for f in d.frontiers] == [3, 2, 1]

    def test_rejects_overlapping_groups(self):
        b = DendrogramBuilder(3)
        with pytest.raises(HierarchyError):
            b.merge_round([[0, 1], [1, 2]])

    def test_unrooted_build_rejected(self):
        b = DendrogramBuilder(3)
        b.merge_round([[0, 1]])
        with pytest.raises(HierarchyError):
            b.build()


class TestLevels:
    def test_four_leaf_matching_tree(self):
        _, d = mac(4)
        assert [len(c.clusters) for c in levels(d)] == [4, 2, 1]

    def test_seven_leaf_matching_tree(self):
        _, d = mac(7)
        assert [len(c.clusters) for c in levels(d)] == [7, 4, 2, 1]

    def test_single_leaf(self):
        d = DendrogramBuilder(1).build()
        assert [len(c.clusters) for c in levels(d)] == [1]


class TestExtract:
    def test_exact_level_hit(self):
        _, d = mac(8)
        got = extract_k_clustering(d, 4)
        assert got.clusters == d.level_clustering(1).clusters

    def test_k_equals_n(self):
        _, d = mac(6)
        assert extract_k_clustering(d, 6).sizes() == (1,) * 6

    def test_balanced_eight_k3(self):
        _, d = mac(8)
        assert sorted(extract_k_clustering(d, 3).sizes(), reverse=True) == [4, 2, 2]

    def test_out_of_range(self):
        _, d = mac(4)
        with pytest.raises(HierarchyError):
            extract_k_clustering(d, 0)
        with pytest.raises(HierarchyError):
            extract_k_clustering(d, 5)

    def test_every_k_has_exactly_k(self):
        _, d = mac(13, seed=3)
        for k in range(1, 14):
            assert len(extract_k_clustering(d, k).clusters) == k

    def test_clusters_are_tree_nodes_for_binary(self):
        _, d = mac(11, seed=5)
        node_sets = {nd.members for nd in d.nodes}
        for k in range(1, 12):
            for cluster in extract_k_clustering(d, k).clusters:
                assert cluster in node_sets

    def test_multiway_partial_split(self):
        # one star component: the root is the only internal node
        w = np.zeros((6, 6))
        w[0, 1:] = 1.0
        w[1:, 0] = 1.0
        g = WeightedGraph(w, SIMILARITY)
        d, _ = affinity_boruvka(g, MODE_MAX, TieBreakPolicy())
        got = extract_k_clustering(d, 3)
        assert len(got.clusters) == 3


class TestValidateDiagnostics:
    def test_clean_dendrograms(self):
        for n in (2, 5, 9, 16):
            _, d = mac(n)
            assert validate(d) == []

    def test_overlapping_clusters_detected(self):
        from matchclust.hierarchy import Dendrogram, DendroNode

        leaves = tuple(DendroNode(i, (), (i,), 0) for i in range(3))
        nodes = leaves + (DendroNode(3, (0, 1), (0, 1), 1),)
        # frontier lists vertex 1 twice: inside node 3 and as the bare leaf
        broken = Dendrogram(3, nodes, ((0, 1, 2), (3, 1, 2)))
        problems = validate(broken)
        assert any("partition" in p for p in problems)

    def test_skipped_refinement_detected(self):
        from matchclust.hierarchy import Dendrogram, DendroNode

        leaves = tuple(DendroNode(i, (), (i,), 0) for i in range(4))
        nodes = leaves + (
            DendroNode(4, (0, 1), (0, 1), 1),
            DendroNode(5, (2, 3), (2, 3), 1),
            DendroNode(6, (0, 2), (0, 2), 2),
            DendroNode(7, (1, 3), (1, 3), 2),
            DendroNode(8, (6, 7), (0, 1, 2, 3), 3),
        )
        broken = Dendrogram(4, nodes, ((0, 1, 2, 3), (4, 5), (6, 7), (8,)))
        problems = validate(broken)
        assert any("not refined" in p for p in problems)


class TestSerialization:
    def test_merge_lines(self):
        _, d = mac(4)
        text = dendrogram_to_text(d)
        lines = [l for l in text.strip().splitlines()]
        assert len(lines) == 3
        assert all(line.split(",")[0].isdigit() for line in lines)

    def test_summary_fields(self):
        _, d = mac(7)
        summary = dendrogram_summary(d)
        assert summary["n_leaves"] == 7
        assert [row["clusters"] for row in summary["levels"]] == [7, 4, 2, 1]
        assert all(0 < row["balance"] <= 1 for row in summary["levels"])


class TestBalance:
    def test_balance_after_first_round(self):
        for n in (5, 7, 11, 13):
            _, d = mac(n)
            assert all(r >= 0.5 for r in balance_per_level(d)[1:])

    def test_exact_balance_for_powers_of_two(self):
        for n in (4, 8, 16):
            _, d = mac(n)
            assert all(r == 1.0 for r in balance_per_level(d)[1:])
