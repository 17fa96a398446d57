import numpy as np
import pytest

from matchclust.adversarial import (
    BIPARTITE_MINUS_PM,
    BIPARTITE_UNIT,
    DISJOINT_MATCHING,
    ROWS_COLUMNS,
    AdversarialReport,
    FamilySpec,
    adversarial_affinity_run,
    affinity_policy,
    generate,
    reference_hierarchy,
)
from matchclust.clusterers import MODE_MAX, MODE_MIN, matching_affinity
from matchclust.graph_core import DISSIMILARITY, SIMILARITY, GraphError
from matchclust.hierarchy import validate
from matchclust.matching_engine import EngineChoice, min_perfect_matching
from matchclust.objectives import revenue, value

EXACT = EngineChoice.parse("exact")
GREEDY = EngineChoice.parse("greedy")


class TestSpecValidation:
    def test_rejects_bad_sizes(self):
        with pytest.raises(GraphError):
            FamilySpec(BIPARTITE_UNIT, half=3)
        with pytest.raises(GraphError):
            FamilySpec(DISJOINT_MATCHING, n_sets=3)
        with pytest.raises(GraphError):
            FamilySpec(ROWS_COLUMNS, cube_n=0)
        with pytest.raises(GraphError):
            FamilySpec(BIPARTITE_MINUS_PM, n_half=6)
        with pytest.raises(GraphError):
            FamilySpec("triangle_soup")


class TestGenerate:
    def test_bipartite_unit_shape(self):
        g = generate(FamilySpec(BIPARTITE_UNIT, half=4))
        assert g.n == 8 and g.orientation == SIMILARITY
        assert g.weights[:4, 4:].min() == 1.0
        assert g.weights[:4, :4].max() == 0.0

    def test_disjoint_matching_shape(self):
        g = generate(FamilySpec(DISJOINT_MATCHING, n_sets=2))
        assert g.n == 8 and g.orientation == DISSIMILARITY
        assert g.weights.sum() == 2 * 4  # four unit edges, both directions

    def test_rows_columns_shape(self):
        g = generate(FamilySpec(ROWS_COLUMNS, cube_n=2))
        assert g.n == 64
        col = g.weights[0, 1]          # same column
        row = g.weights[0, 16]         # same row, next column
        assert col == 1.0 and row == pytest.approx(1.1)
        assert g.weights[1, 16] == 0.0

    def test_bipartite_minus_pm_shape(self):
        g = generate(FamilySpec(BIPARTITE_MINUS_PM, n_half=4))
        assert g.n == 8
        assert g.weights[0, 1] == 0.0          # removed matching pair
        assert g.weights[0, 3] == 1.0          # cross pair i != j
        assert g.weights[0, 2] == 0.0          # same side


class TestReferenceHierarchies:
    def test_disjoint_matching_value(self):
        spec = FamilySpec(DISJOINT_MATCHING, n_sets=2)
        assert value(generate(spec), reference_hierarchy(spec)) == 32.0

    def test_bipartite_unit_small_reference(self):
        spec = FamilySpec(BIPARTITE_UNIT, half=2)
        assert revenue(generate(spec), reference_hierarchy(spec)) == 4.0

    def test_minus_pm_unit_edges_merge_at_root(self):
        spec = FamilySpec(BIPARTITE_MINUS_PM, n_half=4)
        g = generate(spec)
        ref = reference_hierarchy(spec)
        # every unit edge crosses the sides, so value = edges * 2n
        n_half = 4
        assert value(g, ref) == n_half * (n_half - 1) * 2 * n_half
        assert validate(ref) == []

    def test_all_references_valid(self):
        specs = [
            FamilySpec(BIPARTITE_UNIT, half=8),
            FamilySpec(DISJOINT_MATCHING, n_sets=4),
            FamilySpec(ROWS_COLUMNS, cube_n=2),
            FamilySpec(BIPARTITE_MINUS_PM, n_half=8),
        ]
        for spec in specs:
            assert validate(reference_hierarchy(spec)) == []


class TestAdversarialRuns:
    def test_disjoint_matching_ratios(self):
        for n_sets, want in ((2, 0.5), (4, 0.25)):
            _, report = adversarial_affinity_run(FamilySpec(DISJOINT_MATCHING, n_sets=n_sets))
            assert report.ratio == pytest.approx(want)
            assert report.affinity_score == 8 * n_sets
            assert report.reference_score == 8 * n_sets ** 2

    def test_bipartite_unit_two_rounds(self):
        _, report = adversarial_affinity_run(FamilySpec(BIPARTITE_UNIT, half=8))
        assert report.affinity_levels == 2  # stars first, then their union
        assert report.affinity_score == 2 * 7 * 8

    def test_report_dict_round_trip(self):
        _, report = adversarial_affinity_run(FamilySpec(DISJOINT_MATCHING, n_sets=2))
        d = report.to_dict()
        assert d["family"] == DISJOINT_MATCHING and d["ratio"] == 0.5
        assert isinstance(report, AdversarialReport)


class TestMatchingAffinityOnFamilies:
    def test_rows_first_merging(self):
        spec = FamilySpec(ROWS_COLUMNS, cube_n=2)
        g = generate(spec)
        d, _ = matching_affinity(g, MODE_MAX, GREEDY)
        col_size = 16
        first_round = [nd for nd in d.nodes if nd.level == 1]
        for nd in first_round:
            assert len({v % col_size for v in nd.members}) == 1  # within one row

    def test_minus_pm_zero_trap_first(self):
        spec = FamilySpec(BIPARTITE_MINUS_PM, n_half=8)
        g = generate(spec)
        m = min_perfect_matching(g.weights, EXACT)
        assert m.total_weight == 0.0
        assert m.pairs == tuple((2 * i, 2 * i + 1) for i in range(8))

    def test_policy_shapes(self):
        p = affinity_policy(FamilySpec(BIPARTITE_UNIT, half=4))
        assert p.hubs == (0, 4)
        p = affinity_policy(FamilySpec(DISJOINT_MATCHING, n_sets=2))
        assert p.hubs == (0, 4)
        assert affinity_policy(FamilySpec(ROWS_COLUMNS, cube_n=1)).kind == "lowest_index"
