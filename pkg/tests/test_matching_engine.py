import math

import numpy as np
import pytest

from matchclust.matching_engine import (
    EngineChoice,
    EngineInfeasibleError,
    Matching,
    MatchingError,
    _delta_for,
    _k_sized_max_with_stats,
    exact_max_matching,
    greedy_matching,
    k_sized_max_matching,
    local_search_matching,
    max_perfect_matching,
    min_k_sized_matching,
    min_perfect_matching,
)
from matchclust.oracles import (
    brute_force_max_matching,
    brute_force_min_k_matching,
    brute_force_min_perfect,
)

EXACT = EngineChoice.parse("exact")
GREEDY = EngineChoice.parse("greedy")
LOCAL = EngineChoice.parse("local_search")


def k4_example():
    # w(0,1)=5, w(2,3)=5, w(0,2)=6, everything else 1
    w = np.ones((4, 4))
    np.fill_diagonal(w, 0)
    w[0, 1] = w[1, 0] = 5.0
    w[2, 3] = w[3, 2] = 5.0
    w[0, 2] = w[2, 0] = 6.0
    return w


def path_example():
    # 1-10-1 path, zero fill
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 1.0
    w[1, 2] = w[2, 1] = 10.0
    w[2, 3] = w[3, 2] = 1.0
    return w


def random_table(rng, n, w_max=10):
    a = rng.integers(0, w_max + 1, size=(n, n)).astype(float)
    a = np.triu(a, 1)
    return a + a.T


class TestMatchingType:
    def test_normalises_and_checks_disjoint(self):
        m = Matching(((3, 1), (0, 2)), 0.0)
        assert m.pairs == ((0, 2), (1, 3))
        with pytest.raises(MatchingError):
            Matching(((0, 1), (1, 2)), 0.0)

    def test_from_pairs_recomputes_weight(self):
        w = k4_example()
        m = Matching.from_pairs(w, [(0, 1), (2, 3)])
        assert m.total_weight == 10.0


class TestEngineChoice:
    def test_parse_aliases(self):
        assert EngineChoice.parse("exact").kind == "exact_bruteforce"
        assert EngineChoice.parse("local").kind == "local_search"
        with pytest.raises(MatchingError):
            EngineChoice.parse("blossom")

    def test_epsilon_range(self):
        with pytest.raises(MatchingError):
            EngineChoice(kind="greedy", epsilon=1.5)


class TestExact:
    def test_k4(self):
        m = exact_max_matching(k4_example())
        assert m.pairs == ((0, 1), (2, 3)) and m.total_weight == 10.0

    def test_single_edge(self):
        w = np.zeros((2, 2))
        w[0, 1] = w[1, 0] = 7.0
        m = exact_max_matching(w)
        assert m.pairs == ((0, 1),) and m.total_weight == 7.0

    def test_k4_single_edge_budget(self):
        m = exact_max_matching(k4_example(), k_edges=1)
        assert m.pairs == ((0, 2),) and m.total_weight == 6.0

    def test_zero_graph_prefers_empty(self):
        assert exact_max_matching(np.zeros((4, 4))).pairs == ()

    def test_size_cap(self):
        with pytest.raises(EngineInfeasibleError):
            exact_max_matching(np.zeros((23, 23)))

    def test_size_cap_env_override(self, monkeypatch):
        monkeypatch.setenv("MATCHCLUST_SIZE_CAP", "4")
        with pytest.raises(EngineInfeasibleError):
            exact_max_matching(np.zeros((5, 5)))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        for _ in range(60):
            n = int(rng.integers(2, 10))
            w = random_table(rng, n)
            got = exact_max_matching(w).total_weight
            want, _ = brute_force_max_matching(w)
            assert got == pytest.approx(want)


class TestGreedy:
    def test_k4_trace(self):
        m = greedy_matching(k4_example())
        assert m.pairs == ((0, 2), (1, 3)) and m.total_weight == 7.0

    def test_equal_weights_perfect(self):
        w = 3.0 * (np.ones((4, 4)) - np.eye(4))
        m = greedy_matching(w)
        assert m.size == 2 and m.total_weight == 6.0

    def test_zero_graph_still_matches(self):
        m = greedy_matching(np.zeros((4, 4)))
        assert m.size == 2 and m.total_weight == 0.0

    def test_half_approximation(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(2, 11))
            w = random_table(rng, n)
            assert greedy_matching(w).total_weight >= 0.5 * exact_max_matching(w).total_weight - 1e-9


class TestLocalSearch:
    def test_flips_greedy_on_k4(self):
        m = local_search_matching(k4_example(), 0.05)
        assert m.pairs == ((0, 1), (2, 3)) and m.total_weight == 10.0

    def test_path_optimum(self):
        m = local_search_matching(path_example(), 0.05)
        assert m.pairs == ((0, 3), (1, 2)) and m.total_weight == 10.0

    def test_never_below_greedy(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(2, 11))
            w = random_table(rng, n)
            assert (
                local_search_matching(w, 0.05).total_weight
                >= greedy_matching(w).total_weight - 1e-9
            )

    def test_optimal_input_is_fixed_point(self):
        w = k4_example()
        first = local_search_matching(w, 0.05)
        again = local_search_matching(w, 0.05)
        assert first.pairs == again.pairs


class TestKSized:
    def test_path_k1(self):
        m = k_sized_max_matching(path_example(), 1, 0.05, EXACT)
        assert m.pairs == ((1, 2),) and m.total_weight == 10.0

    def test_half_budget_is_plain_maximum(self):
        w = k4_example()
        m = k_sized_max_matching(w, 2, 0.05, EXACT)
        assert m.total_weight == exact_max_matching(w).total_weight

    def test_seven_vertices_three_edges(self):
        # n=7, k=3: the reduction adds a single dummy vertex (n - 2k = 1)
        rng = np.random.default_rng(4)
        w = random_table(rng, 7)
        m, iters = _k_sized_max_with_stats(w, 3, 0.05, EXACT)
        opt, _ = brute_force_max_matching(w, 3)
        assert m.size <= 3 and iters >= 1
        assert m.total_weight >= 0.95 * opt - 1e-9

    def test_rejects_bad_inputs(self):
        w = k4_example()
        with pytest.raises(MatchingError):
            k_sized_max_matching(w, 3, 0.05, EXACT)  # k > n/2
        frac = w.copy()
        frac[0, 1] = frac[1, 0] = 0.5
        with pytest.raises(MatchingError):
            k_sized_max_matching(frac, 1, 0.05, EXACT)

    def test_zero_graph_terminates(self):
        m = k_sized_max_matching(np.zeros((6, 6)), 2, 0.05, EXACT)
        assert m.total_weight == 0.0 and m.size <= 2

    def test_guarantee_and_iteration_bound(self):
        rng = np.random.default_rng(5)
        eps = 0.05
        for _ in range(60):
            n = int(rng.integers(4, 11))
            w = random_table(rng, n)
            w_max = int(w.max())
            for k in range(1, n // 2 + 1):
                m, iters = _k_sized_max_with_stats(w, k, eps, EXACT)
                opt, _ = brute_force_max_matching(w, k)
                assert m.size <= k
                assert m.total_weight >= (1 - eps) * opt - 1e-9
                if n * w_max > 1:
                    assert iters <= math.ceil(math.log2(n * w_max)) + 1

    def test_delta_below_epsilon(self):
        for eps in (0.01, 0.05, 0.3, 0.9):
            for n, k in ((8, 1), (8, 4), (12, 5)):
                d = _delta_for(eps, n, k)
                assert 0 < d <= eps
                if d < eps:  # the quadratic root was the minimum
                    c = n / k
                    assert (c + 1) * d - d * d == pytest.approx(eps)

    def test_greedy_engine_also_respects_size(self):
        rng = np.random.default_rng(6)
        for _ in range(40):
            n = int(rng.integers(4, 12))
            w = random_table(rng, n)
            for k in (1, n // 2):
                m = k_sized_max_matching(w, k, 0.1, GREEDY)
                assert m.size <= k


class TestPerfectVariants:
    def test_min_perfect_k2(self):
        w = np.zeros((2, 2))
        w[0, 1] = w[1, 0] = 4.0
        assert min_perfect_matching(w, EXACT).pairs == ((0, 1),)

    def test_min_perfect_zero_pairs(self):
        w = np.full((4, 4), 5.0)
        np.fill_diagonal(w, 0)
        w[0, 1] = w[1, 0] = 0.0
        w[2, 3] = w[3, 2] = 0.0
        m = min_perfect_matching(w, EXACT)
        assert m.pairs == ((0, 1), (2, 3)) and m.total_weight == 0.0

    def test_min_perfect_tie_lexicographic(self):
        w = np.ones((4, 4)) - np.eye(4)
        assert min_perfect_matching(w, EXACT).pairs == ((0, 1), (2, 3))

    def test_odd_count_rejected(self):
        with pytest.raises(MatchingError):
            min_perfect_matching(np.zeros((3, 3)), EXACT)
        with pytest.raises(MatchingError):
            max_perfect_matching(np.zeros((3, 3)), EXACT)

    def test_min_perfect_matches_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = 2 * int(rng.integers(1, 5))
            w = random_table(rng, n)
            got = min_perfect_matching(w, EXACT).total_weight
            want, _ = brute_force_min_perfect(w)
            assert got == pytest.approx(want)

    def test_max_perfect_includes_zero_edges(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 5.0
        m = max_perfect_matching(w, EXACT)
        assert m.size == 2 and m.total_weight == 5.0


class TestMinKSized:
    def test_zero_pair_first(self):
        w = np.ones((4, 4)) - np.eye(4)
        w[0, 1] = w[1, 0] = 0.0
        m = min_k_sized_matching(w, 1, EXACT)
        assert m.pairs == ((0, 1),) and m.total_weight == 0.0

    def test_full_budget_equals_min_perfect(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            n = 2 * int(rng.integers(2, 5))
            w = random_table(rng, n)
            a = min_k_sized_matching(w, n // 2, EXACT).total_weight
            b = min_perfect_matching(w, EXACT).total_weight
            assert a == pytest.approx(b)

    def test_zero_graph(self):
        m = min_k_sized_matching(np.zeros((6, 6)), 2, EXACT)
        assert m.size == 2 and m.total_weight == 0.0

    def test_exact_matches_brute_force(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            n = int(rng.integers(4, 9))
            w = random_table(rng, n)
            for k in range(1, n // 2 + 1):
                got = min_k_sized_matching(w, k, EXACT).total_weight
                want, _ = brute_force_min_k_matching(w, k)
                assert got == pytest.approx(want)

    def test_heuristics_flagged_and_sized(self):
        rng = np.random.default_rng(10)
        w = random_table(rng, 10)
        for engine in (GREEDY, LOCAL):
            m = min_k_sized_matching(w, 3, engine)
            assert m.size == 3
            assert "stand-in" in m.note

    def test_local_search_not_worse_than_greedy(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            n = int(rng.integers(4, 13))
            w = random_table(rng, n)
            k = max(1, n // 3)
            g = min_k_sized_matching(w, k, GREEDY).total_weight
            l = min_k_sized_matching(w, k, LOCAL).total_weight
            assert l <= g + 1e-9


class TestDeterminism:
    def test_repeat_runs_identical(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            n = int(rng.integers(2, 12))
            w = random_table(rng, n)
            assert greedy_matching(w).pairs == greedy_matching(w).pairs
            assert (
                local_search_matching(w, 0.05).pairs
                == local_search_matching(w, 0.05).pairs
            )
            if n <= 10:
                assert exact_max_matching(w).pairs == exact_max_matching(w).pairs
