"""Oracle-backed property checks runnable from the CLI (`selftest`) and tests.

Each check returns (ok, detail).  The registry covers every documented
invariant: engine approximation floors, the k-sized reduction guarantees,
objective identities, balance and level structure of the matching
clusterer, the worst-case family separations, and the dataset protocol.
Checks tagged ``criterion N`` are the acceptance gate and run at full
corpus sizes; expect the whole suite to take a few minutes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import adversarial as adv
from .clusterers import (
    MODE_MAX,
    MODE_MIN,
    TieBreakPolicy,
    affinity_boruvka,
    average_linkage_clusterer,
    matching_affinity,
    random_divisive,
)
from .evaluation import (
    COSINE,
    L2,
    balance_ratio,
    bundled_datasets,
    evaluate_grid,
    filter_balanced_pow2,
    ground_truth_clustering,
    graph_from_vectors,
    load_dataset,
    quantize_integer_weights,
    rand_index,
    rows_to_csv,
)
from .graph_core import (
    DISSIMILARITY,
    SIMILARITY,
    Clustering,
    WeightedGraph,
    average_linkage,
    build_clustering_graph,
    clustering_graph_from_members,
    coarsen,
)
from .hierarchy import (
    DendrogramBuilder,
    balance_per_level,
    extract_k_clustering,
    levels,
    validate,
)
from .matching_engine import (
    EngineChoice,
    _k_sized_max_with_stats,
    exact_max_matching,
    greedy_matching,
    local_search_matching,
    min_k_sized_matching,
    min_perfect_matching,
)
from .objectives import (
    dasgupta_cost,
    merge_cost,
    merge_revenue,
    revenue,
    value,
)
from .oracles import best_tree_revenue, brute_force_max_matching

EXACT = EngineChoice.parse("exact")
GREEDY = EngineChoice.parse("greedy")


def random_integer_graph(rng, n: int, orientation: str, w_max: int = 10) -> WeightedGraph:
    a = rng.integers(0, w_max + 1, size=(n, n)).astype(float)
    a = np.triu(a, 1)
    return WeightedGraph(a + a.T, orientation)


def random_binary_dendrogram(rng, n: int):
    """Uniformly random sequence of binary merges (one merge per level)."""
    builder = DendrogramBuilder(n)
    front = list(range(n))
    while len(front) > 1:
        i, j = sorted(rng.choice(len(front), size=2, replace=False))
        a, b = front[i], front[j]
        new = builder.merge_round([[a, b]])[0]
        front = [x for x in front if x not in (a, b)] + [new]
    return builder.build()


# ---------------------------------------------------------------------------
# graph_core
# ---------------------------------------------------------------------------

def check_coarsen_matches_rebuild() -> tuple[bool, str]:
    """Quarter-rule coarsening equals a from-scratch rebuild (additive 1e-9)."""
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(40):
        n = int(rng.integers(3, 13))
        g = random_integer_graph(rng, n, SIMILARITY)
        n_pow = 1 << (n - 1).bit_length()
        k_edges = n - n_pow // 2
        verts = list(rng.permutation(n))
        members = [tuple(sorted(verts[2 * i:2 * i + 2])) for i in range(k_edges)]
        members += [(v, n + v) for v in sorted(verts[2 * k_edges:])]
        members.sort()
        cg = clustering_graph_from_members(g, members, level_index=1)
        while cg.k > 1:
            order = list(rng.permutation(cg.k))
            pairing = [tuple(sorted(order[2 * i:2 * i + 2])) for i in range(cg.k // 2)]
            cg = coarsen(cg, pairing)
            rebuilt = clustering_graph_from_members(g, cg.members, cg.level_index)
            worst = max(worst, float(np.abs(cg.weights - rebuilt.weights).max()))
    return worst <= 1e-9, f"max deviation {worst:.2e}"


def check_singleton_identity() -> tuple[bool, str]:
    rng = np.random.default_rng(12)
    for _ in range(20):
        n = int(rng.integers(2, 12))
        g = random_integer_graph(rng, n, SIMILARITY)
        cg = build_clustering_graph(g, Clustering(tuple((v,) for v in range(n))))
        if not np.array_equal(cg.weights, g.weights):
            return False, f"identity failed at n={n}"
    return True, "singleton clustering graph equals the base table"


def check_average_linkage_properties() -> tuple[bool, str]:
    rng = np.random.default_rng(13)
    for _ in range(60):
        n = int(rng.integers(4, 12))
        g = random_integer_graph(rng, n, SIMILARITY)
        verts = list(rng.permutation(n))
        cut = int(rng.integers(1, n - 1))
        a, b = verts[:cut], verts[cut:cut + int(rng.integers(1, n - cut))]
        lam = float(rng.uniform(0.1, 4.0))
        lhs = average_linkage(g, a, b)
        if abs(lhs - average_linkage(g, b, a)) > 1e-12:
            return False, "symmetry violated"
        if abs(average_linkage(g.scaled(lam), a, b) - lam * lhs) > 1e-9:
            return False, "scale equivariance violated"
    return True, "symmetric and scale-equivariant on 60 random set pairs"


# ---------------------------------------------------------------------------
# matching_engine
# ---------------------------------------------------------------------------

def check_engine_floors(seeds: int = 200) -> tuple[bool, str]:
    """greedy >= exact/2 and local_search >= greedy on random small graphs."""
    rng = np.random.default_rng(21)
    for s in range(seeds):
        n = int(rng.integers(2, 11))
        g = random_integer_graph(rng, n, SIMILARITY)
        exact = exact_max_matching(g.weights).total_weight
        greedy = greedy_matching(g.weights).total_weight
        local = local_search_matching(g.weights, 0.05).total_weight
        if greedy < 0.5 * exact - 1e-9 or local < greedy - 1e-9:
            return False, f"floor violated at seed {s} (n={n})"
    return True, f"floors hold on {seeds} random graphs with n <= 10"


def check_k_sized_guarantee(seeds: int = 200) -> tuple[bool, str]:
    """criterion 5: (1 - eps) optimality, size cap, probe-count bound."""
    rng = np.random.default_rng(22)
    eps = 0.05
    checked = 0
    for s in range(seeds):
        n = int(rng.integers(4, 11))
        g = random_integer_graph(rng, n, SIMILARITY)
        w_max = int(g.max_weight)
        for k in range(1, n // 2 + 1):
            m, iters = _k_sized_max_with_stats(g.weights, k, eps, EXACT)
            opt, _ = brute_force_max_matching(g.weights, k)
            if m.size > k:
                return False, f"|M|>k at seed {s}"
            if m.total_weight < (1 - eps) * opt - 1e-9:
                return False, f"weight {m.total_weight} < (1-eps)*{opt} at seed {s}"
            bound = math.ceil(math.log2(n * w_max)) + 1 if n * w_max > 1 else 1
            if iters > bound:
                return False, f"{iters} probes > bound {bound} at seed {s}"
            checked += 1
    return True, f"{checked} (graph, k) cases within (1-eps) of brute force"


def check_engine_determinism() -> tuple[bool, str]:
    rng = np.random.default_rng(23)
    for _ in range(40):
        n = int(rng.integers(2, 11))
        g = random_integer_graph(rng, n, SIMILARITY)
        for make in (
            lambda: exact_max_matching(g.weights),
            lambda: greedy_matching(g.weights),
            lambda: local_search_matching(g.weights, 0.05),
        ):
            a, b = make(), make()
            if a.pairs != b.pairs:
                return False, "engine output changed between runs"
            recomputed = sum(g.weights[u, v] for u, v in a.pairs)
            if abs(recomputed - a.total_weight) > 1e-9:
                return False, "total_weight does not match the pairs"
    return True, "engines deterministic; weights recomputable"


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------

def check_objective_identities(cases: int = 100) -> tuple[bool, str]:
    """criterion 8: merge decompositions and duality at 1e-9 relative."""
    rng = np.random.default_rng(31)
    for case in range(cases):
        n = int(rng.integers(3, 13))
        g = random_integer_graph(rng, n, SIMILARITY)
        d = random_binary_dendrogram(rng, n)
        total = g.total_weight()
        cost = dasgupta_cost(g, d)
        rev = revenue(g, d)
        merge_costs = sum(
            merge_cost(g, d.nodes[nd.children[0]].members, d.nodes[nd.children[1]].members)
            for nd in d.internal_nodes()
        )
        merge_revs = sum(
            merge_revenue(g, d.nodes[nd.children[0]].members, d.nodes[nd.children[1]].members)
            for nd in d.internal_nodes()
        )
        scale = max(1.0, abs(cost), abs(rev))
        if abs(cost - (2 * total + merge_costs)) > 1e-9 * scale:
            return False, f"cost identity failed at case {case}"
        if abs(rev - merge_revs) > 1e-9 * scale:
            return False, f"revenue identity failed at case {case}"
        if abs(rev + cost - n * total) > 1e-9 * scale:
            return False, f"duality failed at case {case}"
    return True, f"identities hold on {cases} random (graph, tree) pairs"


def check_unit_clique_cost() -> tuple[bool, str]:
    """criterion 8: K_m unit-weight cost is tree-independent, (m^3 - m) / 3."""
    rng = np.random.default_rng(32)
    for m in range(3, 9):
        g = WeightedGraph(np.ones((m, m)) - np.eye(m), SIMILARITY)
        want = (m ** 3 - m) / 3
        for _ in range(12):
            d = random_binary_dendrogram(rng, m)
            got = dasgupta_cost(g, d)
            if abs(got - want) > 1e-9:
                return False, f"K_{m}: got {got}, want {want}"
    return True, "K_m cost equals (m^3 - m)/3 for m in 3..8"


def check_objective_scaling() -> tuple[bool, str]:
    rng = np.random.default_rng(33)
    for _ in range(30):
        n = int(rng.integers(3, 11))
        g = random_integer_graph(rng, n, SIMILARITY)
        gd = WeightedGraph(g.weights, DISSIMILARITY)
        d = random_binary_dendrogram(rng, n)
        lam = float(rng.uniform(0.0, 3.0))
        if abs(revenue(g.scaled(lam), d) - lam * revenue(g, d)) > 1e-6:
            return False, "revenue scaling violated"
        if abs(value(gd.scaled(lam), d) - lam * value(gd, d)) > 1e-6:
            return False, "value scaling violated"
    return True, "revenue and value scale linearly with the weights"


# ---------------------------------------------------------------------------
# clusterers (approximation criteria)
# ---------------------------------------------------------------------------

def _revenue_corpus(sizes, seeds, rng_seed=41):
    rng = np.random.default_rng(rng_seed)
    for n in sizes:
        for s in range(seeds):
            yield n, s, random_integer_graph(rng, n, SIMILARITY)


def check_revenue_bound(seeds: int = 200) -> tuple[bool, str]:
    """criterion 1: revenue >= (n-2)*total/3 at powers of two, /9 in general."""
    worst = math.inf
    for n, s, g in _revenue_corpus((4, 8, 16), seeds):
        d, _ = matching_affinity(g, MODE_MAX, EXACT)
        bound = (n - 2) * g.total_weight() / 3
        got = revenue(g, d)
        worst = min(worst, got - bound)
        if got < bound - 1e-6:
            return False, f"power-of-two bound broken at n={n}, seed {s}"
        if not _balance_ok(d, n):
            return False, f"balance broken at n={n}, seed {s}"
    for n, s, g in _revenue_corpus((5, 6, 7, 9, 10, 11, 12, 13, 14, 15), seeds, rng_seed=42):
        d, _ = matching_affinity(g, MODE_MAX, EXACT)
        bound = (n - 2) * g.total_weight() / 9
        got = revenue(g, d)
        worst = min(worst, got - bound)
        if got < bound - 1e-6:
            return False, f"general bound broken at n={n}, seed {s}"
        if not _balance_ok(d, n):
            return False, f"balance broken at n={n}, seed {s}"
    return True, f"revenue floors hold; slackest margin {worst:.3f}"


def check_revenue_vs_tree_optimum(graphs: int = 50) -> tuple[bool, str]:
    """criterion 2: at n=8, revenue is at least a third of the best tree."""
    rng = np.random.default_rng(43)
    worst = math.inf
    for s in range(graphs):
        g = random_integer_graph(rng, 8, SIMILARITY)
        d, _ = matching_affinity(g, MODE_MAX, EXACT)
        opt = best_tree_revenue(g.weights)
        if opt == 0.0:
            continue
        ratio = revenue(g, d) / opt
        worst = min(worst, ratio)
        if ratio < 1 / 3:
            return False, f"ratio {ratio:.4f} < 1/3 at seed {s}"
    return True, f"revenue/optimum >= 1/3 on {graphs} graphs (worst {worst:.4f})"


def check_value_bound(seeds: int = 200) -> tuple[bool, str]:
    """criterion 3: value >= 2/3 n total at powers of two, 1/3 in general."""
    rng = np.random.default_rng(44)
    worst = math.inf
    for n in (4, 8, 16, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15):
        factor = 2 / 3 if n in (4, 8, 16) else 1 / 3
        for s in range(seeds):
            g = random_integer_graph(rng, n, DISSIMILARITY)
            d, _ = matching_affinity(g, MODE_MIN, EXACT)
            bound = factor * n * g.total_weight()
            got = value(g, d)
            worst = min(worst, got - bound)
            if got < bound - 1e-6:
                return False, f"value bound broken at n={n}, seed {s}"
            if not _balance_ok(d, n):
                return False, f"balance broken at n={n}, seed {s}"
    return True, f"value floors hold; slackest margin {worst:.3f}"


def _balance_ok(dendrogram, n: int) -> bool:
    """criterion 4 helper: post-round-1 balance >= 1/2, == 1 at powers of two."""
    ratios = balance_per_level(dendrogram)[1:]
    if any(r < 0.5 for r in ratios):
        return False
    if n & (n - 1) == 0 and any(r != 1.0 for r in ratios):
        return False
    return True


def check_level_structure(seeds: int = 60) -> tuple[bool, str]:
    """criterion 10: levels == N with 2^(N-1) < n <= 2^N; counts halve."""
    rng = np.random.default_rng(45)
    for s in range(seeds):
        n = int(rng.integers(2, 20))
        g = random_integer_graph(rng, n, SIMILARITY)
        d, ledger = matching_affinity(g, MODE_MAX, EXACT if n <= 16 else GREEDY)
        n_cap = (n - 1).bit_length()
        if ledger.levels != n_cap:
            return False, f"levels {ledger.levels} != {n_cap} at n={n}"
        for i, clustering in enumerate(levels(d)):
            want = n if i == 0 else 2 ** (n_cap - i)
            if len(clustering.clusters) != want:
                return False, f"level {i} has {len(clustering.clusters)} clusters at n={n}"
        if validate(d):
            return False, f"dendrogram invalid at n={n}"
    return True, f"level structure and ledger.levels correct on {seeds} runs"


def check_run_determinism() -> tuple[bool, str]:
    rng = np.random.default_rng(46)
    for _ in range(10):
        n = int(rng.integers(3, 14))
        g = random_integer_graph(rng, n, SIMILARITY)
        d1, l1 = matching_affinity(g, MODE_MAX, EXACT)
        d2, l2 = matching_affinity(g, MODE_MAX, EXACT)
        if d1 != d2 or l1.to_dict() != l2.to_dict():
            return False, "matching_affinity is not deterministic"
        a1, _ = affinity_boruvka(g, MODE_MAX, TieBreakPolicy(kind="seeded_random", seed=9))
        a2, _ = affinity_boruvka(g, MODE_MAX, TieBreakPolicy(kind="seeded_random", seed=9))
        if a1 != a2:
            return False, "affinity_boruvka is not deterministic under a fixed seed"
        if random_divisive(g, 5) != random_divisive(g, 5):
            return False, "random_divisive is not deterministic under a fixed seed"
    return True, "repeated runs reproduce dendrograms and ledgers"


def check_oracle_gap_average_linkage() -> tuple[bool, str]:
    """Sanity anchor: sequential average linkage also clears the 1/3 floor."""
    rng = np.random.default_rng(47)
    for s in range(30):
        g = random_integer_graph(rng, 8, SIMILARITY)
        d = average_linkage_clusterer(g, MODE_MAX)
        opt = best_tree_revenue(g.weights)
        if opt and revenue(g, d) / opt < 1 / 3:
            return False, f"average linkage under 1/3 at seed {s}"
    return True, "average linkage clears 1/3 of the tree optimum on 30 graphs"


# ---------------------------------------------------------------------------
# adversarial families
# ---------------------------------------------------------------------------

def check_disjoint_matching_separation() -> tuple[bool, str]:
    """criterion 6a: value 8*n_sets vs 8*n_sets^2, exactly."""
    for n_sets in (2, 4, 8):
        spec = adv.FamilySpec(adv.DISJOINT_MATCHING, n_sets=n_sets)
        _, report = adv.adversarial_affinity_run(spec)
        if report.affinity_score != 8 * n_sets:
            return False, f"affinity value {report.affinity_score} != {8 * n_sets}"
        if report.reference_score != 8 * n_sets ** 2:
            return False, f"reference value {report.reference_score} != {8 * n_sets ** 2}"
    return True, "value separation is exactly 8n vs 8n^2 for n_sets in {2,4,8}"


def check_bipartite_unit_separation() -> tuple[bool, str]:
    """criterion 6b: the matching/affinity revenue ratio doubles with half."""
    ratios = []
    for half in (8, 16, 32):
        spec = adv.FamilySpec(adv.BIPARTITE_UNIT, half=half)
        g = adv.generate(spec)
        d, _ = matching_affinity(g, MODE_MAX, GREEDY)
        _, report = adv.adversarial_affinity_run(spec)
        ratios.append(revenue(g, d) / report.affinity_score)
    for a, b in zip(ratios, ratios[1:]):
        if not (1.5 <= b / a <= 2.5):
            return False, f"growth factor {b / a:.3f} outside 2 +/- 25%"
    return True, f"ratios {['%.2f' % r for r in ratios]} double within 25%"


def check_rows_columns_trend() -> tuple[bool, str]:
    """criterion 7a: row-first matching trails the column-first reference."""
    scores = []
    for cube_n in (2, 3):
        spec = adv.FamilySpec(adv.ROWS_COLUMNS, cube_n=cube_n)
        g = adv.generate(spec)
        d, _ = matching_affinity(g, MODE_MAX, GREEDY)
        ref = adv.reference_hierarchy(spec)
        scores.append(revenue(g, d) / revenue(g, ref))
    ok = scores[0] < 1 and scores[1] < scores[0]
    return ok, f"ratios {scores[0]:.4f} (N=64) -> {scores[1]:.4f} (N=512)"


def check_bipartite_minus_pm_trend() -> tuple[bool, str]:
    """criterion 7b: the zero-matching trap ratio falls toward 2/3."""
    scores = []
    for n_half in (8, 16, 32):
        spec = adv.FamilySpec(adv.BIPARTITE_MINUS_PM, n_half=n_half)
        g = adv.generate(spec)
        engine = EXACT if g.n <= 16 else GREEDY
        d, _ = matching_affinity(g, MODE_MIN, engine)
        first = min_perfect_matching(g.weights, engine)
        if first.total_weight != 0.0:
            return False, "first-round matching is not the zero-weight trap"
        ref = adv.reference_hierarchy(spec)
        scores.append(value(g, d) / value(g, ref))
    ok = all(r < 1 for r in scores) and scores[0] > scores[1] > scores[2]
    return ok, f"ratios {['%.4f' % r for r in scores]} decreasing below 1"


# ---------------------------------------------------------------------------
# evaluation protocol
# ---------------------------------------------------------------------------

def check_rand_index_properties(seeds: int = 100) -> tuple[bool, str]:
    rng = np.random.default_rng(61)
    for s in range(seeds):
        n = int(rng.integers(2, 31))
        lab_x = rng.integers(0, max(2, n // 3), size=n)
        lab_y = rng.integers(0, max(2, n // 4), size=n)
        x = _clustering_from_array(lab_x)
        y = _clustering_from_array(lab_y)
        if abs(rand_index(x, y) - rand_index(y, x)) > 1e-12:
            return False, f"symmetry broken at seed {s}"
        if rand_index(x, x) != 1.0:
            return False, f"self index != 1 at seed {s}"
    return True, f"symmetric and reflexive on {seeds} random partitions"


def _clustering_from_array(labels) -> Clustering:
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    return Clustering(tuple(tuple(v) for _, v in sorted(groups.items())))


def check_filter_properties() -> tuple[bool, str]:
    for name, path in bundled_datasets().items():
        ds = load_dataset(path, name)
        for seed in range(10):
            f1 = filter_balanced_pow2(ds, seed)
            f2 = filter_balanced_pow2(ds, seed)
            if f1.labels != f2.labels or not np.array_equal(f1.vectors, f2.vectors):
                return False, f"{name}: filtering is not deterministic"
            if f1.m & (f1.m - 1):
                return False, f"{name}: size {f1.m} is not a power of two"
            counts = sorted(f1.class_counts().values())
            if counts[-1] - counts[0] > 1:
                return False, f"{name}: class counts differ by more than one"
    return True, "filtered datasets are power-of-two sized and balanced"


def check_dataset_protocol(seeds: int = 50) -> tuple[bool, str]:
    """criterion 9: balance of extracted clusterings and the random baseline."""
    details = []
    for name, path in bundled_datasets().items():
        ds = load_dataset(path, name)
        graph = quantize_integer_weights(graph_from_vectors(ds, COSINE))
        dendro, _ = matching_affinity(graph, MODE_MAX, GREEDY)
        for k in range(2, ds.m + 1):
            if balance_ratio(extract_k_clustering(dendro, k)) < 0.25 - 1e-12:
                return False, f"{name}: raw k={k} balance below 1/4"
        truth = ground_truth_clustering(ds)
        k = len(ds.classes())
        mac_rand = rand_index(extract_k_clustering(dendro, k), truth)
        rand_scores = []
        for seed in range(seeds):
            rd = random_divisive(graph, seed)
            rand_scores.append(rand_index(extract_k_clustering(rd, k), truth))
        avg_random = float(np.mean(rand_scores))
        if mac_rand <= avg_random:
            return False, f"{name}: matching {mac_rand:.3f} <= random {avg_random:.3f}"
        for seed in range(seeds):
            fds = filter_balanced_pow2(ds, seed)
            fgraph = graph_from_vectors(fds, COSINE)
            fdendro, _ = matching_affinity(fgraph, MODE_MAX, GREEDY)
            j = 1
            while (1 << j) <= fds.m:
                if balance_ratio(extract_k_clustering(fdendro, 1 << j)) != 1.0:
                    return False, f"{name}: filtered 2^{j}-clustering unbalanced"
                j += 1
        details.append(f"{name}: matching {mac_rand:.3f} > random {avg_random:.3f}")
    return True, "; ".join(details)


def check_grid_reproducibility() -> tuple[bool, str]:
    """criterion 10: grid CSVs are byte-identical under fixed seeds."""
    name, path = sorted(bundled_datasets().items())[0]
    ds = load_dataset(path, name)
    rows_a = evaluate_grid(ds, seeds=range(5), jobs=2)
    rows_b = evaluate_grid(ds, seeds=range(5), jobs=1)
    ok = rows_to_csv(rows_a) == rows_to_csv(rows_b)
    return ok, "grid CSV identical across jobs=1 and jobs=2" if ok else "CSV bytes differ"


@dataclass(frozen=True)
class Check:
    name: str
    tag: str
    fn: Callable[[], tuple[bool, str]]


CHECKS: tuple[Check, ...] = (
    Check("coarsen_matches_rebuild", "graph_core", check_coarsen_matches_rebuild),
    Check("singleton_identity", "graph_core", check_singleton_identity),
    Check("average_linkage_properties", "graph_core", check_average_linkage_properties),
    Check("engine_floors", "matching_engine", check_engine_floors),
    Check("k_sized_guarantee", "criterion 5", check_k_sized_guarantee),
    Check("engine_determinism", "matching_engine", check_engine_determinism),
    Check("objective_identities", "criterion 8", check_objective_identities),
    Check("unit_clique_cost", "criterion 8", check_unit_clique_cost),
    Check("objective_scaling", "objectives", check_objective_scaling),
    Check("revenue_bound", "criterion 1", check_revenue_bound),
    Check("revenue_vs_tree_optimum", "criterion 2", check_revenue_vs_tree_optimum),
    Check("value_bound", "criterion 3", check_value_bound),
    Check("level_structure", "criterion 10", check_level_structure),
    Check("run_determinism", "criterion 10", check_run_determinism),
    Check("average_linkage_anchor", "clusterers", check_oracle_gap_average_linkage),
    Check("disjoint_matching_separation", "criterion 6", check_disjoint_matching_separation),
    Check("bipartite_unit_separation", "criterion 6", check_bipartite_unit_separation),
    Check("rows_columns_trend", "criterion 7", check_rows_columns_trend),
    Check("bipartite_minus_pm_trend", "criterion 7", check_bipartite_minus_pm_trend),
    Check("rand_index_properties", "evaluation", check_rand_index_properties),
    Check("filter_properties", "evaluation", check_filter_properties),
    Check("dataset_protocol", "criterion 9", check_dataset_protocol),
    Check("grid_reproducibility", "criterion 10", check_grid_reproducibility),
)


def run_selftest(names: list[str] | None = None, out=print) -> int:
    """Run the registry; returns the number of failed checks."""
    failed = 0
    selected = [c for c in CHECKS if names is None or c.name in names]
    for check in selected:
        try:
            ok, detail = check.fn()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        status = "PASS" if ok else "FAIL"
        out(f"{status} [{check.tag}] {check.name}: {detail}")
        failed += 0 if ok else 1
    out(f"{len(selected) - failed}/{len(selected)} checks passed")
    return failed
