"""The four hierarchical clusterers plus logical round/space accounting.

* ``matching_affinity`` -- iterated maximum (similarity) or minimum
  (dissimilarity) matchings over clustering graphs.  With n vertices and
  2^(N-1) < n <= 2^N, the first round matches 2n - 2^N vertices through the
  k-sized engine; every unmatched vertex is paired with a phantom duplicate
  of itself, so the level structure halves cleanly from 2^(N-1) clusters on.
* ``affinity_boruvka`` -- every cluster grabs its best outgoing edge and the
  connected components of the grabbed edges merge at once (multiway nodes).
* ``average_linkage_clusterer`` -- classic sequential agglomeration.
* ``random_divisive`` -- seeded recursive balanced bisection.

Ledgers count logical rounds (merge levels, matching probes) and a
simulated per-machine space high-water mark; they do not emulate a real
cluster.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph_core import (
    DISSIMILARITY,
    SIMILARITY,
    ClusteringGraph,
    GraphError,
    WeightedGraph,
    clustering_graph_from_members,
    coarsen,
)
from .hierarchy import Dendrogram, DendrogramBuilder
from .matching_engine import (
    EngineChoice,
    Matching,
    MatchingError,
    _k_sized_max_with_stats,
    max_perfect_matching,
    min_k_sized_matching,
    min_perfect_matching,
)

MODE_MAX = "max"
MODE_MIN = "min"

LOWEST_INDEX = "lowest_index"
SEEDED_RANDOM = "seeded_random"
ADVERSARIAL_HUB = "adversarial_hub"


@dataclass
class RoundLedger:
    """Logical rounds and simulated per-machine space for one run.

    ``matching_rounds[i]`` is the number of engine probes charged for the
    matching at merge round i (binary-search iterations for the k-sized
    call, 1 otherwise).  ``space_high_water`` tracks the larger of the base
    graph row count and 4*(k-1) table entries per machine when a k-cluster
    level is rebuilt, one machine per cluster.
    """

    levels: int = 0
    matching_rounds: list[int] = field(default_factory=list)
    space_high_water: int = 0
    notes: list[str] = field(default_factory=list)

    def charge_space(self, entries: int) -> None:
        self.space_high_water = max(self.space_high_water, entries)

    def to_dict(self) -> dict:
        return {
            "levels": self.levels,
            "matching_rounds": list(self.matching_rounds),
            "space_high_water": self.space_high_water,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class TieBreakPolicy:
    """How a cluster picks among equally good outgoing edges.

    ``adversarial_hub`` reproduces worst-case resolutions: ``preferences``
    maps a vertex to an ordered tuple of partner vertices it tries first,
    and ``hubs`` names the anchor vertices of the construction.  Anything
    not settled by a preference falls back to the lowest-index rule.
    """

    kind: str = LOWEST_INDEX
    seed: int = 0
    hubs: tuple[int, ...] = ()
    preferences: tuple[tuple[int, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        if self.kind not in (LOWEST_INDEX, SEEDED_RANDOM, ADVERSARIAL_HUB):
            raise GraphError(f"unknown tie-break policy {self.kind!r}")
        if self.kind == ADVERSARIAL_HUB and not self.hubs:
            raise GraphError("adversarial_hub policy needs hub vertices")

    def preference_map(self) -> dict[int, tuple[int, ...]]:
        return dict(self.preferences)


def _check_mode(graph: WeightedGraph, mode: str) -> None:
    if mode not in (MODE_MAX, MODE_MIN):
        raise GraphError(f"mode must be 'max' or 'min', got {mode!r}")
    wanted = SIMILARITY if mode == MODE_MAX else DISSIMILARITY
    if graph.orientation != wanted:
        raise GraphError(
            f"mode {mode!r} needs a {wanted} graph, got {graph.orientation}"
        )


def _pad_matching(weights: np.ndarray, matching: Matching, k_edges: int) -> Matching:
    """Top a short matching up to exactly k_edges pairs, heaviest free pairs first."""
    if matching.size == k_edges:
        return matching
    used = matching.vertices()
    free = [v for v in range(weights.shape[0]) if v not in used]
    pairs = list(matching.pairs)
    while len(pairs) < k_edges:
        best = None
        for x in range(len(free)):
            for y in range(x + 1, len(free)):
                cand = (weights[free[x], free[y]], -free[x], -free[y])
                if best is None or cand > best[0]:
                    best = (cand, (free[x], free[y]))
        if best is None:
            raise MatchingError("cannot pad matching to the required size")
        u, v = best[1]
        pairs.append((u, v))
        free.remove(u)
        free.remove(v)
    return Matching.from_pairs(weights, pairs, note=matching.note)


def matching_affinity(
    graph: WeightedGraph,
    mode: str,
    engine: EngineChoice,
    epsilon: float = 0.05,
) -> tuple[Dendrogram, RoundLedger]:
    """Hierarchy by iterated matchings on coarsened clustering graphs.

    Round 1 matches 2n - 2^N vertices (k_edges = n - 2^(N-1)) and pairs each
    unmatched vertex with a phantom duplicate; later rounds take perfect
    matchings until one cluster remains.  Returns the dendrogram over real
    vertices and the round ledger.
    """
    _check_mode(graph, mode)
    n = graph.n
    builder = DendrogramBuilder(n)
    ledger = RoundLedger()
    ledger.charge_space(n)
    if n == 1:
        return builder.build(), ledger

    N = (n - 1).bit_length()
    k_edges = n - (1 << (N - 1))
    if n == (1 << N):
        if mode == MODE_MAX:
            matching = max_perfect_matching(graph.weights, engine)
        else:
            matching = min_perfect_matching(graph.weights, engine)
        iterations = 1
    elif mode == MODE_MAX:
        matching, iterations = _k_sized_max_with_stats(
            graph.weights, k_edges, epsilon, engine
        )
        matching = _pad_matching(graph.weights, matching, k_edges)
    else:
        matching = min_k_sized_matching(graph.weights, k_edges, engine)
        iterations = 1
        if matching.note:
            ledger.notes.append(matching.note)
    ledger.matching_rounds.append(iterations)

    matched = matching.vertices()
    groups: list[list[int]] = [list(p) for p in matching.pairs]
    members: list[tuple[int, ...]] = [tuple(p) for p in matching.pairs]
    for v in range(n):
        if v not in matched:
            groups.append([v])              # phantom pair: the node carries over
            members.append((v, n + v))      # phantom id n + v aliases v's weights
    order = sorted(range(len(members)), key=lambda i: members[i][0])
    groups = [groups[i] for i in order]
    members = [members[i] for i in order]
    node_ids = builder.merge_round(groups)
    ledger.levels = 1

    cg = clustering_graph_from_members(graph, members, level_index=1)
    ledger.charge_space(max(0, 4 * cg.k - 4))
    while cg.k > 1:
        if mode == MODE_MAX:
            matching = max_perfect_matching(cg.weights, engine)
        else:
            matching = min_perfect_matching(cg.weights, engine)
        ledger.matching_rounds.append(1)
        pairs = sorted(matching.pairs)
        node_ids = builder.merge_round([[node_ids[a], node_ids[b]] for a, b in pairs])
        cg = coarsen(cg, pairs)
        ledger.levels += 1
        ledger.charge_space(max(0, 4 * cg.k - 4))
    return builder.build(), ledger


def _components(k: int, edges: list[tuple[int, int]]) -> list[list[int]]:
    parent = list(range(k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    return [groups[r] for r in sorted(groups)]


def affinity_boruvka(
    graph: WeightedGraph,
    mode: str,
    policy: TieBreakPolicy | None = None,
) -> tuple[Dendrogram, RoundLedger]:
    """Component-merge clustering: each cluster grabs its best outgoing edge.

    Similarity graphs grab maximum-weight edges (maximum spanning structure),
    dissimilarity graphs minimum-weight edges.  Connected components of the
    grabbed edges merge into single, possibly multiway, nodes.
    """
    if mode not in (MODE_MAX, MODE_MIN):
        raise GraphError(f"mode must be 'max' or 'min', got {mode!r}")
    policy = policy or TieBreakPolicy()
    if policy.kind == ADVERSARIAL_HUB:
        missing = [h for h in policy.hubs if h >= graph.n]
        if missing:
            raise GraphError(f"hub vertices {missing} not present in the graph")
    prefs = policy.preference_map()
    n = graph.n
    w = graph.weights
    builder = DendrogramBuilder(n)
    ledger = RoundLedger()
    ledger.charge_space(n)
    node_ids = list(range(n))
    members: list[list[int]] = [[v] for v in range(n)]
    rng = np.random.default_rng(policy.seed)
    round_no = 0
    while len(members) > 1:
        round_no += 1
        owner = np.empty(n, dtype=np.int64)
        for ci, mem in enumerate(members):
            owner[mem] = ci
        chosen: list[tuple[int, int]] = []
        for ci, mem in enumerate(members):
            inside = np.zeros(n, dtype=bool)
            inside[mem] = True
            block = w[np.ix_(mem, (~inside).nonzero()[0])]
            best = block.max() if mode == MODE_MAX else block.min()
            cand = []
            outside_ids = (~inside).nonzero()[0]
            rows, cols = (block == best).nonzero()
            for r, c in zip(rows, cols):
                cand.append((int(mem[r]), int(outside_ids[c])))
            edge = _pick_edge(cand, prefs, policy, rng)
            chosen.append((ci, int(owner[edge[1]])))
        comps = _components(len(members), chosen)
        groups = [[node_ids[i] for i in comp] for comp in comps]
        new_ids = builder.merge_round(groups)
        node_ids = new_ids
        members = [sorted(v for i in comp for v in members[i]) for comp in comps]
        ledger.levels += 1
        ledger.matching_rounds.append(1)
        ledger.charge_space(len(members))
    return builder.build(), ledger


def _pick_edge(candidates, prefs, policy: TieBreakPolicy, rng) -> tuple[int, int]:
    """Choose one of the tied best outgoing edges (own vertex, outside vertex)."""
    if policy.kind == SEEDED_RANDOM:
        ordered = sorted(candidates, key=lambda e: (e[0], e[1]))
        return ordered[int(rng.integers(len(ordered)))]
    if policy.kind == ADVERSARIAL_HUB and prefs:
        by_vertex: dict[int, list[int]] = {}
        for u, v in candidates:
            by_vertex.setdefault(u, []).append(v)
        for u in sorted(by_vertex):
            for target in prefs.get(u, ()):
                if target in by_vertex[u]:
                    return (u, target)
    return min(candidates, key=lambda e: (e[1], e[0]))


def average_linkage_clusterer(graph: WeightedGraph, mode: str) -> Dendrogram:
    """Sequential agglomeration of the best average-linkage pair.

    ``max`` merges the largest average linkage (similarity), ``min`` the
    smallest (dissimilarity); ties go to the lexicographically smallest
    cluster-id pair, ids being sorted member tuples.
    """
    _check_mode(graph, mode)
    n = graph.n
    builder = DendrogramBuilder(n)
    if n == 1:
        return builder.build()
    # clusters stay ordered by smallest member, so the row-major argmax (or
    # argmin) lands on the lexicographically smallest tied pair
    link = graph.weights.copy()
    sizes = [1] * n
    node_ids = list(range(n))
    while len(node_ids) > 1:
        k = len(node_ids)
        masked = link.copy()
        if mode == MODE_MAX:
            masked[np.tril_indices(k)] = -np.inf
            a, b = divmod(int(masked.argmax()), k)
        else:
            masked[np.tril_indices(k)] = np.inf
            a, b = divmod(int(masked.argmin()), k)
        merged_id = builder.merge_round([[node_ids[a], node_ids[b]]])[0]
        sa, sb = sizes[a], sizes[b]
        combined = (sa * link[a, :] + sb * link[b, :]) / (sa + sb)
        keep = [i for i in range(k) if i not in (a, b)]
        link = link[np.ix_(keep, keep)]
        row = combined[keep]
        # the merged cluster inherits cluster a's smallest member (a < b), so
        # slot a keeps the order sorted
        link = np.insert(link, a, row, axis=0)
        link = np.insert(link, a, np.insert(row, a, 0.0), axis=1)
        sizes = [sizes[i] for i in keep]
        sizes.insert(a, sa + sb)
        node_ids = [node_ids[i] for i in keep]
        node_ids.insert(a, merged_id)
    return builder.build()


def random_divisive(graph: WeightedGraph, seed: int) -> Dendrogram:
    """Recursive uniformly random balanced bisection, deterministic per seed.

    Splits are ceil/floor halves of a seeded shuffle.  Merge rounds follow
    subtree height, so every level keeps cluster sizes within one of each
    other.
    """
    n = graph.n
    rng = np.random.default_rng(seed)
    builder = DendrogramBuilder(n)
    if n == 1:
        return builder.build()
    children: dict[tuple[int, ...], tuple[tuple[int, ...], tuple[int, ...]]] = {}
    heights: dict[tuple[int, ...], int] = {}

    def divide(block: tuple[int, ...]) -> int:
        if len(block) == 1:
            heights[block] = 0
            return 0
        perm = rng.permutation(len(block))
        half = (len(block) + 1) // 2
        left = tuple(sorted(block[i] for i in perm[:half]))
        right = tuple(sorted(block[i] for i in perm[half:]))
        children[block] = (left, right)
        heights[block] = 1 + max(divide(left), divide(right))
        return heights[block]

    top = divide(tuple(range(n)))
    id_of: dict[tuple[int, ...], int] = {(v,): v for v in range(n)}
    for h in range(1, top + 1):
        pending = sorted((blk for blk, hh in heights.items()
                          if hh == h and blk in children), key=lambda b: b[0])
        groups = [[id_of[children[blk][0]], id_of[children[blk][1]]] for blk in pending]
        new_ids = builder.merge_round(groups)
        for blk, nid in zip(pending, new_ids):
            id_of[blk] = nid
    return builder.build()
