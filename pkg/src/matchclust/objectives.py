"""Exact evaluation of hierarchical-clustering objectives.

For a tree T over a graph G, every vertex pair (i, j) contributes through
the node where i and j first share a cluster (their least common ancestor):

* cost     = sum over pairs of w(i,j) * |leaves(T[i v j])|   (similarity, minimized)
* revenue  = sum over pairs of w(i,j) * (n - |leaves(T[i v j])|)  (similarity, maximized)
* value    = the cost formula on dissimilarity weights           (maximized)

The per-node aggregation below is the single source of truth; the merge
cost/revenue decompositions exist to cross-check the identities

    cost = 2 * total_weight + sum of merge costs        (binary trees)
    revenue = sum of merge revenues
    revenue + cost = n * total_weight

where total_weight sums w over unordered pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph_core import (
    DISSIMILARITY,
    SIMILARITY,
    Clustering,
    GraphError,
    WeightedGraph,
)
from .hierarchy import Dendrogram


class ObjectiveError(ValueError):
    """Mismatched inputs for an objective evaluation."""


def _check_match(graph: WeightedGraph, dendrogram: Dendrogram) -> None:
    if graph.n != dendrogram.n_leaves:
        raise ObjectiveError(
            f"graph has {graph.n} vertices but dendrogram has {dendrogram.n_leaves} leaves"
        )


def _node_cross_weights(graph: WeightedGraph, dendrogram: Dendrogram):
    """Yield (node, cross) where cross sums w over pairs first joined at node."""
    w = graph.weights
    for nd in dendrogram.internal_nodes():
        child_members = [list(dendrogram.nodes[c].members) for c in nd.children]
        cross = 0.0
        for a in range(len(child_members)):
            for b in range(a + 1, len(child_members)):
                cross += float(w[np.ix_(child_members[a], child_members[b])].sum())
        yield nd, cross


def _leafcount_objective(graph: WeightedGraph, dendrogram: Dendrogram) -> float:
    return sum(cross * nd.size for nd, cross in _node_cross_weights(graph, dendrogram))


def dasgupta_cost(graph: WeightedGraph, dendrogram: Dendrogram) -> float:
    """Similarity cost: heavy edges should merge low in the tree."""
    if graph.orientation != SIMILARITY:
        raise ObjectiveError("cost is defined on similarity graphs")
    _check_match(graph, dendrogram)
    return _leafcount_objective(graph, dendrogram)


def revenue(graph: WeightedGraph, dendrogram: Dendrogram) -> float:
    """Similarity revenue: the dual of cost, maximized."""
    if graph.orientation != SIMILARITY:
        raise ObjectiveError("revenue is defined on similarity graphs")
    _check_match(graph, dendrogram)
    n = graph.n
    return sum(
        cross * (n - nd.size) for nd, cross in _node_cross_weights(graph, dendrogram)
    )


def value(graph: WeightedGraph, dendrogram: Dendrogram) -> float:
    """Dissimilarity value: the cost formula on distances, maximized."""
    if graph.orientation != DISSIMILARITY:
        raise ObjectiveError("value is defined on dissimilarity graphs")
    _check_match(graph, dendrogram)
    return _leafcount_objective(graph, dendrogram)


def _check_disjoint(side_a: Iterable[int], side_b: Iterable[int]):
    a = tuple(side_a)
    b = tuple(side_b)
    if not a or not b:
        raise ObjectiveError("merge sides must be non-empty")
    if set(a) & set(b):
        raise ObjectiveError("merge sides must be disjoint")
    return a, b


def merge_cost(graph: WeightedGraph, side_a: Iterable[int], side_b: Iterable[int]) -> float:
    """|B| * w(A, outside) + |A| * w(B, outside)."""
    a, b = _check_disjoint(side_a, side_b)
    w = graph.weights
    outside = sorted(set(range(graph.n)) - set(a) - set(b))
    if not outside:
        return 0.0
    wa = float(w[np.ix_(list(a), outside)].sum())
    wb = float(w[np.ix_(list(b), outside)].sum())
    return len(b) * wa + len(a) * wb


def merge_revenue(graph: WeightedGraph, side_a: Iterable[int], side_b: Iterable[int]) -> float:
    """(n - |A| - |B|) * w(A, B)."""
    a, b = _check_disjoint(side_a, side_b)
    w = graph.weights
    cross = float(w[np.ix_(list(a), list(b))].sum())
    return (graph.n - len(a) - len(b)) * cross


def _transition_merges(fine: Clustering, coarse: Clustering):
    """Binary merge sequence turning `fine` into `coarse`, left to right.

    Multiway unions are decomposed in cluster order; callers can detect that
    with :func:`is_binary_transition` since the decomposition is not part of
    the objective definitions.
    """
    fine_sets = [frozenset(c) for c in fine.clusters]
    merges: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    for coarse_cluster in coarse.clusters:
        cs = frozenset(coarse_cluster)
        parts = [c for c in fine_sets if c <= cs]
        if not parts or frozenset().union(*parts) != cs:
            raise ObjectiveError("coarse clustering is not a union of fine clusters")
        parts.sort(key=min)
        acc = tuple(sorted(parts[0]))
        for nxt in parts[1:]:
            nxt_t = tuple(sorted(nxt))
            merges.append((acc, nxt_t))
            acc = tuple(sorted(acc + nxt_t))
    return merges


def is_binary_transition(fine: Clustering, coarse: Clustering) -> bool:
    """True when every coarse cluster joins at most two fine clusters."""
    fine_sets = [frozenset(c) for c in fine.clusters]
    for coarse_cluster in coarse.clusters:
        cs = frozenset(coarse_cluster)
        if sum(1 for c in fine_sets if c <= cs) > 2:
            return False
    return True


def clustering_cost(graph: WeightedGraph, fine: Clustering, coarse: Clustering) -> float:
    """Sum of merge costs over the merges turning `fine` into `coarse`."""
    return sum(merge_cost(graph, a, b) for a, b in _transition_merges(fine, coarse))


def clustering_revenue(graph: WeightedGraph, fine: Clustering, coarse: Clustering) -> float:
    """Sum of merge revenues over the merges turning `fine` into `coarse`."""
    return sum(merge_revenue(graph, a, b) for a, b in _transition_merges(fine, coarse))


@dataclass(frozen=True)
class LevelRow:
    level_from: int
    level_to: int
    clustering_cost: float
    clustering_revenue: float
    binary: bool


@dataclass(frozen=True)
class ObjectiveReport:
    orientation: str
    n: int
    total_weight: float
    cost: float | None
    revenue: float | None
    value: float | None
    per_level: tuple[LevelRow, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "orientation": self.orientation,
            "n": self.n,
            "total_weight": self.total_weight,
            "cost": self.cost,
            "revenue": self.revenue,
            "value": self.value,
            "per_level": [
                {
                    "level_from": r.level_from,
                    "level_to": r.level_to,
                    "clustering_cost": r.clustering_cost,
                    "clustering_revenue": r.clustering_revenue,
                    "binary": r.binary,
                }
                for r in self.per_level
            ],
        }

    def csv_rows(self) -> list[str]:
        header = "level_from,level_to,clustering_cost,clustering_revenue,binary"
        rows = [header]
        for r in self.per_level:
            rows.append(
                f"{r.level_from},{r.level_to},{r.clustering_cost:.12g},"
                f"{r.clustering_revenue:.12g},{int(r.binary)}"
            )
        return rows


def objective_report(graph: WeightedGraph, dendrogram: Dendrogram) -> ObjectiveReport:
    """Evaluate the orientation's objectives plus a per-level breakdown."""
    _check_match(graph, dendrogram)
    rows = []
    lv = [dendrogram.level_clustering(i) for i in range(dendrogram.level_count)]
    for i in range(len(lv) - 1):
        rows.append(
            LevelRow(
                level_from=i,
                level_to=i + 1,
                clustering_cost=clustering_cost(graph, lv[i], lv[i + 1]),
                clustering_revenue=clustering_revenue(graph, lv[i], lv[i + 1]),
                binary=is_binary_transition(lv[i], lv[i + 1]),
            )
        )
    base = _leafcount_objective(graph, dendrogram)
    if graph.orientation == SIMILARITY:
        return ObjectiveReport(
            orientation=graph.orientation,
            n=graph.n,
            total_weight=graph.total_weight(),
            cost=base,
            revenue=revenue(graph, dendrogram),
            value=None,
            per_level=tuple(rows),
        )
    return ObjectiveReport(
        orientation=graph.orientation,
        n=graph.n,
        total_weight=graph.total_weight(),
        cost=None,
        revenue=None,
        value=base,
        per_level=tuple(rows),
    )
