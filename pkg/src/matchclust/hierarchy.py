"""Dendrograms: merge trees with per-level clusterings.

A dendrogram stores one node per merge (internal nodes may have two or more
children) plus a sequence of frontiers: the clusters alive after each merge
round, from singletons (level 0) up to the single root.  Phantom padding
copies used by the clustering algorithms never appear here; members are
always real vertex ids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .graph_core import Clustering, GraphError


class HierarchyError(ValueError):
    """Invalid dendrogram construction or query."""


@dataclass(frozen=True)
class DendroNode:
    id: int
    children: tuple[int, ...]  # empty for leaves
    members: tuple[int, ...]
    level: int

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Dendrogram:
    n_leaves: int
    nodes: tuple[DendroNode, ...]
    frontiers: tuple[tuple[int, ...], ...]

    @property
    def root_id(self) -> int:
        return self.frontiers[-1][0]

    @property
    def level_count(self) -> int:
        return len(self.frontiers)

    def node(self, node_id: int) -> DendroNode:
        return self.nodes[node_id]

    def internal_nodes(self) -> list[DendroNode]:
        return [nd for nd in self.nodes if not nd.is_leaf]

    def level_clustering(self, level: int) -> Clustering:
        clusters = tuple(self.nodes[i].members for i in self.frontiers[level])
        return Clustering(clusters, level_index=level)


class DendrogramBuilder:
    """Accumulates merge rounds; unmentioned frontier nodes carry over."""

    def __init__(self, n_leaves: int):
        if n_leaves < 1:
            raise HierarchyError("need at least one leaf")
        self.n_leaves = n_leaves
        self._nodes: list[DendroNode] = [
            DendroNode(id=v, children=(), members=(v,), level=0) for v in range(n_leaves)
        ]
        self._frontiers: list[tuple[int, ...]] = [tuple(range(n_leaves))]

    @property
    def frontier(self) -> tuple[int, ...]:
        return self._frontiers[-1]

    def merge_round(self, groups: list[list[int]]) -> list[int]:
        """Apply one round of merges; returns the new id for each group.

        Every group with two or more node ids becomes a new node; singleton
        groups (and ids not mentioned at all) carry over unchanged.
        """
        level = len(self._frontiers)
        current = set(self._frontiers[-1])
        listed = [i for g in groups for i in g]
        if len(listed) != len(set(listed)) or not set(listed) <= current:
            raise HierarchyError("groups must be disjoint subsets of the frontier")
        new_ids: list[int] = []
        replaced: set[int] = set()
        for group in groups:
            if len(group) == 1:
                new_ids.append(group[0])
                continue
            members = tuple(sorted(v for i in group for v in self._nodes[i].members))
            node = DendroNode(
                id=len(self._nodes), children=tuple(group), members=members, level=level
            )
            self._nodes.append(node)
            new_ids.append(node.id)
            replaced.update(group)
        carried = [i for i in self._frontiers[-1] if i not in replaced]
        merged = [i for i in new_ids if i not in carried]
        frontier = sorted(set(carried) | set(merged),
                          key=lambda i: self._nodes[i].members[0])
        self._frontiers.append(tuple(frontier))
        return new_ids

    def build(self) -> Dendrogram:
        if len(self._frontiers[-1]) != 1 and self.n_leaves > 1:
            raise HierarchyError("dendrogram is not rooted yet")
        return Dendrogram(
            n_leaves=self.n_leaves,
            nodes=tuple(self._nodes),
            frontiers=tuple(self._frontiers),
        )


def levels(dendrogram: Dendrogram) -> list[Clustering]:
    """Per-level clusterings, finest (singletons) to coarsest (root)."""
    return [dendrogram.level_clustering(i) for i in range(dendrogram.level_count)]


def balance_per_level(dendrogram: Dendrogram) -> list[float]:
    """min/max cluster size at every level."""
    out = []
    for frontier in dendrogram.frontiers:
        sizes = [dendrogram.nodes[i].size for i in frontier]
        out.append(min(sizes) / max(sizes))
    return out


def extract_k_clustering(dendrogram: Dendrogram, k: int) -> Clustering:
    """Pick exactly k clusters by splitting down from the nearest level.

    Starts at the finest level that has at most k clusters, then repeatedly
    replaces the largest cluster (ties: smallest minimum member) by its
    children.  A multiway node whose full split would overshoot k is split
    partially: its largest children become clusters of their own and the
    rest stay grouped.
    """
    n = dendrogram.n_leaves
    if not (1 <= k <= n):
        raise HierarchyError(f"k must lie in [1, {n}], got {k}")
    start = None
    for level in range(dendrogram.level_count):
        if len(dendrogram.frontiers[level]) <= k:
            start = level
            break
    if start is None:
        raise HierarchyError("no level with at most k clusters")
    # working clusters: lists of node ids (usually one id per cluster)
    groups: list[list[int]] = [[i] for i in dendrogram.frontiers[start]]

    def group_size(g: list[int]) -> int:
        return sum(dendrogram.nodes[i].size for i in g)

    def group_key(g: list[int]):
        return (-group_size(g), min(dendrogram.nodes[i].members[0] for i in g))

    while len(groups) < k:
        groups.sort(key=group_key)
        for gi, g in enumerate(groups):
            if len(g) > 1:
                children = list(g)
            else:
                children = list(dendrogram.nodes[g[0]].children)
            if len(children) < 2:
                continue
            need = k - len(groups) + 1
            children.sort(key=lambda i: (-dendrogram.nodes[i].size,
                                         dendrogram.nodes[i].members[0]))
            if len(children) <= need:
                parts = [[c] for c in children]
            else:
                parts = [[c] for c in children[: need - 1]]
                parts.append(children[need - 1:])
            groups[gi:gi + 1] = parts
            break
        else:
            raise HierarchyError(f"cannot refine this dendrogram to {k} clusters")
    clusters = tuple(
        tuple(sorted(v for i in g for v in dendrogram.nodes[i].members)) for g in groups
    )
    clusters = tuple(sorted(clusters, key=lambda c: c[0]))
    return Clustering(clusters, level_index=start)


def validate(dendrogram: Dendrogram) -> list[str]:
    """Return human-readable descriptions of every violated invariant."""
    problems: list[str] = []
    n = dendrogram.n_leaves
    leaves = [nd for nd in dendrogram.nodes if nd.is_leaf]
    if sorted(v for nd in leaves for v in nd.members) != list(range(n)):
        problems.append("leaves do not cover exactly the input vertices")
    for nd in dendrogram.nodes:
        if nd.is_leaf:
            continue
        child_members = sorted(v for c in nd.children for v in dendrogram.nodes[c].members)
        if len(child_members) != len(set(child_members)):
            problems.append(f"node {nd.id}: children overlap")
        if tuple(child_members) != nd.members:
            problems.append(f"node {nd.id}: members differ from union of children")
        if len(nd.children) < 2:
            problems.append(f"node {nd.id}: internal node with fewer than two children")
    for level, frontier in enumerate(dendrogram.frontiers):
        flat = sorted(v for i in frontier for v in dendrogram.nodes[i].members)
        if flat != list(range(n)):
            problems.append(f"level {level}: clusters do not partition the vertex set")
    for level in range(dendrogram.level_count - 1):
        try:
            fine = dendrogram.level_clustering(level)
            coarse = dendrogram.level_clustering(level + 1)
        except GraphError as exc:
            problems.append(f"level {level}: {exc}")
            continue
        coarse_sets = [frozenset(c) for c in coarse.clusters]
        for cluster in fine.clusters:
            cs = frozenset(cluster)
            if not any(cs <= big for big in coarse_sets):
                problems.append(
                    f"level {level}->{level + 1}: cluster {cluster} is not refined"
                )
                break
    if dendrogram.frontiers and len(dendrogram.frontiers[-1]) != 1:
        problems.append("last level is not a single cluster")
    if dendrogram.frontiers and len(dendrogram.frontiers[0]) != n:
        problems.append("first level is not the singleton clustering")
    return problems


def dendrogram_to_text(dendrogram: Dendrogram) -> str:
    """One merge per line: `level,child_a,child_b[,child_c...]`."""
    lines = []
    for nd in dendrogram.nodes:
        if nd.is_leaf:
            continue
        lines.append(",".join([str(nd.level)] + [str(c) for c in nd.children]))
    return "\n".join(lines) + ("\n" if lines else "")


def dendrogram_summary(dendrogram: Dendrogram) -> dict:
    sizes_per_level = []
    for level, frontier in enumerate(dendrogram.frontiers):
        sizes = sorted((dendrogram.nodes[i].size for i in frontier), reverse=True)
        sizes_per_level.append(
            {
                "level": level,
                "clusters": len(frontier),
                "balance": min(sizes) / max(sizes),
                "sizes": sizes,
            }
        )
    return {
        "n_leaves": dendrogram.n_leaves,
        "levels": sizes_per_level,
        "merges": sum(1 for nd in dendrogram.nodes if not nd.is_leaf),
    }


def dendrogram_summary_json(dendrogram: Dendrogram) -> str:
    return json.dumps(dendrogram_summary(dendrogram), indent=2, sort_keys=True)
