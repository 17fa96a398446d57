"""Worst-case graph families and their reference hierarchies.

Four constructions separate the matching-based clusterer from the
component-merge baseline or pin down its approximation factors:

* ``bipartite_unit``     -- complete bipartite unit graph; greedy component
  merges can collapse each side into a star around a hub vertex.
* ``disjoint_matching``  -- a perfect matching of unit edges in groups of
  four vertices; component merges trap every unit edge in a 4-cluster.
* ``rows_columns``       -- unit column cliques crossed by slightly heavier
  row cliques; row-first merging caps the revenue.
* ``bipartite_minus_pm`` -- complete bipartite minus a perfect matching;
  the removed matching is a zero-weight trap for minimum matchings.

Vertex layouts are chosen so the engines' lowest-index tie-breaks (or the
family's adversarial preferences) reproduce the intended worst-case run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clusterers import (
    MODE_MAX,
    MODE_MIN,
    ADVERSARIAL_HUB,
    RoundLedger,
    TieBreakPolicy,
    affinity_boruvka,
)
from .graph_core import DISSIMILARITY, SIMILARITY, GraphError, WeightedGraph
from .hierarchy import Dendrogram, DendrogramBuilder
from .objectives import revenue, value

BIPARTITE_UNIT = "bipartite_unit"
DISJOINT_MATCHING = "disjoint_matching"
ROWS_COLUMNS = "rows_columns"
BIPARTITE_MINUS_PM = "bipartite_minus_pm"
FAMILIES = (BIPARTITE_UNIT, DISJOINT_MATCHING, ROWS_COLUMNS, BIPARTITE_MINUS_PM)


def _is_pow2(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class FamilySpec:
    """Which construction to build, with its size knobs.

    half       vertices per side for bipartite_unit (power of two >= 2)
    n_sets     four-vertex groups for disjoint_matching (power of two >= 2)
    cube_n     rows_columns scale: 8**cube_n vertices (>= 1)
    n_half     vertices per side for bipartite_minus_pm (power of two >= 4)
    row_bonus  extra weight on row edges for rows_columns (> 0)
    """

    family: str
    half: int = 0
    n_sets: int = 0
    cube_n: int = 0
    n_half: int = 0
    row_bonus: float = 0.1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GraphError(f"unknown family {self.family!r}")
        if self.family == BIPARTITE_UNIT and not (_is_pow2(self.half) and self.half >= 2):
            raise GraphError("bipartite_unit needs half = power of two >= 2")
        if self.family == DISJOINT_MATCHING and not (
            _is_pow2(self.n_sets) and self.n_sets >= 2
        ):
            raise GraphError("disjoint_matching needs n_sets = power of two >= 2")
        if self.family == ROWS_COLUMNS:
            if self.cube_n < 1:
                raise GraphError("rows_columns needs cube_n >= 1")
            if self.row_bonus <= 0:
                raise GraphError("rows_columns needs row_bonus > 0")
        if self.family == BIPARTITE_MINUS_PM and not (
            _is_pow2(self.n_half) and self.n_half >= 4
        ):
            raise GraphError("bipartite_minus_pm needs n_half = power of two >= 4")

    def n_vertices(self) -> int:
        return {
            BIPARTITE_UNIT: 2 * self.half,
            DISJOINT_MATCHING: 4 * self.n_sets,
            ROWS_COLUMNS: 8 ** self.cube_n,
            BIPARTITE_MINUS_PM: 2 * self.n_half,
        }[self.family]

    def params(self) -> dict:
        out = {"family": self.family}
        for key in ("half", "n_sets", "cube_n", "n_half"):
            if getattr(self, key):
                out[key] = getattr(self, key)
        if self.family == ROWS_COLUMNS:
            out["row_bonus"] = self.row_bonus
        return out


def generate(spec: FamilySpec) -> WeightedGraph:
    """Build the family's weighted graph (non-edges zero-filled)."""
    if spec.family == BIPARTITE_UNIT:
        h = spec.half
        w = np.zeros((2 * h, 2 * h))
        w[:h, h:] = 1.0
        w[h:, :h] = 1.0
        return WeightedGraph(w, SIMILARITY)
    if spec.family == DISJOINT_MATCHING:
        n = 4 * spec.n_sets
        w = np.zeros((n, n))
        for s in range(spec.n_sets):
            w[4 * s, 4 * s + 3] = w[4 * s + 3, 4 * s] = 1.0
            w[4 * s + 1, 4 * s + 2] = w[4 * s + 2, 4 * s + 1] = 1.0
        return WeightedGraph(w, DISSIMILARITY)
    if spec.family == ROWS_COLUMNS:
        cols = 2 ** spec.cube_n
        col_size = 4 ** spec.cube_n
        n = cols * col_size
        col_of = np.arange(n) // col_size
        row_of = np.arange(n) % col_size
        w = np.zeros((n, n))
        w[col_of[:, None] == col_of[None, :]] = 1.0
        w[row_of[:, None] == row_of[None, :]] = 1.0 + spec.row_bonus
        np.fill_diagonal(w, 0.0)
        return WeightedGraph(w, SIMILARITY)
    # bipartite_minus_pm: sides interleaved (a_i = 2i, b_i = 2i + 1) so the
    # lexicographic tie-break picks the removed zero matching first
    nh = spec.n_half
    n = 2 * nh
    w = np.zeros((n, n))
    evens = np.arange(0, n, 2)
    odds = np.arange(1, n, 2)
    w[np.ix_(evens, odds)] = 1.0
    w[np.ix_(odds, evens)] = 1.0
    for i in range(nh):
        w[2 * i, 2 * i + 1] = w[2 * i + 1, 2 * i] = 0.0
    return WeightedGraph(w, DISSIMILARITY)


def _parallel_balanced(builder: DendrogramBuilder, blocks: list[list[int]]) -> list[int]:
    """Pair consecutive ids inside each block, round by round, to one id each."""
    blocks = [list(b) for b in blocks]
    while any(len(b) > 1 for b in blocks):
        groups = []
        for b in blocks:
            groups.extend([b[i], b[i + 1]] for i in range(0, len(b) - 1, 2))
        new_ids = builder.merge_round(groups)
        pos = 0
        for bi, b in enumerate(blocks):
            pairs = len(b) // 2
            merged = new_ids[pos:pos + pairs]
            pos += pairs
            tail = [b[-1]] if len(b) % 2 else []
            blocks[bi] = merged + tail
    return [b[0] for b in blocks]


def reference_hierarchy(spec: FamilySpec) -> Dendrogram:
    """The comparison hierarchy each construction is scored against."""
    n = spec.n_vertices()
    builder = DendrogramBuilder(n)
    if spec.family == BIPARTITE_UNIT:
        h = spec.half
        ids = builder.merge_round([[i, h + i] for i in range(h)])
        _parallel_balanced(builder, [ids])
        return builder.build()
    if spec.family == DISJOINT_MATCHING:
        side_a = [v for s in range(spec.n_sets) for v in (4 * s, 4 * s + 1)]
        side_b = [v for s in range(spec.n_sets) for v in (4 * s + 2, 4 * s + 3)]
        tops = _parallel_balanced(builder, [side_a, side_b])
        builder.merge_round([tops])
        return builder.build()
    if spec.family == ROWS_COLUMNS:
        col_size = 4 ** spec.cube_n
        cols = 2 ** spec.cube_n
        blocks = [list(range(c * col_size, (c + 1) * col_size)) for c in range(cols)]
        tops = _parallel_balanced(builder, blocks)
        _parallel_balanced(builder, [tops])
        return builder.build()
    evens = list(range(0, n, 2))
    odds = list(range(1, n, 2))
    tops = _parallel_balanced(builder, [evens, odds])
    builder.merge_round([tops])
    return builder.build()


def affinity_policy(spec: FamilySpec) -> TieBreakPolicy:
    """The tie-break that reproduces the family's worst-case component run."""
    if spec.family == BIPARTITE_UNIT:
        h = spec.half
        prefs = {0: (h + 1,), h: (1,)}
        for l in range(1, h):
            prefs[l] = (h,)
        for r in range(h + 1, 2 * h):
            prefs[r] = (0,)
        return TieBreakPolicy(
            kind=ADVERSARIAL_HUB,
            hubs=(0, h),
            preferences=tuple(sorted((k, v) for k, v in prefs.items())),
        )
    if spec.family == DISJOINT_MATCHING:
        prefs = {}
        for s in range(spec.n_sets):
            prefs[4 * s] = (4 * s + 1, 4 * s + 2)
            prefs[4 * s + 1] = (4 * s,)
            prefs[4 * s + 2] = (4 * s + 3, 4 * s)
            prefs[4 * s + 3] = (4 * s + 2,)
        return TieBreakPolicy(
            kind=ADVERSARIAL_HUB,
            hubs=tuple(4 * s for s in range(spec.n_sets)),
            preferences=tuple(sorted((k, v) for k, v in prefs.items())),
        )
    return TieBreakPolicy()


@dataclass(frozen=True)
class AdversarialReport:
    family: str
    params: dict
    objective: str
    affinity_score: float
    reference_score: float
    ratio: float
    affinity_levels: int

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": self.params,
            "objective": self.objective,
            "affinity_score": self.affinity_score,
            "reference_score": self.reference_score,
            "ratio": self.ratio,
            "affinity_levels": self.affinity_levels,
        }


def adversarial_affinity_run(spec: FamilySpec) -> tuple[Dendrogram, AdversarialReport]:
    """Run the component-merge baseline under the family's adversarial policy.

    Scores the run against the reference hierarchy on the orientation's
    objective and reports the ratio.
    """
    graph = generate(spec)
    policy = affinity_policy(spec)
    mode = MODE_MAX if graph.orientation == SIMILARITY else MODE_MIN
    dendro, ledger = affinity_boruvka(graph, mode, policy)
    ref = reference_hierarchy(spec)
    if graph.orientation == SIMILARITY:
        objective = "revenue"
        got, want = revenue(graph, dendro), revenue(graph, ref)
    else:
        objective = "value"
        got, want = value(graph, dendro), value(graph, ref)
    ratio = got / want if want else float("inf")
    report = AdversarialReport(
        family=spec.family,
        params=spec.params(),
        objective=objective,
        affinity_score=got,
        reference_score=want,
        ratio=ratio,
        affinity_levels=ledger.levels,
    )
    return dendro, report
