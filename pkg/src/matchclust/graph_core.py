"""Dense weighted graphs, average linkage, and clustering-graph coarsening.

A graph is a symmetric non-negative weight table with a declared orientation
(similarity or dissimilarity).  Clusterings partition the vertex set; a
clustering graph is the complete graph over clusters whose edge weights are
the average linkage between clusters.  Padding copies ("phantom" vertices)
are represented as indices >= n that alias the weight row of their origin
vertex and never appear in reported clusterings.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SIMILARITY = "similarity"
DISSIMILARITY = "dissimilarity"
ORIENTATIONS = (SIMILARITY, DISSIMILARITY)


class GraphError(ValueError):
    """Malformed graph, partition, or pairing."""


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric n x n weight table with zero diagonal and an orientation tag.

    The array is frozen after validation; ``max_weight`` caches the largest
    off-diagonal entry.
    """

    weights: np.ndarray
    orientation: str = SIMILARITY

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise GraphError(f"weight table must be square and non-empty, got shape {w.shape}")
        if self.orientation not in ORIENTATIONS:
            raise GraphError(f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}")
        if np.any(np.diag(w) != 0.0):
            raise GraphError("diagonal entries must all be zero")
        if not np.array_equal(w, w.T):
            raise GraphError("weight table must be symmetric")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise GraphError("weights must be finite and non-negative")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_max_weight", float(w.max()) if w.shape[0] > 1 else 0.0)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def max_weight(self) -> float:
        return self._max_weight  # type: ignore[attr-defined]

    def has_integer_weights(self) -> bool:
        return bool(np.array_equal(self.weights, np.rint(self.weights)))

    def total_weight(self) -> float:
        """Sum of w(i, j) over unordered vertex pairs."""
        return float(self.weights.sum()) / 2.0

    def scaled(self, factor: float) -> "WeightedGraph":
        if factor < 0:
            raise GraphError("scale factor must be non-negative")
        return WeightedGraph(self.weights * factor, self.orientation)

    def origin_rows(self, members: Iterable[int]) -> np.ndarray:
        """Map member ids (phantoms included) to base-vertex row indices."""
        idx = np.fromiter(members, dtype=np.int64)
        if idx.size == 0:
            raise GraphError("empty member set")
        if np.any(idx < 0) or np.any(idx >= 2 * self.n):
            raise GraphError("member id out of range")
        return np.where(idx >= self.n, idx - self.n, idx)


@dataclass(frozen=True)
class Clustering:
    """A partition of {0..n-1} into labelled clusters."""

    clusters: tuple[tuple[int, ...], ...]
    level_index: int = 0

    def __post_init__(self):
        norm = tuple(tuple(sorted(c)) for c in self.clusters)
        object.__setattr__(self, "clusters", norm)
        if self.level_index < 0:
            raise GraphError("level_index must be non-negative")
        seen: set[int] = set()
        for c in norm:
            if not c:
                raise GraphError("clusters must be non-empty")
            for v in c:
                if v in seen:
                    raise GraphError(f"vertex {v} appears in more than one cluster")
                seen.add(v)

    @property
    def n(self) -> int:
        return sum(len(c) for c in self.clusters)

    def check_partition_of(self, n: int) -> None:
        members = sorted(v for c in self.clusters for v in c)
        if members != list(range(n)):
            raise GraphError(f"clusters do not partition 0..{n - 1}")

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.clusters)

    def labels(self, n: int | None = None) -> np.ndarray:
        """Per-vertex cluster index array."""
        n = self.n if n is None else n
        out = np.full(n, -1, dtype=np.int64)
        for i, c in enumerate(self.clusters):
            out[list(c)] = i
        return out


@dataclass(frozen=True)
class ClusteringGraph:
    """Complete graph over clusters; edge weights are average linkage.

    ``members`` may contain phantom ids >= base.n.  ``real_sizes`` counts
    base vertices only, ``padded_sizes`` counts phantoms as well.
    """

    base: WeightedGraph
    members: tuple[tuple[int, ...], ...]
    weights: np.ndarray
    level_index: int = 0

    @property
    def k(self) -> int:
        return len(self.members)

    @property
    def real_sizes(self) -> tuple[int, ...]:
        n = self.base.n
        return tuple(sum(1 for v in c if v < n) for c in self.members)

    @property
    def padded_sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.members)

    def real_clusters(self) -> Clustering:
        """Clustering over base vertices only (phantoms dropped)."""
        n = self.base.n
        real = tuple(tuple(v for v in c if v < n) for c in self.members)
        return Clustering(tuple(c for c in real if c), self.level_index)


def average_linkage(graph: WeightedGraph, side_a: Iterable[int], side_b: Iterable[int]) -> float:
    """Mean base-graph weight over all cross pairs of two disjoint vertex sets.

    Phantom ids contribute the weights of their origin vertex but still count
    toward set sizes.
    """
    a = tuple(side_a)
    b = tuple(side_b)
    if not a or not b:
        raise GraphError("average linkage requires two non-empty sets")
    if set(a) & set(b):
        raise GraphError("average linkage requires disjoint sets")
    rows = graph.origin_rows(a)
    cols = graph.origin_rows(b)
    total = float(graph.weights[np.ix_(rows, cols)].sum())
    return total / (len(a) * len(b))


def clustering_graph_from_members(
    graph: WeightedGraph,
    members: Sequence[Sequence[int]],
    level_index: int = 0,
) -> ClusteringGraph:
    """Build the complete cluster graph for explicit member lists.

    Accepts phantom ids; the public entry point for plain partitions is
    :func:`build_clustering_graph`.
    """
    mem = tuple(tuple(sorted(c)) for c in members)
    if not mem or any(not c for c in mem):
        raise GraphError("clusters must be non-empty")
    flat = [v for c in mem for v in c]
    if len(flat) != len(set(flat)):
        raise GraphError("clusters must be disjoint")
    k = len(mem)
    w = np.zeros((k, k), dtype=np.float64)
    rows = [graph.origin_rows(c) for c in mem]
    for i in range(k):
        for j in range(i + 1, k):
            w[i, j] = w[j, i] = graph.weights[np.ix_(rows[i], rows[j])].sum() / (
                len(mem[i]) * len(mem[j])
            )
    return ClusteringGraph(base=graph, members=mem, weights=w, level_index=level_index)


def build_clustering_graph(graph: WeightedGraph, clustering: Clustering) -> ClusteringGraph:
    """Cluster graph for a plain partition of the graph's vertices."""
    clustering.check_partition_of(graph.n)
    return clustering_graph_from_members(graph, clustering.clusters, clustering.level_index)


def coarsen(cg: ClusteringGraph, pairing: Sequence[tuple[int, int]]) -> ClusteringGraph:
    """Merge matched cluster pairs into one cluster each.

    Each new weight is one quarter of the sum of the four weights between the
    constituent subclusters, which equals the padded average linkage when all
    padded sizes agree (enforced here).  Padded sizes double, real sizes add.
    """
    pairs = [tuple(sorted(p)) for p in getattr(pairing, "pairs", pairing)]
    touched = [c for p in pairs for c in p]
    if sorted(touched) != list(range(cg.k)):
        raise GraphError("pairing must be a perfect matching over the clusters")
    sizes = set(cg.padded_sizes)
    if len(sizes) != 1:
        raise GraphError(f"coarsen requires equal padded sizes, got {sorted(sizes)}")
    pairs.sort()
    members = tuple(tuple(sorted(cg.members[a] + cg.members[b])) for a, b in pairs)
    k_new = len(pairs)
    w = np.zeros((k_new, k_new), dtype=np.float64)
    old = cg.weights
    for x in range(k_new):
        ax, bx = pairs[x]
        for y in range(x + 1, k_new):
            ay, by = pairs[y]
            w[x, y] = w[y, x] = 0.25 * (
                old[ax, ay] + old[ax, by] + old[bx, ay] + old[bx, by]
            )
    return ClusteringGraph(
        base=cg.base, members=members, weights=w, level_index=cg.level_index + 1
    )


def _parse_header(lines: list[str]) -> dict[str, str]:
    meta: dict[str, str] = {}
    for line in lines:
        body = line.lstrip("#").strip()
        for part in body.split():
            if "=" in part:
                key, _, val = part.partition("=")
                meta[key.strip()] = val.strip()
    return meta


def load_graph(path: str | Path) -> WeightedGraph:
    """Read a graph from CSV: either `u,v,weight` edge rows or a dense matrix.

    Header comment lines may declare `# orientation=similarity|dissimilarity`,
    `# n=<count>` (edge lists with trailing isolated vertices) and
    `# format=edges|dense`.  Duplicate or self-loop edge rows are rejected;
    unlisted pairs get weight zero.
    """
    path = Path(path)
    header_lines: list[str] = []
    rows: list[list[str]] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            header_lines.append(line)
            continue
        rows.append([f.strip() for f in line.split(",")])
    if not rows:
        raise GraphError(f"{path}: no data rows")
    meta = _parse_header(header_lines)
    orientation = meta.get("orientation", SIMILARITY)
    fmt = meta.get("format")
    if fmt is None:
        if all(len(r) == 3 for r in rows) and len(rows) != 3:
            fmt = "edges"
        elif all(len(r) == len(rows) for r in rows):
            fmt = "dense"
        elif all(len(r) == 3 for r in rows):
            fmt = "edges"
        else:
            raise GraphError(f"{path}: cannot infer format; add '# format=edges|dense'")
    if fmt == "dense":
        try:
            mat = np.array([[float(x) for x in r] for r in rows], dtype=np.float64)
        except ValueError as exc:
            raise GraphError(f"{path}: non-numeric matrix entry ({exc})") from exc
        return WeightedGraph(mat, orientation)
    if fmt != "edges":
        raise GraphError(f"{path}: unknown format {fmt!r}")
    edges: dict[tuple[int, int], float] = {}
    max_idx = -1
    for r in rows:
        if len(r) != 3:
            raise GraphError(f"{path}: edge rows need exactly 3 fields, got {r}")
        try:
            u, v, wt = int(r[0]), int(r[1]), float(r[2])
        except ValueError as exc:
            raise GraphError(f"{path}: bad edge row {r} ({exc})") from exc
        if u == v:
            raise GraphError(f"{path}: self-loop on vertex {u}")
        if u < 0 or v < 0:
            raise GraphError(f"{path}: negative vertex index in {r}")
        key = (min(u, v), max(u, v))
        if key in edges:
            raise GraphError(f"{path}: duplicate edge {key}")
        edges[key] = wt
        max_idx = max(max_idx, u, v)
    n = int(meta["n"]) if "n" in meta else max_idx + 1
    if n <= max_idx:
        raise GraphError(f"{path}: declared n={n} smaller than max vertex index {max_idx}")
    mat = np.zeros((n, n), dtype=np.float64)
    for (u, v), wt in edges.items():
        mat[u, v] = mat[v, u] = wt
    return WeightedGraph(mat, orientation)


def save_graph(graph: WeightedGraph, path: str | Path) -> None:
    """Write a graph as a dense matrix CSV with an orientation header."""
    path = Path(path)
    lines = [f"# orientation={graph.orientation}", "# format=dense"]
    for row in graph.weights:
        lines.append(",".join(f"{x:.12g}" for x in row))
    path.write_text("\n".join(lines) + "\n")
