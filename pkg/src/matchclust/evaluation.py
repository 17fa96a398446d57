"""Labelled datasets, feature-vector graphs, filtering, and quality metrics."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .clusterers import (
    MODE_MAX,
    MODE_MIN,
    TieBreakPolicy,
    affinity_boruvka,
    average_linkage_clusterer,
    matching_affinity,
    random_divisive,
)
from .graph_core import DISSIMILARITY, SIMILARITY, Clustering, GraphError, WeightedGraph
from .hierarchy import extract_k_clustering
from .matching_engine import EngineChoice

COSINE = "cosine_similarity"
L2 = "l2_distance"

DEFAULT_ALGORITHMS = (
    "matching-affinity-max",
    "matching-affinity-min",
    "affinity",
    "average-linkage",
    "random",
)

RESULT_COLUMNS = ("dataset", "algorithm", "mode", "engine", "k",
                  "rand_index", "balance_ratio", "seed")


class DatasetError(ValueError):
    """Malformed dataset input."""


@dataclass(frozen=True)
class LabeledDataset:
    vectors: np.ndarray
    labels: tuple[str, ...]
    name: str = "dataset"

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DatasetError(f"vectors must be a non-empty 2-d array, got {v.shape}")
        if len(self.labels) != v.shape[0]:
            raise DatasetError("labels must match the number of rows")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "labels", tuple(str(l) for l in self.labels))

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def classes(self) -> list[str]:
        return sorted(set(self.labels))

    def class_counts(self) -> dict[str, int]:
        return dict(Counter(self.labels))


def load_dataset(path: str | Path, name: str | None = None) -> LabeledDataset:
    """Read `feature,...,feature,label` CSV rows; a header row is skipped.

    The last column is the class label; every other column must be numeric.
    Parse errors name the offending line.
    """
    path = Path(path)
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((lineno, [f.strip() for f in line.split(",")]))
    if not rows:
        raise DatasetError(f"{path}: empty dataset")
    width = len(rows[0][1])
    if width < 2:
        raise DatasetError(f"{path}: line {rows[0][0]}: need at least one feature and a label")

    def numeric(fields: list[str]) -> bool:
        try:
            [float(x) for x in fields[:-1]]
            return True
        except ValueError:
            return False

    start = 0
    if not numeric(rows[0][1]):
        start = 1  # header row
    vectors = []
    labels = []
    for lineno, fields in rows[start:]:
        if len(fields) != width:
            raise DatasetError(f"{path}: line {lineno}: expected {width} fields, got {len(fields)}")
        try:
            vectors.append([float(x) for x in fields[:-1]])
        except ValueError:
            raise DatasetError(f"{path}: line {lineno}: non-numeric feature value") from None
        labels.append(fields[-1])
    if not vectors:
        raise DatasetError(f"{path}: no data rows after the header")
    return LabeledDataset(np.array(vectors), tuple(labels), name or path.stem)


def ground_truth_clustering(ds: LabeledDataset) -> Clustering:
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(ds.labels):
        by_class.setdefault(lab, []).append(i)
    return Clustering(tuple(tuple(v) for _, v in sorted(by_class.items())))


def rand_index(x: Clustering, y: Clustering) -> float:
    """(agreeing pairs) / (all pairs) between two partitions of one point set."""
    px = sorted(v for c in x.clusters for v in c)
    py = sorted(v for c in y.clusters for v in c)
    if px != py:
        raise DatasetError("clusterings cover different point sets")
    n = len(px)
    if n < 2:
        raise DatasetError("rand index needs at least two points")
    lab_x: dict[int, int] = {v: i for i, c in enumerate(x.clusters) for v in c}
    lab_y: dict[int, int] = {v: i for i, c in enumerate(y.clusters) for v in c}
    joint = Counter((lab_x[v], lab_y[v]) for v in px)
    same_same = sum(c * (c - 1) // 2 for c in joint.values())
    same_x = sum(c * (c - 1) // 2 for c in Counter(lab_x.values()).values())
    same_y = sum(c * (c - 1) // 2 for c in Counter(lab_y.values()).values())
    total = n * (n - 1) // 2
    diff_diff = total - same_x - same_y + same_same
    return (same_same + diff_diff) / total


def balance_ratio(x: Clustering) -> float:
    """Smallest cluster size over largest."""
    sizes = x.sizes()
    return min(sizes) / max(sizes)


def graph_from_vectors(ds: LabeledDataset, kind: str) -> WeightedGraph:
    """Complete graph over the points.

    ``cosine_similarity`` maps cosine c to (1 + c) / 2 so weights land in
    [0, 1]; zero vectors are rejected.  ``l2_distance`` uses Euclidean
    distance with a dissimilarity orientation.
    """
    v = ds.vectors
    if kind == COSINE:
        norms = np.linalg.norm(v, axis=1)
        if np.any(norms == 0.0):
            raise DatasetError("cosine weights are undefined for zero vectors")
        cos = (v @ v.T) / np.outer(norms, norms)
        w = (1.0 + np.clip(cos, -1.0, 1.0)) / 2.0
        w = np.clip((w + w.T) / 2.0, 0.0, 1.0)
        np.fill_diagonal(w, 0.0)
        return WeightedGraph(w, SIMILARITY)
    if kind == L2:
        sq = np.sum(v * v, axis=1)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (v @ v.T), 0.0)
        w = np.sqrt(d2)
        w = (w + w.T) / 2.0
        np.fill_diagonal(w, 0.0)
        return WeightedGraph(w, DISSIMILARITY)
    raise DatasetError(f"unknown weight kind {kind!r}")


def filter_balanced_pow2(ds: LabeledDataset, seed: int) -> LabeledDataset:
    """Subsample to the largest feasible power-of-two size with balanced classes.

    Picks the largest N with ceil(2^N / classes) <= smallest class count,
    splits 2^N into per-class quotas differing by at most one, and samples
    each class uniformly without replacement.  Deterministic per seed.
    """
    counts = ds.class_counts()
    classes = sorted(counts)
    c = len(classes)
    m0 = min(counts.values())
    if m0 == 0:
        raise DatasetError("cannot balance: an empty class")
    n_target = 1
    while True:
        nxt = n_target * 2
        if -(-nxt // c) <= m0:
            n_target = nxt
        else:
            break
    base, extra = divmod(n_target, c)
    quotas = {cls: base + (1 if i < extra else 0) for i, cls in enumerate(classes)}
    rng = np.random.default_rng(seed)
    keep: list[int] = []
    for cls in classes:
        idx = np.array([i for i, lab in enumerate(ds.labels) if lab == cls])
        pick = rng.choice(idx, size=quotas[cls], replace=False)
        keep.extend(int(i) for i in pick)
    keep.sort()
    return LabeledDataset(
        ds.vectors[keep],
        tuple(ds.labels[i] for i in keep),
        name=f"{ds.name}[filtered]",
    )


def quantize_integer_weights(graph: WeightedGraph, scale: int = 10 ** 6) -> WeightedGraph:
    """Round weights to integers at `scale` resolution (keeps orientation)."""
    return WeightedGraph(np.rint(graph.weights * scale), graph.orientation)


def bundled_datasets() -> dict[str, Path]:
    """Name -> path of the labelled CSV files shipped with the package."""
    root = resources.files("matchclust") / "data"
    out = {}
    for entry in sorted(root.iterdir()):
        if entry.name.endswith(".csv"):
            out[entry.name[:-4]] = Path(str(entry))
    return out


def _is_pow2(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


def _run_algorithm(
    algorithm: str,
    ds: LabeledDataset,
    k: int,
    seed: int,
    engine: EngineChoice,
    epsilon: float,
):
    """One grid cell: returns (mode, extracted clustering)."""
    if algorithm == "matching-affinity-max":
        graph = graph_from_vectors(ds, COSINE)
        if not _is_pow2(graph.n):
            graph = quantize_integer_weights(graph)
        dendro, _ = matching_affinity(graph, MODE_MAX, engine, epsilon)
        return MODE_MAX, extract_k_clustering(dendro, k)
    if algorithm == "matching-affinity-min":
        graph = graph_from_vectors(ds, L2)
        dendro, _ = matching_affinity(graph, MODE_MIN, engine, epsilon)
        return MODE_MIN, extract_k_clustering(dendro, k)
    if algorithm == "affinity":
        graph = graph_from_vectors(ds, COSINE)
        dendro, _ = affinity_boruvka(graph, MODE_MAX, TieBreakPolicy())
        return MODE_MAX, extract_k_clustering(dendro, k)
    if algorithm == "average-linkage":
        graph = graph_from_vectors(ds, COSINE)
        dendro = average_linkage_clusterer(graph, MODE_MAX)
        return MODE_MAX, extract_k_clustering(dendro, k)
    if algorithm == "random":
        graph = graph_from_vectors(ds, COSINE)
        dendro = random_divisive(graph, seed)
        return "", extract_k_clustering(dendro, k)
    raise DatasetError(f"unknown algorithm {algorithm!r}")


def evaluate_grid(
    ds: LabeledDataset,
    k: int | None = None,
    seeds=range(50),
    engine: EngineChoice = EngineChoice.parse("greedy"),
    epsilon: float = 0.05,
    filtered: bool = False,
    algorithms=DEFAULT_ALGORITHMS,
    jobs: int = 1,
) -> list[dict]:
    """Score every (algorithm, seed) cell against the ground-truth labels.

    Filtered runs resample the dataset per seed, so every algorithm gets a
    row per seed; on raw data the deterministic algorithms are evaluated
    once (seed column fixed to the first seed).
    """
    seeds = list(seeds)
    if not seeds:
        raise DatasetError("need at least one seed")
    k_eff = k or len(ds.classes())

    def cell(algorithm: str, seed: int) -> dict:
        data = filter_balanced_pow2(ds, seed) if filtered else ds
        mode, clustering = _run_algorithm(algorithm, data, k_eff, seed, engine, epsilon)
        truth = ground_truth_clustering(data)
        return {
            "dataset": data.name,
            "algorithm": algorithm,
            "mode": mode,
            "engine": engine.kind,
            "k": k_eff,
            "rand_index": rand_index(clustering, truth),
            "balance_ratio": balance_ratio(clustering),
            "seed": seed,
        }

    tasks: list[tuple[str, int]] = []
    for algorithm in algorithms:
        if filtered or algorithm == "random":
            tasks.extend((algorithm, s) for s in seeds)
        else:
            tasks.append((algorithm, seeds[0]))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda t: cell(*t), tasks))
    else:
        rows = [cell(*t) for t in tasks]
    rows.sort(key=lambda r: (r["dataset"], r["algorithm"], r["seed"]))
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    """Fixed-order CSV text for grid rows (byte-stable across runs)."""
    lines = [",".join(RESULT_COLUMNS)]
    for r in rows:
        lines.append(
            f"{r['dataset']},{r['algorithm']},{r['mode']},{r['engine']},{r['k']},"
            f"{r['rand_index']:.12g},{r['balance_ratio']:.12g},{r['seed']}"
        )
    return "\n".join(lines) + "\n"
