"""Matching-based hierarchical clustering with exact objective evaluators."""

from .graph_core import (
    DISSIMILARITY,
    SIMILARITY,
    Clustering,
    ClusteringGraph,
    GraphError,
    WeightedGraph,
    average_linkage,
    build_clustering_graph,
    coarsen,
    load_graph,
)
from .hierarchy import (
    Dendrogram,
    DendrogramBuilder,
    extract_k_clustering,
    levels,
    validate,
)
from .matching_engine import (
    EngineChoice,
    EngineInfeasibleError,
    Matching,
    MatchingError,
    exact_max_matching,
    greedy_matching,
    k_sized_max_matching,
    local_search_matching,
    max_perfect_matching,
    min_k_sized_matching,
    min_perfect_matching,
)
from .objectives import (
    ObjectiveReport,
    clustering_cost,
    clustering_revenue,
    dasgupta_cost,
    merge_cost,
    merge_revenue,
    objective_report,
    revenue,
    value,
)
from .clusterers import (
    RoundLedger,
    TieBreakPolicy,
    affinity_boruvka,
    average_linkage_clusterer,
    matching_affinity,
    random_divisive,
)
from .adversarial import FamilySpec, adversarial_affinity_run, generate, reference_hierarchy
from .evaluation import (
    LabeledDataset,
    balance_ratio,
    bundled_datasets,
    evaluate_grid,
    filter_balanced_pow2,
    graph_from_vectors,
    load_dataset,
    rand_index,
)

__version__ = "0.1.0"
