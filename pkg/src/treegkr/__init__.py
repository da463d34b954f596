"""Exact GKR (unbalanced optimal transport) distances on tree metrics."""
from .errors import (
    BadKappa,
    BadNodeId,
    CycleDetected,
    DimensionMismatch,
    Disconnected,
    DuplicateEdge,
    EmptyAnchorSet,
    EmptyClouds,
    EmptyTrainingSet,
    GkrError,
    Infeasible,
    InvalidTree,
    NegativeWeight,
    ParseError,
    TooFewLeaves,
    TooLarge,
    UnbalancedMeasures,
    ZeroEuclideanDistance,
)
from .gkr import (
    Coupling,
    GkrResult,
    PartialTransportResult,
    boundary_params,
    effective_costs,
    gkr_coupling,
    gkr_distance,
    kr_params,
    optimal_partial_transport,
    tree_wasserstein,
)
from .oracle import (
    FlowNetwork,
    build_augmented_network,
    euclidean_gkr_exact,
    gkr_oracle,
    mcmf_gkr,
    partial_transport_oracle,
)
from .pwl import ConvexPLF, plf_convolve, plf_eval, plf_extend, plf_leaf, plf_min, plf_segment_count
from .quadtree import (
    PointCloud,
    QuadtreeBuild,
    build_quadtree,
    fit_metric_scale_ternary,
    fit_scale_ternary,
    scale_heuristic,
)
from .tree import (
    CostParams,
    Tree,
    check_condition2,
    distance_matrix,
    preprocess,
    tree_distance,
    validate_tree,
)

__version__ = "0.1.0"
