"""Vertical federated PCA and kernel PCA: single-machine simulator library."""

from .linalg import (
    EigenPair,
    ZeroImageError,
    canonical_sign,
    canonical_unit,
    gram_matrix,
    power_iteration,
    rayleigh_quotient,
    sin_angle,
    top_k_eigen_oracle,
    unit,
)
from .kernels import (
    KernelSpec,
    akpca,
    center_kernel,
    kernel_eigs,
    kernel_matrix,
    kernel_value,
    kpca_transform,
    median_heuristic_gamma,
    resolve_gamma,
)
from .topology import TopologyGraph, complete_graph, neighbors, ring_graph, round_message_count, star_graph
from .dataio import (
    PartitionPlan,
    load_csv,
    load_pgm,
    partition_features,
    standardize_columns,
    synth_mixture_gaussian,
    synth_single_gaussian,
    write_csv,
    write_pgm,
)
from .metrics import KMeansResult, RoundRecord, RunTrace, distance_error, kmeans, record_round
from .federation import (
    ClientState,
    FederationConfig,
    compute_weights,
    local_round,
    local_update,
    make_clients,
    merge,
    random_unit_vector,
    run_decentralized,
    run_server_client,
    sign_align,
    weight_scaled_coefficients,
    weight_scaled_merge,
)

__version__ = "0.1.0"

__all__ = [
    "EigenPair",
    "ZeroImageError",
    "canonical_sign",
    "canonical_unit",
    "gram_matrix",
    "power_iteration",
    "rayleigh_quotient",
    "sin_angle",
    "top_k_eigen_oracle",
    "unit",
    "KernelSpec",
    "akpca",
    "center_kernel",
    "kernel_eigs",
    "kernel_matrix",
    "kernel_value",
    "kpca_transform",
    "median_heuristic_gamma",
    "resolve_gamma",
    "TopologyGraph",
    "complete_graph",
    "neighbors",
    "ring_graph",
    "round_message_count",
    "star_graph",
    "PartitionPlan",
    "load_csv",
    "load_pgm",
    "partition_features",
    "standardize_columns",
    "synth_mixture_gaussian",
    "synth_single_gaussian",
    "write_csv",
    "write_pgm",
    "KMeansResult",
    "RoundRecord",
    "RunTrace",
    "distance_error",
    "kmeans",
    "record_round",
    "ClientState",
    "FederationConfig",
    "compute_weights",
    "local_round",
    "local_update",
    "make_clients",
    "merge",
    "random_unit_vector",
    "run_decentralized",
    "run_server_client",
    "sign_align",
    "weight_scaled_coefficients",
    "weight_scaled_merge",
    "__version__",
]
