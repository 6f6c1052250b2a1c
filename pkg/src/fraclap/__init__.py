"""Galerkin assembly of the integral fractional Laplacian and hierarchical
low-rank compression of the inverse stiffness matrix."""

from .assembly import (
    FracParams,
    QuadratureSpec,
    assemble_stiffness,
    complement_weight,
    load_vector,
    normalization_constant,
)
from .cluster import (
    BlockPartition,
    BoundingBox,
    ClusterTree,
    build_cluster_tree,
    build_partition,
    is_admissible,
    sparsity_constant,
)
from .hmatrix import (
    HMatrix,
    approximation_error,
    block_singular_values,
    compress,
    hmatvec,
    storage_bytes,
)
from .linalg import LowRankFactor, lu_invert, power_norm2, svd, truncated_svd
from .mesh import Mesh, interval_mesh, lshape_mesh, refine, support_box, unit_square_mesh
from .oracle import entry_oracle
from .study import StudyConfig, StudyRecord, fit_exponential, run_study

__all__ = [
    "BlockPartition",
    "BoundingBox",
    "ClusterTree",
    "FracParams",
    "HMatrix",
    "LowRankFactor",
    "Mesh",
    "QuadratureSpec",
    "StudyConfig",
    "StudyRecord",
    "approximation_error",
    "assemble_stiffness",
    "block_singular_values",
    "build_cluster_tree",
    "build_partition",
    "complement_weight",
    "compress",
    "entry_oracle",
    "fit_exponential",
    "hmatvec",
    "interval_mesh",
    "is_admissible",
    "load_vector",
    "lshape_mesh",
    "lu_invert",
    "normalization_constant",
    "power_norm2",
    "refine",
    "run_study",
    "sparsity_constant",
    "storage_bytes",
    "support_box",
    "svd",
    "truncated_svd",
    "unit_square_mesh",
]

__version__ = "0.1.0"
