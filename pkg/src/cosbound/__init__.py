"""Triangle-inequality bounds for cosine similarity and exact bound-pruned search."""

from .analysis import (
    GridReport,
    GridSpec,
    StabilityReport,
    average_report,
    difference_surface,
    ordering_violation_count,
    read_surface_csv,
    stability_report,
    surface,
    write_report_csv,
    write_surface_csv,
)
from .bench import BenchConfig, BenchReport, SubjectResult, format_report, run_bench, write_bench_csv
from .bounds import (
    BoundKind,
    SimInterval,
    best_case_similarity,
    lower_bound,
    upper_bound,
    worst_case_similarity,
)
from .errors import (
    BadK,
    BadPivotCount,
    ChecksumMismatch,
    CosboundError,
    DataFormatError,
    DimensionMismatch,
    DomainError,
    EmptyDataset,
    NonFinite,
    ZeroVector,
)
from .index import (
    Dataset,
    OracleCheckReport,
    PivotTable,
    QueryStats,
    VpNode,
    VpTree,
    audit_pivot_table,
    audit_vp_tree,
    laesa_build,
    laesa_knn_query,
    laesa_range_query,
    linear_scan,
    oracle_check,
    subtree_ids,
    vp_build,
    vp_knn_query,
    vp_range_query,
)
from .io import load_dense, load_sparse, parse_dense_line, parse_sparse_line
from .storage import dataset_checksum, index_to_jsonable, load_index, save_index
from .vectors import (
    DenseVector,
    DistanceKind,
    SparseVector,
    UnitVector,
    clamp_similarity,
    cosine_similarity,
    normalize,
    similarity_to_distance,
)

__version__ = "0.1.0"

__all__ = [
    "BadK",
    "BadPivotCount",
    "BenchConfig",
    "BenchReport",
    "BoundKind",
    "ChecksumMismatch",
    "CosboundError",
    "DataFormatError",
    "Dataset",
    "DenseVector",
    "DimensionMismatch",
    "DistanceKind",
    "DomainError",
    "EmptyDataset",
    "GridReport",
    "GridSpec",
    "NonFinite",
    "OracleCheckReport",
    "PivotTable",
    "QueryStats",
    "SimInterval",
    "SparseVector",
    "StabilityReport",
    "SubjectResult",
    "UnitVector",
    "VpNode",
    "VpTree",
    "ZeroVector",
    "audit_pivot_table",
    "audit_vp_tree",
    "average_report",
    "best_case_similarity",
    "clamp_similarity",
    "cosine_similarity",
    "dataset_checksum",
    "difference_surface",
    "format_report",
    "index_to_jsonable",
    "laesa_build",
    "laesa_knn_query",
    "laesa_range_query",
    "linear_scan",
    "load_dense",
    "load_index",
    "load_sparse",
    "lower_bound",
    "normalize",
    "oracle_check",
    "ordering_violation_count",
    "parse_dense_line",
    "parse_sparse_line",
    "read_surface_csv",
    "run_bench",
    "save_index",
    "similarity_to_distance",
    "stability_report",
    "subtree_ids",
    "surface",
    "upper_bound",
    "vp_build",
    "vp_knn_query",
    "vp_range_query",
    "worst_case_similarity",
    "write_bench_csv",
    "write_report_csv",
    "write_surface_csv",
]
