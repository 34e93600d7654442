"""Weighted trade-network construction and analysis toolkit.

Builds per-year networks from bilateral flow data, symmetrizes and
max-normalizes them, computes binary and weighted node statistics (degree,
strength, average nearest-neighbor degree/strength, binary and weighted
clustering), and runs the distributional analyses used to contrast the
binary with the weighted view of the same network.
"""

from ._version import __version__
from .distributions import (
    SUPPORTED_PAIRS,
    CorrelationPoint,
    DensityEstimate,
    RankSizeCurve,
    TailFit,
    correlation_series,
    fit_tail,
    kde,
    pearson_with_ci,
    rank_size,
    silverman_bandwidth,
)
from .errors import DataError, ValidationError, WnetError
from .graph import (
    DirectedTradeNetwork,
    MatrixDump,
    UndirectedNetwork,
    WeightScheme,
    WeightVariant,
    build_directed,
    dump_matrix,
    load_matrix,
    save_matrix,
    symmetrize,
    symmetry_index,
)
from .ingest import (
    CountryRegistry,
    FlowFormat,
    FlowRecord,
    PanelDataset,
    SizeRecord,
    assemble_panel,
    load_panel,
    parse_flows,
    parse_sizes,
    save_panel,
)
from .pipeline import (
    ANALYSES,
    PipelineConfig,
    ReportBundle,
    compare_views,
    run_pipeline,
)
from .stats import (
    MomentSummary,
    NodeStatsTable,
    annd,
    anns,
    bcc,
    moments,
    node_degree,
    node_stats,
    node_strength,
    wcc,
)

__all__ = [
    "__version__",
    "ANALYSES",
    "SUPPORTED_PAIRS",
    "CorrelationPoint",
    "CountryRegistry",
    "DataError",
    "DensityEstimate",
    "DirectedTradeNetwork",
    "FlowFormat",
    "FlowRecord",
    "MatrixDump",
    "MomentSummary",
    "NodeStatsTable",
    "PanelDataset",
    "PipelineConfig",
    "RankSizeCurve",
    "ReportBundle",
    "SizeRecord",
    "TailFit",
    "UndirectedNetwork",
    "ValidationError",
    "WeightScheme",
    "WeightVariant",
    "WnetError",
    "annd",
    "anns",
    "assemble_panel",
    "bcc",
    "build_directed",
    "compare_views",
    "correlation_series",
    "dump_matrix",
    "fit_tail",
    "kde",
    "load_matrix",
    "load_panel",
    "moments",
    "node_degree",
    "node_stats",
    "node_strength",
    "parse_flows",
    "parse_sizes",
    "pearson_with_ci",
    "rank_size",
    "run_pipeline",
    "save_matrix",
    "save_panel",
    "silverman_bandwidth",
    "symmetrize",
    "symmetry_index",
    "wcc",
]
