"""Consensus quality scores for items ranked by heterogeneous, tie-laden
lists: tie-modified Bradley-Terry abilities, adaptive ranking-lasso clusters,
parametric-bootstrap intervals, and tau_x agreement diagnostics."""

from ._version import __version__
from .bootstrap import (
    BootstrapResult,
    FitContext,
    IntervalTable,
    bc_interval,
    bootstrap_estimates,
    bootstrap_intervals,
    interval_table,
    simulate_tally,
)
from .btmle import (
    AbilityEstimate,
    check_connected,
    fit_mle,
    loglik,
    loglik_gradient,
    loglik_hessian,
)
from .errors import (
    AllReplicatesFailedError,
    ConsensusRankError,
    DimensionMismatchError,
    DisconnectedGraphError,
    DivergentEstimateError,
    DuplicateEntryError,
    EmptyPathError,
    EmptySamplesError,
    MissingHeaderError,
    NotConvergedError,
    PipelineError,
    TooFewItemsError,
    UncoveredItemError,
    UnknownGradeError,
    UnknownItemError,
)
from .ingest import (
    Dataset,
    ItemRegistry,
    Manifest,
    ManifestEntry,
    RankingList,
    load_dataset,
    load_manifest,
    parse_ranking_csv,
    ranking_to_csv,
    registry_from_csv,
    validate_against_registry,
)
from .ranklasso import (
    AdaptiveWeights,
    LassoFit,
    LassoPath,
    adaptive_weights,
    compute_lambda_max,
    extract_clusters,
    fit_lasso,
    lasso_path,
    select_aic,
)
from .report import (
    ARTIFACT_ORDER,
    ConsensusReport,
    ReportMeta,
    ReportRow,
    RunOptions,
    bootstrap_artifacts,
    build_artifacts,
    emit_cluster_plot,
    fit_artifacts,
    path_artifacts,
    run_pipeline,
    taux_artifacts,
)
from .tally import (
    ComparisonTally,
    build_tally,
    tally_from_csv,
    tally_summary,
    tally_to_csv,
)
from .taux import TauXMatrix, TauXResult, tau_x, tau_x_matrix, tau_x_pvalue

__all__ = [
    "__version__",
    "ARTIFACT_ORDER",
    "AbilityEstimate",
    "AdaptiveWeights",
    "AllReplicatesFailedError",
    "BootstrapResult",
    "ComparisonTally",
    "ConsensusRankError",
    "ConsensusReport",
    "Dataset",
    "DimensionMismatchError",
    "DisconnectedGraphError",
    "DivergentEstimateError",
    "DuplicateEntryError",
    "EmptyPathError",
    "EmptySamplesError",
    "FitContext",
    "IntervalTable",
    "ItemRegistry",
    "LassoFit",
    "LassoPath",
    "Manifest",
    "ManifestEntry",
    "MissingHeaderError",
    "NotConvergedError",
    "PipelineError",
    "RankingList",
    "ReportMeta",
    "ReportRow",
    "RunOptions",
    "TauXMatrix",
    "TauXResult",
    "TooFewItemsError",
    "UncoveredItemError",
    "UnknownGradeError",
    "UnknownItemError",
    "adaptive_weights",
    "bc_interval",
    "bootstrap_artifacts",
    "bootstrap_estimates",
    "bootstrap_intervals",
    "build_artifacts",
    "build_tally",
    "check_connected",
    "compute_lambda_max",
    "emit_cluster_plot",
    "extract_clusters",
    "fit_artifacts",
    "fit_lasso",
    "fit_mle",
    "interval_table",
    "lasso_path",
    "load_dataset",
    "load_manifest",
    "loglik",
    "loglik_gradient",
    "loglik_hessian",
    "parse_ranking_csv",
    "path_artifacts",
    "ranking_to_csv",
    "registry_from_csv",
    "run_pipeline",
    "select_aic",
    "simulate_tally",
    "tally_from_csv",
    "tally_summary",
    "tally_to_csv",
    "tau_x",
    "tau_x_matrix",
    "tau_x_pvalue",
    "taux_artifacts",
    "validate_against_registry",
]
