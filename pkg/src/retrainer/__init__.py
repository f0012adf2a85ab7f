"""Cost-aware retraining decisions for classifiers on batched streams.

The package answers one operational question: given streams of labeled data
batches and prediction queries, when is retraining the deployed model worth
its cost? It prices the alternatives (query-weighted staleness vs. a
retraining charge), finds the retrospectively optimal decision sequence by
dynamic programming, runs online decision policies against the same costs,
and evaluates everything prequentially.
"""

from .costmatrix import (
    CostMatrix,
    Strategy,
    StreamCosts,
    build_cost_matrix,
    cumulative_cost_trace,
    strategy_cost,
    validate_strategy,
)
from .datagen import StreamSpec, concept_label, gen_batch, generate_stream, make_queries
from .detectors import AdwinDetector, DdmDetector
from .errors import (
    ContractViolationError,
    InvalidInputError,
    NotFittedError,
    StreamParseError,
    UndefinedMetricError,
)
from .harness import (
    PolicySpec,
    RunConfig,
    RunResult,
    evaluate_prequential,
    load_csv_stream,
    render_summary,
    report,
    results_from_csv,
    results_to_csv,
    run_sweep,
    save_stream_csv,
    scpe,
    summary_to_csv,
)
from .models import ForestClassifier, LogisticClassifier, fit_model, make_model, predict_one
from .oracle import DPTable, OracleRetrains, expand_to_strategy, memoize_dp, oracle_retrains, oracle_strategy
from .policies import (
    AdwinPolicy,
    CumulativeThresholdPolicy,
    Decision,
    DdmPolicy,
    MarkovPolicy,
    NeverRetrainPolicy,
    PeriodicPolicy,
    RetrainPolicy,
    ThresholdPolicy,
    make_policy,
    optimize_offline,
    replay_policy,
    run_policy,
)
from .staleness import (
    KernelConfig,
    default_gamma,
    query_staleness,
    rbf_similarity,
    relative_staleness,
    staleness_total,
    zero_one_loss,
)
from .streams import DataBatch, QueryBatch

__version__ = "0.1.0"

__all__ = [
    "AdwinDetector",
    "AdwinPolicy",
    "ContractViolationError",
    "CostMatrix",
    "CumulativeThresholdPolicy",
    "DPTable",
    "DataBatch",
    "DdmDetector",
    "DdmPolicy",
    "Decision",
    "ForestClassifier",
    "InvalidInputError",
    "KernelConfig",
    "LogisticClassifier",
    "MarkovPolicy",
    "NeverRetrainPolicy",
    "NotFittedError",
    "OracleRetrains",
    "PeriodicPolicy",
    "PolicySpec",
    "QueryBatch",
    "RetrainPolicy",
    "RunConfig",
    "RunResult",
    "StreamCosts",
    "StreamParseError",
    "StreamSpec",
    "Strategy",
    "ThresholdPolicy",
    "UndefinedMetricError",
    "build_cost_matrix",
    "concept_label",
    "cumulative_cost_trace",
    "default_gamma",
    "evaluate_prequential",
    "expand_to_strategy",
    "fit_model",
    "gen_batch",
    "generate_stream",
    "load_csv_stream",
    "make_model",
    "make_policy",
    "make_queries",
    "memoize_dp",
    "optimize_offline",
    "oracle_retrains",
    "oracle_strategy",
    "predict_one",
    "query_staleness",
    "rbf_similarity",
    "relative_staleness",
    "render_summary",
    "replay_policy",
    "report",
    "results_from_csv",
    "results_to_csv",
    "run_policy",
    "run_sweep",
    "save_stream_csv",
    "scpe",
    "staleness_total",
    "strategy_cost",
    "summary_to_csv",
    "validate_strategy",
    "zero_one_loss",
]
