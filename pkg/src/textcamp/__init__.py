"""Multi-seed fine-tuning campaigns, hard majority-vote ensembles, and random
hyperparameter search for binary text classification.

The pieces compose left to right: load a :class:`LabeledDataset`, describe a
run with :class:`RunConfig`, train a :class:`Campaign` of seeds through a
:class:`BackboneAdapter` into a :class:`RunRegistry`, combine the runs with
:func:`build_ensemble`, and score any system with the functions in
:mod:`textcamp.metrics`.
"""

from .adapters import (
    AdapterCapabilities,
    BackboneAdapter,
    ScriptedStubAdapter,
    TinyTrainableAdapter,
    adapter_class,
    register_adapter,
    resolve_adapter,
)
from .corpus import DatasetSummary, Example, LabeledDataset, load_dataset, summarize, write_dataset
from .ensemble import EnsembleModel, PredictionSet, TiePolicy, build_ensemble, majority_vote
from .errors import (
    AdapterFailure,
    AllTrialsFailed,
    CampaignAborted,
    ConfigError,
    DuplicateId,
    DuplicateSeed,
    EmptyDataset,
    EmptySpace,
    EvenMembershipWithRequireOdd,
    MalformedRecord,
    MisalignedMembers,
    MisalignedPredictions,
    MissingCheckpoint,
    MissingPredictions,
    ToolkitError,
    UnknownBackbone,
    UnknownRun,
    UnlabeledDataset,
    UnlabeledGold,
)
from .hpo import SearchResult, SearchSpace, Trial, TrialStatus, execute_search, generate_trials
from .metrics import (
    ClassificationMetrics,
    ComparisonReport,
    ConfusionMatrix,
    ReportRow,
    RunStatistics,
    comparison_report,
    confusion_matrix,
    precision_recall_f1,
    render_confusion,
    render_report_markdown,
    run_statistics,
)
from .registry import RunRegistry, make_run_id, read_predictions_tsv, write_predictions_tsv
from .runspec import (
    BERTWEET_LARGE,
    BIOLINKBERT_LARGE,
    DEFAULT_CAMPAIGN_SEEDS,
    ROBERTA_LARGE,
    SCRIPTED_STUB,
    TINY_BOW,
    BackboneId,
    Hyperparameters,
    RegimeSettings,
    RunConfig,
    campaign_configs,
    config_fingerprint,
    default_hyperparameters,
    register_backbone_defaults,
)
from .trainer import Campaign, EpochRecord, TrainedRun, predict, run_campaign, run_iteration, select_best_epoch

__version__ = "0.1.0"

__all__ = [
    "AdapterCapabilities",
    "AdapterFailure",
    "AllTrialsFailed",
    "BackboneAdapter",
    "BackboneId",
    "BERTWEET_LARGE",
    "BIOLINKBERT_LARGE",
    "Campaign",
    "CampaignAborted",
    "ClassificationMetrics",
    "ComparisonReport",
    "ConfigError",
    "ConfusionMatrix",
    "DatasetSummary",
    "DEFAULT_CAMPAIGN_SEEDS",
    "DuplicateId",
    "DuplicateSeed",
    "EmptyDataset",
    "EmptySpace",
    "EnsembleModel",
    "EpochRecord",
    "EvenMembershipWithRequireOdd",
    "Example",
    "Hyperparameters",
    "LabeledDataset",
    "MalformedRecord",
    "MisalignedMembers",
    "MisalignedPredictions",
    "MissingCheckpoint",
    "MissingPredictions",
    "PredictionSet",
    "RegimeSettings",
    "ReportRow",
    "ROBERTA_LARGE",
    "RunConfig",
    "RunRegistry",
    "RunStatistics",
    "ScriptedStubAdapter",
    "SCRIPTED_STUB",
    "SearchResult",
    "SearchSpace",
    "TiePolicy",
    "TinyTrainableAdapter",
    "TINY_BOW",
    "ToolkitError",
    "TrainedRun",
    "Trial",
    "TrialStatus",
    "UnknownBackbone",
    "UnknownRun",
    "UnlabeledDataset",
    "UnlabeledGold",
    "adapter_class",
    "build_ensemble",
    "campaign_configs",
    "comparison_report",
    "config_fingerprint",
    "confusion_matrix",
    "default_hyperparameters",
    "execute_search",
    "generate_trials",
    "load_dataset",
    "majority_vote",
    "make_run_id",
    "precision_recall_f1",
    "predict",
    "read_predictions_tsv",
    "register_adapter",
    "register_backbone_defaults",
    "render_confusion",
    "render_report_markdown",
    "resolve_adapter",
    "run_campaign",
    "run_iteration",
    "run_statistics",
    "select_best_epoch",
    "summarize",
    "write_dataset",
    "write_predictions_tsv",
]
