"""Exception hierarchy shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


# --- dataset ingestion ---

class MalformedRecord(ToolkitError):
    """A row/record is structurally invalid (missing fields, bad label, illegal characters)."""


class DuplicateId(ToolkitError):
    """An example id occurs more than once within one dataset."""


class EmptyDataset(ToolkitError):
    """A dataset file parsed to zero examples."""


# --- run configuration ---

class UnknownBackbone(ToolkitError):
    """No registered defaults or adapter for the requested backbone."""


class DuplicateSeed(ToolkitError):
    """A campaign seed list contains repeated values."""


# --- training ---

class UnlabeledDataset(ToolkitError):
    """An operation that needs gold labels received an unlabeled split."""


class AdapterFailure(ToolkitError):
    """A backbone adapter raised during training, evaluation, or prediction."""


class MissingCheckpoint(ToolkitError):
    """A run's persisted checkpoint cannot be found or loaded."""


class CampaignAborted(ToolkitError):
    """One seed of a campaign failed; carries the partial results.

    Attributes:
        completed: TrainedRun list for the seeds that finished before the failure.
        failed_seed: the seed whose iteration raised.
        cause: the underlying exception.
    """

    def __init__(self, message, completed, failed_seed, cause):
        super().__init__(message)
        self.completed = completed
        self.failed_seed = failed_seed
        self.cause = cause


# --- hyperparameter search ---

class EmptySpace(ToolkitError):
    """A search space has no valid points (bad bounds or empty choice set)."""


class AllTrialsFailed(ToolkitError):
    """Every trial of a search failed; no best configuration exists."""


# --- ensembling ---

class MisalignedMembers(ToolkitError):
    """Member prediction sets differ in split, ids, or order."""


class EvenMembershipWithRequireOdd(ToolkitError):
    """An even member count was given under the require-odd tie policy."""


class UnknownRun(ToolkitError):
    """A run or ensemble id is not present in the registry."""


class MissingPredictions(ToolkitError):
    """A registry entry has no stored predictions for the requested split."""


# --- evaluation ---

class MisalignedPredictions(ToolkitError):
    """Prediction ids do not match the gold dataset's ids in order."""


class UnlabeledGold(ToolkitError):
    """Evaluation was requested against a split without gold labels."""


# --- command line ---

class ConfigError(ToolkitError):
    """A project configuration file is missing, unreadable, or invalid."""
