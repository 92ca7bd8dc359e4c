"""Fine-tuning iterations: per-epoch validation scores, best-epoch selection.

One iteration trains for a fixed number of epochs, records positive-class
validation scores at the end of each epoch, and keeps the checkpoint of
the single best epoch (highest F1, earliest epoch on ties). A campaign is
a set of iterations that share everything except the seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from .adapters import BackboneAdapter, adapter_class
from .corpus import LabeledDataset
from .ensemble import EnsembleModel, PredictionSet, majority_vote
from .errors import (
    AdapterFailure,
    CampaignAborted,
    ToolkitError,
    UnlabeledDataset,
)
from .registry import RunRegistry
from .runspec import RunConfig, campaign_configs, config_fingerprint

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochRecord:
    """Positive-class validation scores recorded at the end of one epoch."""

    epoch_index: int
    f1_positive: float
    precision_positive: float
    recall_positive: float

    def __post_init__(self):
        if self.epoch_index < 1:
            raise ValueError("epoch_index is 1-based")
        for name in ("f1_positive", "precision_positive", "recall_positive"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v!r}")


def select_best_epoch(records: Sequence[EpochRecord]) -> int:
    """Epoch with the maximal positive-class F1; ties break to the earliest."""
    if not records:
        raise ValueError("no epoch records to select from")
    best = records[0]
    for r in records[1:]:
        if r.f1_positive > best.f1_positive:
            best = r
    return best.epoch_index


@dataclass(frozen=True)
class TrainedRun:
    """One completed iteration: epoch log, selected epoch, checkpoint handle."""

    run_id: str
    config: RunConfig
    epoch_records: tuple[EpochRecord, ...]
    best_epoch: int
    checkpoint: Path
    validation_predictions: PredictionSet

    def __post_init__(self):
        object.__setattr__(self, "epoch_records", tuple(self.epoch_records))
        if self.best_epoch != select_best_epoch(self.epoch_records):
            raise ValueError(
                f"best_epoch={self.best_epoch} does not maximize F1 with "
                f"earliest-epoch tie-breaking"
            )

    @property
    def best_f1(self) -> float:
        return self.epoch_records[self.best_epoch - 1].f1_positive


@dataclass(frozen=True)
class Campaign:
    """Runs that share (backbone, hyperparameters, regime), one per seed."""

    runs: tuple[TrainedRun, ...]
    shared_config_hash: str

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple(self.runs))
        for run in self.runs:
            if config_fingerprint(run.config) != self.shared_config_hash:
                raise ValueError(f"run {run.run_id} does not share the campaign config")

    @property
    def best_f1s(self) -> tuple[float, ...]:
        return tuple(run.best_f1 for run in self.runs)


def _guard(what: str, fn, *args):
    """Run an adapter callable, converting its failures into AdapterFailure."""
    try:
        return fn(*args)
    except ToolkitError:
        raise
    except Exception as exc:
        raise AdapterFailure(f"adapter failed during {what}: {exc!r}") from exc


def run_iteration(
    config: RunConfig,
    train: LabeledDataset,
    validation: LabeledDataset,
    adapter: BackboneAdapter,
    registry: RunRegistry,
) -> TrainedRun:
    """Train one iteration and persist it to the registry.

    Trains for ``config.regime.epochs_per_iteration`` epochs, evaluating the
    validation split after each. The checkpoint and validation predictions
    kept on the run come from the best epoch, not the final one.

    Raises:
        UnlabeledDataset: train or validation carries no labels.
        AdapterFailure: the adapter raised; no retry is attempted, since a
            silent retry would break the determinism contract.
    """
    if not train.labeled:
        raise UnlabeledDataset("training split must be labeled")
    if not validation.labeled:
        raise UnlabeledDataset("validation split must be labeled")

    run_id, run_dir = registry.prepare_run(config)
    checkpoint_dir = run_dir / "checkpoint"
    epochs = config.regime.epochs_per_iteration
    validation_texts = [ex.text for ex in validation.examples]

    session = _guard("session start", adapter.start, config, train)
    records: list[EpochRecord] = []
    best_f1 = float("-inf")
    best_epoch = 0
    best_labels: Optional[list[int]] = None

    for epoch in range(1, epochs + 1):
        _guard(f"epoch {epoch} training", session.train_epoch)
        f1, precision, recall = _guard(f"epoch {epoch} evaluation", session.evaluate, validation)
        records.append(EpochRecord(epoch, f1, precision, recall))
        if f1 > best_f1:  # strict: ties keep the earlier epoch
            best_f1 = f1
            best_epoch = epoch
            _guard(f"epoch {epoch} checkpoint", session.save_checkpoint, checkpoint_dir)
            best_labels = _guard(f"epoch {epoch} prediction", session.predict, validation_texts)
            if len(best_labels) != len(validation):
                raise AdapterFailure(
                    f"adapter returned {len(best_labels)} predictions for "
                    f"{len(validation)} validation examples"
                )

    predictions = PredictionSet(
        source_id=run_id,
        split_name=validation.split_name,
        labels=tuple(best_labels),
        example_ids=validation.ids,
    )
    run = TrainedRun(
        run_id=run_id,
        config=config,
        epoch_records=tuple(records),
        best_epoch=best_epoch,
        checkpoint=checkpoint_dir,
        validation_predictions=predictions,
    )
    effective_mp = (
        config.regime.mixed_precision and adapter.capabilities.supports_mixed_precision
    )
    registry.finalize_run(run, adapter, effective_mp)
    logger.info("run %s: best epoch %d, F1 %.6f", run_id, best_epoch, best_f1)
    return run


def run_campaign(
    base: RunConfig,
    seeds: Sequence[int],
    train: LabeledDataset,
    validation: LabeledDataset,
    adapter: BackboneAdapter,
    registry: RunRegistry,
) -> Campaign:
    """Run one iteration per seed; everything but the seed is shared.

    A failed seed aborts the campaign: the raised ``CampaignAborted``
    carries the runs completed so far as a partial-results report.
    """
    configs = campaign_configs(base, seeds)
    completed: list[TrainedRun] = []
    for config in configs:
        try:
            completed.append(run_iteration(config, train, validation, adapter, registry))
        except ToolkitError as exc:
            raise CampaignAborted(
                f"seed {config.seed} failed after {len(completed)} completed "
                f"run(s): {exc}",
                completed=tuple(completed),
                failed_seed=config.seed,
                cause=exc,
            ) from exc
    return Campaign(runs=tuple(completed), shared_config_hash=config_fingerprint(base))


def predict(
    system: Union[TrainedRun, EnsembleModel],
    ds: LabeledDataset,
    registry: RunRegistry,
    adapter: Optional[BackboneAdapter] = None,
) -> PredictionSet:
    """Label a split with a trained run's checkpoint or an ensemble's vote.

    The dataset may be unlabeled. For a run, the persisted best-epoch
    checkpoint is loaded (via ``adapter`` when given, else the adapter class
    registered for the run's backbone family). For an ensemble, each member
    run predicts and the hard votes are combined.

    Raises:
        MissingCheckpoint: a required checkpoint is gone from the registry.
    """
    if isinstance(system, TrainedRun):
        loader = adapter.__class__ if adapter is not None else adapter_class(
            system.config.backbone.family
        )
        model = _guard("checkpoint load", loader.load_checkpoint, system.checkpoint)
        labels = _guard("prediction", model.predict, [ex.text for ex in ds.examples])
        if len(labels) != len(ds):
            raise AdapterFailure(
                f"adapter returned {len(labels)} predictions for {len(ds)} examples"
            )
        return PredictionSet(
            source_id=system.run_id,
            split_name=ds.split_name,
            labels=tuple(labels),
            example_ids=ds.ids,
        )

    member_predictions = [
        predict(registry.load_run(run_id), ds, registry, adapter)
        for run_id in system.member_run_ids
    ]
    return majority_vote(
        member_predictions, system.tie_policy, source_id=system.ensemble_id
    )
