"""On-disk registry of runs, ensembles, and their predictions.

Layout under the registry root::

    runs/<run_id>/config.json          run configuration
                  epochs.jsonl         one record per epoch, file order = epoch order
                  checkpoint/          adapter-defined best-epoch snapshot
                  predictions/<split>.tsv        id<TAB>label, dataset order
                  predictions/<split>.meta.json  timestamp sidecar
                  meta.json            adapter + environment fingerprint; completion marker
    ensembles/<ensemble_id>/ensemble.json, predictions/...

Run ids derive from the configuration (backbone, fingerprint, seed), so
re-running an identical config overwrites its own directory instead of
accumulating copies. A registry-wide file lock serializes writers from
concurrent processes; ``meta.json`` / ``ensemble.json`` double as the
completion markers, so a crashed half-written run is simply re-prepared.
"""

from __future__ import annotations

import json
import platform
import re
import shutil
import sys
from pathlib import Path
from typing import Optional, Union

import numpy
from filelock import FileLock

from .ensemble import EnsembleModel, PredictionSet, TiePolicy
from .errors import MissingPredictions, UnknownRun
from .runspec import RunConfig, config_fingerprint

_ID_SAFE = re.compile(r"[^a-z0-9]+")


def _slug(name: str) -> str:
    return _ID_SAFE.sub("-", name.lower()).strip("-")


def make_run_id(config: RunConfig) -> str:
    return f"{_slug(config.backbone.name)}-{config_fingerprint(config)[:8]}-s{config.seed}"


def environment_fingerprint() -> dict:
    return {
        "python": sys.version.split()[0],
        "numpy": numpy.__version__,
        "platform": platform.platform(),
    }


def write_predictions_tsv(pset: PredictionSet, path: Union[str, Path]) -> None:
    """Write ``id<TAB>label`` rows (with header) in prediction order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["id\tlabel"]
    lines.extend(f"{i}\t{lab}" for i, lab in zip(pset.example_ids, pset.labels))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_predictions_tsv(path: Union[str, Path], source_id: str, split_name: str) -> PredictionSet:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "id\tlabel":
        raise MissingPredictions(f"{path}: not a prediction TSV")
    ids, labels = [], []
    for line in lines[1:]:
        ex_id, _, lab = line.partition("\t")
        ids.append(ex_id)
        labels.append(int(lab))
    return PredictionSet(
        source_id=source_id, split_name=split_name,
        labels=tuple(labels), example_ids=tuple(ids),
    )


def _dump_json(obj: dict, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class RunRegistry:
    """Filesystem-backed store; see module docstring for the layout."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.runs_dir = self.root / "runs"
        self.ensembles_dir = self.root / "ensembles"
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        self.ensembles_dir.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.root / ".lock"))

    # --- runs ---

    def run_dir(self, run_id: str) -> Path:
        return self.runs_dir / run_id

    def has_run(self, run_id: str) -> bool:
        return (self.run_dir(run_id) / "meta.json").is_file()

    def list_runs(self) -> list[str]:
        return sorted(p.name for p in self.runs_dir.iterdir() if self.has_run(p.name))

    def prepare_run(self, config: RunConfig) -> tuple[str, Path]:
        """Allocate (wiping any previous copy of) the directory for this config."""
        run_id = make_run_id(config)
        run_dir = self.run_dir(run_id)
        with self._lock:
            if run_dir.exists():
                shutil.rmtree(run_dir)
            (run_dir / "checkpoint").mkdir(parents=True)
            (run_dir / "predictions").mkdir()
        return run_id, run_dir

    def finalize_run(self, run, adapter, mixed_precision_effective: bool) -> None:
        """Write config, epoch log, predictions, and the completion marker."""
        run_dir = self.run_dir(run.run_id)
        with self._lock:
            _dump_json(run.config.to_json_dict(), run_dir / "config.json")

            epoch_lines = [
                json.dumps(
                    {
                        "epoch": r.epoch_index,
                        "f1_positive": r.f1_positive,
                        "precision_positive": r.precision_positive,
                        "recall_positive": r.recall_positive,
                    }
                )
                for r in run.epoch_records
            ]
            (run_dir / "epochs.jsonl").write_text(
                "\n".join(epoch_lines) + "\n", encoding="utf-8"
            )

            self._write_predictions(run_dir, run.validation_predictions)

            _dump_json(
                {
                    "run_id": run.run_id,
                    "seed": run.config.seed,
                    "config_fingerprint": config_fingerprint(run.config),
                    "best_epoch": run.best_epoch,
                    "best_f1": run.epoch_records[run.best_epoch - 1].f1_positive,
                    "adapter": {
                        "family": adapter.family,
                        "version": adapter.version,
                        "options": adapter.describe(),
                    },
                    "mixed_precision_effective": mixed_precision_effective,
                    "environment": environment_fingerprint(),
                    "created_at": run.validation_predictions.created_at,
                },
                run_dir / "meta.json",
            )

    def run_meta(self, run_id: str) -> dict:
        if not self.has_run(run_id):
            raise UnknownRun(f"run {run_id!r} is not in the registry")
        path = self.run_dir(run_id) / "meta.json"
        return json.loads(path.read_text(encoding="utf-8"))

    def load_run(self, run_id: str):
        from .trainer import EpochRecord, TrainedRun  # deferred: trainer imports this module

        run_dir = self.run_dir(run_id)
        if not self.has_run(run_id):
            raise UnknownRun(f"run {run_id!r} is not in the registry")
        config = RunConfig.from_json_dict(
            json.loads((run_dir / "config.json").read_text(encoding="utf-8"))
        )
        records = []
        for line in (run_dir / "epochs.jsonl").read_text(encoding="utf-8").splitlines():
            obj = json.loads(line)
            records.append(
                EpochRecord(
                    epoch_index=obj["epoch"],
                    f1_positive=obj["f1_positive"],
                    precision_positive=obj["precision_positive"],
                    recall_positive=obj["recall_positive"],
                )
            )
        meta = json.loads((run_dir / "meta.json").read_text(encoding="utf-8"))
        validation_predictions = self.load_predictions(run_id, "validation")
        return TrainedRun(
            run_id=run_id,
            config=config,
            epoch_records=tuple(records),
            best_epoch=meta["best_epoch"],
            checkpoint=run_dir / "checkpoint",
            validation_predictions=validation_predictions,
        )

    # --- ensembles ---

    def ensemble_dir(self, ensemble_id: str) -> Path:
        return self.ensembles_dir / ensemble_id

    def has_ensemble(self, ensemble_id: str) -> bool:
        return (self.ensemble_dir(ensemble_id) / "ensemble.json").is_file()

    def list_ensembles(self) -> list[str]:
        return sorted(p.name for p in self.ensembles_dir.iterdir() if self.has_ensemble(p.name))

    def save_ensemble(self, model: EnsembleModel) -> None:
        if model.ensemble_id is None:
            raise ValueError("ensemble must carry an id before it can be persisted")
        ens_dir = self.ensemble_dir(model.ensemble_id)
        with self._lock:
            (ens_dir / "predictions").mkdir(parents=True, exist_ok=True)
            _dump_json(
                {
                    "ensemble_id": model.ensemble_id,
                    "member_run_ids": list(model.member_run_ids),
                    "tie_policy": model.tie_policy.value,
                },
                ens_dir / "ensemble.json",
            )

    def load_ensemble(self, ensemble_id: str) -> EnsembleModel:
        if not self.has_ensemble(ensemble_id):
            raise UnknownRun(f"ensemble {ensemble_id!r} is not in the registry")
        obj = json.loads(
            (self.ensemble_dir(ensemble_id) / "ensemble.json").read_text(encoding="utf-8")
        )
        return EnsembleModel(
            member_run_ids=tuple(obj["member_run_ids"]),
            tie_policy=TiePolicy(obj["tie_policy"]),
            ensemble_id=obj["ensemble_id"],
        )

    # --- predictions (shared by runs and ensembles) ---

    def kind_of(self, system_id: str) -> Optional[str]:
        if self.has_run(system_id):
            return "run"
        if self.has_ensemble(system_id):
            return "ensemble"
        return None

    def _system_dir(self, system_id: str) -> Path:
        kind = self.kind_of(system_id)
        if kind == "run":
            return self.run_dir(system_id)
        if kind == "ensemble":
            return self.ensemble_dir(system_id)
        raise UnknownRun(f"{system_id!r} is neither a run nor an ensemble in the registry")

    def save_predictions(self, system_id: str, pset: PredictionSet) -> None:
        base = self._system_dir(system_id) / "predictions"
        with self._lock:
            self._write_predictions_at(base, pset)

    def _write_predictions(self, owner_dir: Path, pset: PredictionSet) -> None:
        self._write_predictions_at(owner_dir / "predictions", pset)

    @staticmethod
    def _write_predictions_at(base: Path, pset: PredictionSet) -> None:
        write_predictions_tsv(pset, base / f"{pset.split_name}.tsv")
        _dump_json(
            {
                "source_id": pset.source_id,
                "split_name": pset.split_name,
                "count": len(pset),
                "created_at": pset.created_at,
            },
            base / f"{pset.split_name}.meta.json",
        )

    def load_predictions(self, system_id: str, split_name: str) -> Optional[PredictionSet]:
        """Stored predictions for one split, or None if absent."""
        path = self._system_dir(system_id) / "predictions" / f"{split_name}.tsv"
        if not path.is_file():
            return None
        return read_predictions_tsv(path, source_id=system_id, split_name=split_name)
