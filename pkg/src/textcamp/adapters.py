"""Backbone adapters: the pluggable training/inference layer.

An adapter wraps one family of models behind a uniform contract so the
pipeline stays model-agnostic and desk-testable. The contract every
adapter must honor:

* Given identical (RunConfig, dataset bytes), training and prediction are
  bit-reproducible for the same adapter version.
* ``predict`` returns exactly one hard label in {0, 1} per input text, in
  input order. Inputs longer than the effective sequence limit are
  truncated, never rejected.

Two adapters ship with the toolkit:

* ``TinyTrainableAdapter``: a hashed bag-of-words logistic regression
  trained with AdamW under a linear-warmup/cosine-decay schedule. Small
  enough to run whole campaigns in a test suite, yet it honors the real
  hyperparameter surface (learning rate, weight decay, batch size, seed).
* ``ScriptedStubAdapter``: emits preassigned per-epoch validation scores
  and constant predictions; exists to exercise selection and reporting
  logic with exactly known numbers.

Heavyweight transformer backbones plug in by subclassing
``BackboneAdapter`` and registering the subclass under a new family tag.
"""

from __future__ import annotations

import abc
import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from . import metrics
from .corpus import LabeledDataset
from .errors import MissingCheckpoint, UnknownBackbone
from .runspec import RunConfig

# Fraction of total optimizer steps spent in linear warmup before cosine decay.
WARMUP_FRACTION = 0.1


@dataclass(frozen=True)
class AdapterCapabilities:
    supports_mixed_precision: bool
    max_sequence_length: int


class InferenceModel(abc.ABC):
    """A loaded checkpoint that can label texts."""

    @abc.abstractmethod
    def predict(self, texts: Sequence[str]) -> list[int]:
        """One hard label in {0, 1} per text, in input order."""


class TrainingSession(abc.ABC):
    """One fine-tuning iteration in progress.

    The driver calls ``train_epoch`` once per epoch, then ``evaluate`` on
    the validation split; ``save_checkpoint`` persists the current model
    state whenever the driver decides this epoch is the best so far.
    """

    @abc.abstractmethod
    def train_epoch(self) -> None:
        """Advance training by one epoch over the training split."""

    @abc.abstractmethod
    def predict(self, texts: Sequence[str]) -> list[int]:
        """Hard labels from the current model state."""

    def evaluate(self, validation: LabeledDataset) -> tuple[float, float, float]:
        """(f1, precision, recall) for the positive class on ``validation``.

        The default derives scores from hard predictions; adapters with
        scripted or otherwise precomputed metrics may override.
        """
        labels = self.predict([ex.text for ex in validation.examples])
        tp = fp = fn = tn = 0
        for y_hat, ex in zip(labels, validation.examples):
            if ex.label == 1:
                tp, fn = (tp + 1, fn) if y_hat == 1 else (tp, fn + 1)
            else:
                fp, tn = (fp + 1, tn) if y_hat == 1 else (fp, tn + 1)
        m = metrics.precision_recall_f1(metrics.ConfusionMatrix(tp, fp, fn, tn))
        return m.f1, m.precision, m.recall

    @abc.abstractmethod
    def save_checkpoint(self, directory: Union[str, Path]) -> None:
        """Persist the current model state into ``directory``."""


class BackboneAdapter(abc.ABC):
    """Factory for training sessions and checkpoint loading for one family."""

    family: str = ""
    version: str = ""

    @property
    @abc.abstractmethod
    def capabilities(self) -> AdapterCapabilities: ...

    @abc.abstractmethod
    def start(self, config: RunConfig, train: LabeledDataset) -> TrainingSession: ...

    @classmethod
    @abc.abstractmethod
    def load_checkpoint(cls, directory: Union[str, Path]) -> InferenceModel: ...

    def describe(self) -> dict:
        """Constructor options worth recording in run metadata."""
        return {}


# --- family registry -------------------------------------------------------

_ADAPTER_FAMILIES: dict[str, type] = {}


def register_adapter(cls: type) -> type:
    """Register (or replace) the adapter class for ``cls.family``."""
    if not getattr(cls, "family", ""):
        raise ValueError(f"{cls.__name__} must declare a non-empty family tag")
    _ADAPTER_FAMILIES[cls.family] = cls
    return cls


def adapter_class(family: str) -> type:
    try:
        return _ADAPTER_FAMILIES[family]
    except KeyError:
        raise UnknownBackbone(
            f"no adapter registered for backbone family {family!r}; "
            f"known families: {sorted(_ADAPTER_FAMILIES)}"
        ) from None


def resolve_adapter(family: str, options: Optional[Mapping] = None) -> BackboneAdapter:
    return adapter_class(family)(**dict(options or {}))


# --- tiny trainable adapter -------------------------------------------------

_TOKEN_RE = re.compile(r"\w+")


def _hash_token(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dim


def _featurize(text: str, dim: int, max_tokens: int) -> tuple[np.ndarray, np.ndarray]:
    tokens = _TOKEN_RE.findall(text.lower())[:max_tokens]
    counts = Counter(_hash_token(t, dim) for t in tokens)
    idx = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
    val = np.array([counts[i] for i in idx], dtype=np.float64)
    return idx, val


def _lr_factor(step: int, total_steps: int, warmup_steps: int) -> float:
    # Linear warmup to 1.0, then cosine decay to 0.
    if step <= warmup_steps:
        return step / warmup_steps
    span = max(1, total_steps - warmup_steps)
    progress = (step - warmup_steps) / span
    return 0.5 * (1.0 + math.cos(math.pi * progress))


class _TinyModel(InferenceModel):
    def __init__(self, w: np.ndarray, b: float, dim: int, max_tokens: int):
        self.w = w
        self.b = b
        self.dim = dim
        self.max_tokens = max_tokens

    def predict(self, texts: Sequence[str]) -> list[int]:
        out = []
        for text in texts:
            idx, val = _featurize(text, self.dim, self.max_tokens)
            z = self.b + (float(self.w[idx] @ val) if len(idx) else 0.0)
            out.append(1 if z >= 0.0 else 0)
        return out


class _TinySession(TrainingSession):
    def __init__(self, config: RunConfig, train: LabeledDataset, dim: int, max_tokens: int):
        hp = config.hyperparameters
        self.config = config
        self.dim = dim
        self.max_tokens = max_tokens
        self.features = [_featurize(ex.text, dim, max_tokens) for ex in train.examples]
        self.targets = np.array([ex.label for ex in train.examples], dtype=np.float64)
        self.batch_size = hp.batch_size
        self.lr = hp.learning_rate
        self.weight_decay = hp.weight_decay

        rng = np.random.default_rng(config.seed)
        self.w = rng.normal(0.0, 0.01, size=dim)
        self.b = 0.0
        self.m_w = np.zeros(dim)
        self.v_w = np.zeros(dim)
        self.m_b = 0.0
        self.v_b = 0.0
        self.beta1, self.beta2, self.eps = 0.9, 0.999, 1e-8

        self.epoch = 0
        self.step = 0
        steps_per_epoch = math.ceil(len(self.features) / self.batch_size)
        self.total_steps = steps_per_epoch * config.regime.epochs_per_iteration
        self.warmup_steps = max(1, int(WARMUP_FRACTION * self.total_steps))

    def train_epoch(self) -> None:
        self.epoch += 1
        order = np.random.default_rng([self.config.seed, self.epoch]).permutation(
            len(self.features)
        )
        for start in range(0, len(order), self.batch_size):
            batch = order[start : start + self.batch_size]
            self._adamw_step(batch)

    def _adamw_step(self, batch: np.ndarray) -> None:
        grad_w = np.zeros(self.dim)
        grad_b = 0.0
        for i in batch:
            idx, val = self.features[i]
            z = self.b + (float(self.w[idx] @ val) if len(idx) else 0.0)
            err = 1.0 / (1.0 + math.exp(-z)) - self.targets[i]
            if len(idx):
                np.add.at(grad_w, idx, err * val)
            grad_b += err
        grad_w /= len(batch)
        grad_b /= len(batch)

        self.step += 1
        t = self.step
        lr_t = self.lr * _lr_factor(t, self.total_steps, self.warmup_steps)

        self.m_w = self.beta1 * self.m_w + (1 - self.beta1) * grad_w
        self.v_w = self.beta2 * self.v_w + (1 - self.beta2) * grad_w**2
        m_hat = self.m_w / (1 - self.beta1**t)
        v_hat = self.v_w / (1 - self.beta2**t)
        self.w -= lr_t * (m_hat / (np.sqrt(v_hat) + self.eps) + self.weight_decay * self.w)

        self.m_b = self.beta1 * self.m_b + (1 - self.beta1) * grad_b
        self.v_b = self.beta2 * self.v_b + (1 - self.beta2) * grad_b**2
        mb_hat = self.m_b / (1 - self.beta1**t)
        vb_hat = self.v_b / (1 - self.beta2**t)
        self.b -= lr_t * mb_hat / (math.sqrt(vb_hat) + self.eps)  # no decay on bias

    def predict(self, texts: Sequence[str]) -> list[int]:
        return _TinyModel(self.w, self.b, self.dim, self.max_tokens).predict(texts)

    def save_checkpoint(self, directory: Union[str, Path]) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        np.savez(directory / "weights.npz", w=self.w, b=np.float64(self.b))
        (directory / "adapter.json").write_text(
            json.dumps(
                {
                    "family": TinyTrainableAdapter.family,
                    "version": TinyTrainableAdapter.version,
                    "dim": self.dim,
                    "max_tokens": self.max_tokens,
                },
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )


@register_adapter
class TinyTrainableAdapter(BackboneAdapter):
    """Hashed bag-of-words logistic regression; deterministic and CPU-cheap."""

    family = "tiny"
    version = "1.0"

    def __init__(self, dim: int = 4096):
        if dim < 2:
            raise ValueError("feature dimension must be >= 2")
        self.dim = dim

    @property
    def capabilities(self) -> AdapterCapabilities:
        return AdapterCapabilities(supports_mixed_precision=False, max_sequence_length=4096)

    def start(self, config: RunConfig, train: LabeledDataset) -> TrainingSession:
        max_tokens = min(
            config.regime.max_sequence_length, self.capabilities.max_sequence_length
        )
        return _TinySession(config, train, self.dim, max_tokens)

    @classmethod
    def load_checkpoint(cls, directory: Union[str, Path]) -> InferenceModel:
        directory = Path(directory)
        weights = directory / "weights.npz"
        meta = directory / "adapter.json"
        if not weights.exists() or not meta.exists():
            raise MissingCheckpoint(f"no tiny checkpoint under {directory}")
        spec = json.loads(meta.read_text(encoding="utf-8"))
        data = np.load(weights)
        return _TinyModel(data["w"], float(data["b"]), spec["dim"], spec["max_tokens"])

    def describe(self) -> dict:
        return {"dim": self.dim, "warmup_fraction": WARMUP_FRACTION}


# --- scripted stub adapter --------------------------------------------------

def _synth_score(seed: int, epoch: int) -> float:
    digest = hashlib.blake2b(f"{seed}:{epoch}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2**64


class _ConstantModel(InferenceModel):
    def __init__(self, label: int):
        self.label = label

    def predict(self, texts: Sequence[str]) -> list[int]:
        return [self.label] * len(texts)


class _StubSession(TrainingSession):
    def __init__(self, seed: int, scripted: Optional[Sequence], label: int):
        self.seed = seed
        self.scripted = scripted
        self.label = label
        self.epoch = 0

    def train_epoch(self) -> None:
        self.epoch += 1

    def evaluate(self, validation: LabeledDataset) -> tuple[float, float, float]:
        if self.scripted is None:
            score = _synth_score(self.seed, self.epoch)
            return score, score, score
        if self.epoch > len(self.scripted):
            raise ValueError(
                f"scripted sequence for seed {self.seed} has {len(self.scripted)} "
                f"entries but epoch {self.epoch} was requested"
            )
        entry = self.scripted[self.epoch - 1]
        if isinstance(entry, (tuple, list)):
            f1, precision, recall = entry
            return float(f1), float(precision), float(recall)
        return float(entry), float(entry), float(entry)

    def predict(self, texts: Sequence[str]) -> list[int]:
        return [self.label] * len(texts)

    def save_checkpoint(self, directory: Union[str, Path]) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "adapter.json").write_text(
            json.dumps(
                {
                    "family": ScriptedStubAdapter.family,
                    "version": ScriptedStubAdapter.version,
                    "constant_label": self.label,
                },
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )


@register_adapter
class ScriptedStubAdapter(BackboneAdapter):
    """Replays preassigned per-epoch validation scores; predicts a constant label.

    ``f1_sequences`` maps a seed (int, or str for config-file friendliness)
    to its per-epoch scores: floats, or (f1, precision, recall) triples.
    Seeds without an entry fall back to a deterministic pseudo-random
    sequence derived from (seed, epoch).
    """

    family = "stub"
    version = "1.0"

    def __init__(self, f1_sequences: Optional[Mapping] = None, constant_label: int = 1):
        if constant_label not in (0, 1):
            raise ValueError("constant_label must be 0 or 1")
        self.f1_sequences = {int(k): list(v) for k, v in (f1_sequences or {}).items()}
        self.constant_label = constant_label

    @property
    def capabilities(self) -> AdapterCapabilities:
        return AdapterCapabilities(supports_mixed_precision=False, max_sequence_length=10**6)

    def start(self, config: RunConfig, train: LabeledDataset) -> TrainingSession:
        return _StubSession(
            config.seed, self.f1_sequences.get(config.seed), self.constant_label
        )

    @classmethod
    def load_checkpoint(cls, directory: Union[str, Path]) -> InferenceModel:
        meta = Path(directory) / "adapter.json"
        if not meta.exists():
            raise MissingCheckpoint(f"no stub checkpoint under {directory}")
        spec = json.loads(meta.read_text(encoding="utf-8"))
        return _ConstantModel(int(spec["constant_label"]))

    def describe(self) -> dict:
        return {
            "constant_label": self.constant_label,
            "scripted_seeds": sorted(self.f1_sequences),
        }
