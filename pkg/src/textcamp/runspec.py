"""Run configurations: backbone identity, tunable hyperparameters, fixed regime.

A run is fully described by (backbone, hyperparameters, regime, seed).
Campaigns share everything but the seed; the shared part is identified by
a stable fingerprint so runs can be grouped after the fact.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import DuplicateSeed, UnknownBackbone


@dataclass(frozen=True)
class BackboneId:
    """Identity of a pretrained backbone.

    ``name`` is an opaque model identifier (typically a model-hub path);
    ``family`` selects the adapter that knows how to train it.
    """

    name: str
    family: str

    def __post_init__(self):
        if not self.name or not self.family:
            raise ValueError("backbone name and family must be non-empty")


@dataclass(frozen=True)
class Hyperparameters:
    """The tuned triple: optimizer step size, decoupled decay, batch size."""

    learning_rate: float
    weight_decay: float
    batch_size: int

    def __post_init__(self):
        if not 0.0 < self.learning_rate < 1.0:
            raise ValueError(f"learning_rate must be in (0, 1), got {self.learning_rate}")
        if self.weight_decay < 0.0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ValueError(f"batch_size must be a positive integer, got {self.batch_size}")


@dataclass(frozen=True)
class RegimeSettings:
    """Fixed training regime shared by every run of a campaign.

    ``mixed_precision`` is a capability flag, not a semantic one: adapters
    that cannot honor it train in full precision, which is the reference
    behavior either way.
    """

    epochs_per_iteration: int = 10
    iterations: int = 3
    max_sequence_length: int = 512
    optimizer: str = "adamw"
    scheduler: str = "linear-warmup-cosine-decay"
    mixed_precision: bool = True

    def __post_init__(self):
        if self.epochs_per_iteration < 1:
            raise ValueError("epochs_per_iteration must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.max_sequence_length < 1:
            raise ValueError("max_sequence_length must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    backbone: BackboneId
    hyperparameters: Hyperparameters
    regime: RegimeSettings
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "backbone": {"name": self.backbone.name, "family": self.backbone.family},
            "hyperparameters": {
                "learning_rate": self.hyperparameters.learning_rate,
                "weight_decay": self.hyperparameters.weight_decay,
                "batch_size": self.hyperparameters.batch_size,
            },
            "regime": {
                "epochs_per_iteration": self.regime.epochs_per_iteration,
                "iterations": self.regime.iterations,
                "max_sequence_length": self.regime.max_sequence_length,
                "optimizer": self.regime.optimizer,
                "scheduler": self.regime.scheduler,
                "mixed_precision": self.regime.mixed_precision,
            },
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RunConfig":
        return cls(
            backbone=BackboneId(**obj["backbone"]),
            hyperparameters=Hyperparameters(**obj["hyperparameters"]),
            regime=RegimeSettings(**obj["regime"]),
            seed=int(obj["seed"]),
        )


def config_fingerprint(config: RunConfig) -> str:
    """Hash of (backbone, hyperparameters, regime), excluding the seed.

    Every run of one campaign shares this value.
    """
    payload = config.to_json_dict()
    del payload["seed"]
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# Campaigns default to three iterations with documented, reproducible seeds.
DEFAULT_CAMPAIGN_SEEDS = (1, 2, 3)

# Bundled backbone identifiers with tuned defaults.
ROBERTA_LARGE = BackboneId(name="roberta-large", family="roberta")
BERTWEET_LARGE = BackboneId(name="vinai/bertweet-large", family="bertweet")
BIOLINKBERT_LARGE = BackboneId(name="michiyasunaga/BioLinkBERT-large", family="biolinkbert")

# Built-in desk-scale backbones (see textcamp.adapters).
TINY_BOW = BackboneId(name="tiny-bow", family="tiny")
SCRIPTED_STUB = BackboneId(name="scripted-stub", family="stub")

_DEFAULT_HYPERPARAMETERS: dict[str, Hyperparameters] = {
    "roberta-large": Hyperparameters(7.21422e-06, 0.00694763, 8),
    "vinai/bertweet-large": Hyperparameters(1.17754e-05, 0.01976150, 8),
    "michiyasunaga/biolinkbert-large": Hyperparameters(6.10552e-06, 0.00762736, 16),
    # short aliases for the hub paths above
    "bertweet-large": Hyperparameters(1.17754e-05, 0.01976150, 8),
    "biolinkbert-large": Hyperparameters(6.10552e-06, 0.00762736, 16),
    # desk-scale backbones
    "tiny-bow": Hyperparameters(0.5, 1e-4, 8),
    "scripted-stub": Hyperparameters(1e-3, 0.0, 8),
}


def register_backbone_defaults(backbone: BackboneId, hp: Hyperparameters) -> None:
    """Declare tuned defaults for a user-registered backbone."""
    _DEFAULT_HYPERPARAMETERS[backbone.name.lower()] = hp


def default_hyperparameters(backbone: BackboneId) -> Hyperparameters:
    """Return the tuned defaults registered for this backbone.

    Raises:
        UnknownBackbone: no defaults were registered under this name.
    """
    hp = _DEFAULT_HYPERPARAMETERS.get(backbone.name.lower())
    if hp is None:
        raise UnknownBackbone(
            f"no registered hyperparameter defaults for backbone {backbone.name!r}"
        )
    return hp


def campaign_configs(base: RunConfig, seeds: Sequence[int]) -> list[RunConfig]:
    """Expand a base config into one config per seed, all else identical."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seeds must be non-empty")
    if len(set(seeds)) != len(seeds):
        raise DuplicateSeed(f"campaign seeds must be pairwise distinct, got {seeds}")
    return [replace(base, seed=s) for s in seeds]
