import dataclasses

import pytest

from textcamp.errors import DuplicateSeed, UnknownBackbone
from textcamp.runspec import (
    BERTWEET_LARGE,
    BIOLINKBERT_LARGE,
    DEFAULT_CAMPAIGN_SEEDS,
    ROBERTA_LARGE,
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


def test_hyperparameters_validation():
    with pytest.raises(ValueError):
        Hyperparameters(learning_rate=0.0, weight_decay=0.0, batch_size=8)
    with pytest.raises(ValueError):
        Hyperparameters(learning_rate=1.5, weight_decay=0.0, batch_size=8)
    with pytest.raises(ValueError):
        Hyperparameters(learning_rate=1e-5, weight_decay=-0.1, batch_size=8)
    with pytest.raises(ValueError):
        Hyperparameters(learning_rate=1e-5, weight_decay=0.0, batch_size=0)


def test_regime_defaults():
    regime = RegimeSettings()
    assert regime.epochs_per_iteration == 10
    assert regime.iterations == 3
    assert regime.max_sequence_length == 512
    assert regime.optimizer == "adamw"
    assert regime.scheduler == "linear-warmup-cosine-decay"
    assert regime.mixed_precision is True


def test_default_campaign_seeds():
    assert DEFAULT_CAMPAIGN_SEEDS == (1, 2, 3)


def test_tuned_defaults_roberta():
    hp = default_hyperparameters(ROBERTA_LARGE)
    assert hp == Hyperparameters(7.21422e-06, 0.00694763, 8)


def test_tuned_defaults_bertweet():
    hp = default_hyperparameters(BERTWEET_LARGE)
    assert hp == Hyperparameters(1.17754e-05, 0.01976150, 8)


def test_tuned_defaults_biolinkbert():
    hp = default_hyperparameters(BIOLINKBERT_LARGE)
    assert hp == Hyperparameters(6.10552e-06, 0.00762736, 16)


def test_unknown_backbone_raises():
    with pytest.raises(UnknownBackbone):
        default_hyperparameters(BackboneId(name="mystery-model", family="mystery"))


def test_register_backbone_defaults():
    backbone = BackboneId(name="custom-model-xyz", family="custom")
    hp = Hyperparameters(3e-5, 0.01, 32)
    register_backbone_defaults(backbone, hp)
    assert default_hyperparameters(backbone) == hp


def test_fingerprint_ignores_seed(tiny_config):
    other = dataclasses.replace(tiny_config, seed=tiny_config.seed + 41)
    assert config_fingerprint(tiny_config) == config_fingerprint(other)


def test_fingerprint_sensitive_to_hyperparameters(tiny_config):
    changed = dataclasses.replace(
        tiny_config,
        hyperparameters=dataclasses.replace(
            tiny_config.hyperparameters, learning_rate=0.123
        ),
    )
    assert config_fingerprint(tiny_config) != config_fingerprint(changed)


def test_campaign_configs_replaces_seed(tiny_config):
    configs = campaign_configs(tiny_config, (5, 6, 7))
    assert [c.seed for c in configs] == [5, 6, 7]
    assert all(c.backbone == tiny_config.backbone for c in configs)
    assert len({config_fingerprint(c) for c in configs}) == 1


def test_campaign_configs_rejects_duplicate_seed(tiny_config):
    with pytest.raises(DuplicateSeed):
        campaign_configs(tiny_config, (1, 2, 2))


def test_run_config_json_round_trip(tiny_config):
    back = RunConfig.from_json_dict(tiny_config.to_json_dict())
    assert back == tiny_config


def test_run_config_round_trip_randomized():
    import random

    rng = random.Random(1312)
    families = [ROBERTA_LARGE, BERTWEET_LARGE, BIOLINKBERT_LARGE, TINY_BOW]
    for _ in range(100):
        config = RunConfig(
            backbone=rng.choice(families),
            hyperparameters=Hyperparameters(
                learning_rate=rng.uniform(1e-7, 0.9),
                weight_decay=rng.uniform(0, 0.2),
                batch_size=rng.choice([8, 16, 32]),
            ),
            regime=RegimeSettings(
                epochs_per_iteration=rng.randint(1, 20),
                iterations=rng.randint(1, 5),
                max_sequence_length=rng.choice([128, 256, 512]),
                mixed_precision=rng.random() < 0.5,
            ),
            seed=rng.randint(1, 10_000),
        )
        assert RunConfig.from_json_dict(config.to_json_dict()) == config
