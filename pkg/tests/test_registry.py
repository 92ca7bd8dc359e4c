import dataclasses
import json

import pytest

from textcamp.adapters import TinyTrainableAdapter
from textcamp.ensemble import PredictionSet, TiePolicy, build_ensemble
from textcamp.errors import UnknownRun
from textcamp.registry import (
    RunRegistry,
    make_run_id,
    read_predictions_tsv,
    write_predictions_tsv,
)
from textcamp.runspec import config_fingerprint
from textcamp.trainer import run_campaign, run_iteration


def test_run_id_deterministic_and_seed_scoped(tiny_config):
    rid = make_run_id(tiny_config)
    assert rid == make_run_id(tiny_config)
    assert rid.endswith("-s1")
    assert config_fingerprint(tiny_config)[:8] in rid
    other = make_run_id(dataclasses.replace(tiny_config, seed=2))
    assert other != rid
    assert other.endswith("-s2")


def test_round_trip_run(registry, tiny_config, train_ds, validation_ds):
    run = run_iteration(tiny_config, train_ds, validation_ds, TinyTrainableAdapter(), registry)
    loaded = registry.load_run(run.run_id)
    assert loaded.run_id == run.run_id
    assert loaded.config == run.config
    assert loaded.epoch_records == run.epoch_records
    assert loaded.best_epoch == run.best_epoch
    assert loaded.validation_predictions.labels == run.validation_predictions.labels


def test_rerun_overwrites_in_place(registry, tiny_config, train_ds, validation_ds):
    adapter = TinyTrainableAdapter()
    first = run_iteration(tiny_config, train_ds, validation_ds, adapter, registry)
    second = run_iteration(tiny_config, train_ds, validation_ds, adapter, registry)
    assert first.run_id == second.run_id
    assert registry.list_runs().count(first.run_id) == 1


def test_unknown_run_raises(registry):
    with pytest.raises(UnknownRun):
        registry.load_run("no-such-run")
    with pytest.raises(UnknownRun):
        registry.run_meta("no-such-run")


def test_run_meta_contents(registry, tiny_config, train_ds, validation_ds):
    run = run_iteration(tiny_config, train_ds, validation_ds, TinyTrainableAdapter(), registry)
    meta = registry.run_meta(run.run_id)
    assert meta["run_id"] == run.run_id
    assert meta["seed"] == tiny_config.seed
    assert meta["config_fingerprint"] == config_fingerprint(tiny_config)
    assert meta["best_epoch"] == run.best_epoch
    assert meta["adapter"]["family"] == "tiny"
    assert meta["mixed_precision_effective"] is False
    assert "python" in meta["environment"]
    assert "created_at" in meta


def test_epochs_jsonl_layout(registry, tiny_config, train_ds, validation_ds):
    run = run_iteration(tiny_config, train_ds, validation_ds, TinyTrainableAdapter(), registry)
    lines = (registry.run_dir(run.run_id) / "epochs.jsonl").read_text().splitlines()
    assert len(lines) == tiny_config.regime.epochs_per_iteration
    first = json.loads(lines[0])
    assert set(first) == {"epoch", "f1_positive", "precision_positive", "recall_positive"}
    assert first["epoch"] == 1


def test_kind_of(registry, tiny_config, train_ds, validation_ds):
    campaign = run_campaign(
        tiny_config, (1, 2, 3), train_ds, validation_ds, TinyTrainableAdapter(), registry
    )
    run_ids = [r.run_id for r in campaign.runs]
    model = build_ensemble(registry, run_ids, TiePolicy.REQUIRE_ODD)
    assert registry.kind_of(run_ids[0]) == "run"
    assert registry.kind_of(model.ensemble_id) == "ensemble"
    assert registry.kind_of("missing") is None


def test_ensemble_round_trip(registry, tiny_config, train_ds, validation_ds):
    campaign = run_campaign(
        tiny_config, (1, 2, 3), train_ds, validation_ds, TinyTrainableAdapter(), registry
    )
    model = build_ensemble(
        registry, [r.run_id for r in campaign.runs], TiePolicy.REQUIRE_ODD
    )
    loaded = registry.load_ensemble(model.ensemble_id)
    assert loaded.member_run_ids == model.member_run_ids
    assert loaded.tie_policy == model.tie_policy
    assert loaded.ensemble_id == model.ensemble_id
    assert registry.list_ensembles() == [model.ensemble_id]


def test_build_ensemble_missing_member(registry, tiny_config, train_ds, validation_ds):
    run_iteration(tiny_config, train_ds, validation_ds, TinyTrainableAdapter(), registry)
    with pytest.raises(UnknownRun):
        build_ensemble(registry, registry.list_runs() + ["ghost"], TiePolicy.TIE_TO_ZERO)


def test_ensemble_validation_predictions_persisted(registry, tiny_config, train_ds, validation_ds):
    campaign = run_campaign(
        tiny_config, (1, 2, 3), train_ds, validation_ds, TinyTrainableAdapter(), registry
    )
    model = build_ensemble(
        registry, [r.run_id for r in campaign.runs], TiePolicy.REQUIRE_ODD
    )
    stored = registry.load_predictions(model.ensemble_id, "validation")
    assert stored is not None
    assert len(stored) == len(validation_ds)
    assert stored.source_id == model.ensemble_id


def test_save_load_predictions(registry, tiny_config, train_ds, validation_ds):
    run = run_iteration(tiny_config, train_ds, validation_ds, TinyTrainableAdapter(), registry)
    stored = registry.load_predictions(run.run_id, "validation")
    assert stored.labels == run.validation_predictions.labels
    assert registry.load_predictions(run.run_id, "test") is None

    test_preds = PredictionSet(
        source_id=run.run_id,
        split_name="test",
        labels=(0, 1),
        example_ids=("t1", "t2"),
    )
    registry.save_predictions(run.run_id, test_preds)
    back = registry.load_predictions(run.run_id, "test")
    assert back.labels == (0, 1)
    assert back.example_ids == ("t1", "t2")


def test_save_predictions_unknown_system(registry):
    preds = PredictionSet(
        source_id="ghost", split_name="test", labels=(1,), example_ids=("a",)
    )
    with pytest.raises(UnknownRun):
        registry.save_predictions("ghost", preds)


def test_predictions_tsv_round_trip(tmp_path):
    preds = PredictionSet(
        source_id="sys", split_name="test", labels=(1, 0, 1), example_ids=("a", "b", "c")
    )
    path = tmp_path / "preds.tsv"
    write_predictions_tsv(preds, path)
    text = path.read_text(encoding="utf-8")
    assert text == "id\tlabel\na\t1\nb\t0\nc\t1\n"
    back = read_predictions_tsv(path, source_id="sys", split_name="test")
    assert back.labels == preds.labels
    assert back.example_ids == preds.example_ids


def test_predictions_tsv_empty_is_header_only(tmp_path):
    preds = PredictionSet(source_id="sys", split_name="test", labels=(), example_ids=())
    path = tmp_path / "empty.tsv"
    write_predictions_tsv(preds, path)
    assert path.read_text(encoding="utf-8") == "id\tlabel\n"


def test_registry_is_reusable_across_instances(tmp_path, tiny_config, train_ds, validation_ds):
    root = tmp_path / "reg"
    first = RunRegistry(root)
    run = run_iteration(tiny_config, train_ds, validation_ds, TinyTrainableAdapter(), first)
    second = RunRegistry(root)
    assert second.has_run(run.run_id)
    assert second.load_run(run.run_id).best_epoch == run.best_epoch
