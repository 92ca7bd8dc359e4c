"""Command-line entry point.

Subcommands: ``train``, ``tune``, ``ensemble``, ``evaluate``, ``predict``,
``report``. A project configuration file (TOML, or JSON with the same
shape) names the data splits, backbone, hyperparameters, regime, seeds,
and output registry; command-line flags override file values. Results go
to files and standard output, diagnostics to the error stream, and the
exit code is 0 exactly when no error was raised.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
import sys
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import hpo, metrics, trainer
from .adapters import resolve_adapter
from .corpus import LabeledDataset, load_dataset, summarize
from .ensemble import TiePolicy, build_ensemble
from .errors import (
    CampaignAborted,
    ConfigError,
    MissingPredictions,
    ToolkitError,
    UnknownRun,
    UnlabeledGold,
)
from .references import published_reference_rows
from .registry import RunRegistry, write_predictions_tsv
from .runspec import (
    BackboneId,
    Hyperparameters,
    RegimeSettings,
    RunConfig,
    default_hyperparameters,
)

REGISTRY_ENV_VAR = "TEXTCAMP_REGISTRY"

_KNOWN_SECTIONS = {
    "data", "backbone", "hyperparameters", "regime", "campaign",
    "ensemble", "search", "adapter", "output",
}


@dataclass
class ProjectConfig:
    """Validated project configuration; paths are resolved and checked lazily
    per command, since different commands need different splits."""

    config_dir: Path
    data_paths: dict[str, Path]
    data_format: Optional[str]
    backbone: BackboneId
    hyperparameters: Optional[Hyperparameters]
    hyperparameters_from_search: bool
    regime: RegimeSettings
    seeds: tuple[int, ...]
    tie_policy: TiePolicy
    registry_root: Optional[Path]
    adapter_options: dict
    search_space: hpo.SearchSpace
    search_trials: int
    search_seed: int
    search_parallelism: int


def _expect(table: dict, key: str, kind, where: str):
    value = table.get(key)
    if value is None:
        raise ConfigError(f"{where}: missing required key {key!r}")
    if not isinstance(value, kind):
        raise ConfigError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _check_keys(table: dict, allowed: set[str], where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"[{where}]: unknown key(s): {sorted(unknown)}")


def load_project_config(path) -> ProjectConfig:
    """Parse and validate a TOML (or JSON) project configuration."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw = path.read_bytes()
    if path.suffix.lower() == ".json":
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from None
    else:
        try:
            obj = tomllib.loads(raw.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML ({exc})") from None

    unknown = set(obj) - _KNOWN_SECTIONS
    if unknown:
        raise ConfigError(f"{path}: unknown config section(s): {sorted(unknown)}")

    config_dir = path.parent

    data = obj.get("data", {})
    _check_keys(data, {"train", "validation", "test", "format"}, "data")
    data_paths = {}
    for split in ("train", "validation", "test"):
        if split in data:
            data_paths[split] = (config_dir / str(data[split])).resolve()
    data_format = data.get("format")
    if data_format is not None and data_format not in ("tsv", "csv", "jsonl"):
        raise ConfigError(f"data.format must be tsv, csv, or jsonl, got {data_format!r}")

    backbone_tbl = obj.get("backbone")
    if not backbone_tbl:
        raise ConfigError(f"{path}: missing [backbone] section")
    _check_keys(backbone_tbl, {"name", "family"}, "backbone")
    backbone = BackboneId(
        name=_expect(backbone_tbl, "name", str, "backbone"),
        family=_expect(backbone_tbl, "family", str, "backbone"),
    )

    hp_entry = obj.get("hyperparameters")
    hyperparameters = None
    from_search = False
    if isinstance(hp_entry, str):
        if hp_entry != "search":
            raise ConfigError("hyperparameters must be a table or the string 'search'")
        from_search = True
    elif isinstance(hp_entry, dict):
        _check_keys(
            hp_entry,
            {"source", "learning_rate", "weight_decay", "batch_size"},
            "hyperparameters",
        )
        if "source" in hp_entry:
            if hp_entry["source"] != "search" or len(hp_entry) != 1:
                raise ConfigError(
                    "[hyperparameters]: source = 'search' must be the only key"
                )
            from_search = True
        else:
            try:
                hyperparameters = Hyperparameters(
                    learning_rate=float(_expect(hp_entry, "learning_rate", (int, float), "hyperparameters")),
                    weight_decay=float(_expect(hp_entry, "weight_decay", (int, float), "hyperparameters")),
                    batch_size=_expect(hp_entry, "batch_size", int, "hyperparameters"),
                )
            except ValueError as exc:
                raise ConfigError(f"hyperparameters: {exc}") from None
    elif hp_entry is not None:
        raise ConfigError("hyperparameters must be a table or the string 'search'")

    regime_tbl = obj.get("regime", {})
    _check_keys(
        regime_tbl,
        {"epochs_per_iteration", "iterations", "max_sequence_length",
         "optimizer", "scheduler", "mixed_precision"},
        "regime",
    )
    try:
        regime = RegimeSettings(
            epochs_per_iteration=regime_tbl.get("epochs_per_iteration", 10),
            iterations=regime_tbl.get("iterations", 3),
            max_sequence_length=regime_tbl.get("max_sequence_length", 512),
            optimizer=regime_tbl.get("optimizer", "adamw"),
            scheduler=regime_tbl.get("scheduler", "linear-warmup-cosine-decay"),
            mixed_precision=regime_tbl.get("mixed_precision", True),
        )
    except ValueError as exc:
        raise ConfigError(f"regime: {exc}") from None

    campaign_tbl = obj.get("campaign", {})
    _check_keys(campaign_tbl, {"seeds"}, "campaign")
    seeds = campaign_tbl.get("seeds")
    if seeds is None:
        seeds = tuple(range(1, regime.iterations + 1))
    else:
        if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
            raise ConfigError("campaign.seeds must be a list of integers")
        seeds = tuple(seeds)

    ensemble_tbl = obj.get("ensemble", {})
    _check_keys(ensemble_tbl, {"tie_policy"}, "ensemble")
    tie_policy_raw = ensemble_tbl.get("tie_policy", TiePolicy.REQUIRE_ODD.value)
    try:
        tie_policy = TiePolicy(tie_policy_raw)
    except ValueError:
        raise ConfigError(
            f"ensemble.tie_policy must be one of {[p.value for p in TiePolicy]}, "
            f"got {tie_policy_raw!r}"
        ) from None

    output_tbl = obj.get("output", {})
    _check_keys(output_tbl, {"registry"}, "output")
    registry_root = output_tbl.get("registry")
    if registry_root is not None:
        registry_root = (config_dir / str(registry_root)).resolve()

    search_tbl = obj.get("search", {})
    _check_keys(
        search_tbl,
        {"trials", "seed", "parallelism", "learning_rate", "weight_decay", "batch_size"},
        "search",
    )
    try:
        search_space = hpo.SearchSpace(
            learning_rate=tuple(search_tbl.get("learning_rate", hpo.DEFAULT_SEARCH_SPACE.learning_rate)),
            weight_decay=tuple(search_tbl.get("weight_decay", hpo.DEFAULT_SEARCH_SPACE.weight_decay)),
            batch_size=tuple(search_tbl.get("batch_size", hpo.DEFAULT_SEARCH_SPACE.batch_size)),
        )
    except ToolkitError as exc:
        raise ConfigError(f"search space: {exc}") from None

    return ProjectConfig(
        config_dir=config_dir,
        data_paths=data_paths,
        data_format=data_format,
        backbone=backbone,
        hyperparameters=hyperparameters,
        hyperparameters_from_search=from_search,
        regime=regime,
        seeds=seeds,
        tie_policy=tie_policy,
        registry_root=registry_root,
        adapter_options=dict(obj.get("adapter", {})),
        search_space=search_space,
        search_trials=search_tbl.get("trials", hpo.DEFAULT_TRIAL_BUDGET),
        search_seed=search_tbl.get("seed", 1),
        search_parallelism=search_tbl.get("parallelism", 1),
    )


def _registry_for(cfg: ProjectConfig, args) -> RunRegistry:
    root = getattr(args, "registry", None) or cfg.registry_root or os.environ.get(REGISTRY_ENV_VAR)
    if root is None:
        raise ConfigError(
            "no registry root: pass --registry, set [output].registry in the "
            f"config, or export {REGISTRY_ENV_VAR}"
        )
    return RunRegistry(Path(root))


def _load_split(cfg: ProjectConfig, split: str) -> LabeledDataset:
    path = cfg.data_paths.get(split)
    if path is None:
        raise ConfigError(f"config has no data.{split} path")
    if not path.is_file():
        raise ConfigError(f"data.{split} path does not exist: {path}")
    return load_dataset(path, cfg.data_format, split_name=split)


def _check_splits_exist(cfg: ProjectConfig, splits: Sequence[str]) -> None:
    # Validate every referenced path before any work begins.
    for split in splits:
        path = cfg.data_paths.get(split)
        if path is None:
            raise ConfigError(f"config has no data.{split} path")
        if not path.is_file():
            raise ConfigError(f"data.{split} path does not exist: {path}")


def _resolve_hyperparameters(cfg: ProjectConfig, registry: Optional[RunRegistry]) -> Hyperparameters:
    if cfg.hyperparameters is not None:
        return cfg.hyperparameters
    if cfg.hyperparameters_from_search:
        if registry is None:
            raise ConfigError("hyperparameters = 'search' needs a registry root")
        best_path = registry.root / "search" / "best.json"
        if not best_path.is_file():
            raise ConfigError(
                f"hyperparameters = 'search' but {best_path} does not exist; "
                "run `textcamp tune` first"
            )
        obj = json.loads(best_path.read_text(encoding="utf-8"))["hyperparameters"]
        return Hyperparameters(
            learning_rate=obj["learning_rate"],
            weight_decay=obj["weight_decay"],
            batch_size=obj["batch_size"],
        )
    return default_hyperparameters(cfg.backbone)


# --- subcommands ------------------------------------------------------------

def cmd_train(cfg: ProjectConfig, args) -> int:
    registry = _registry_for(cfg, args)
    _check_splits_exist(cfg, ("train", "validation"))
    train_ds = _load_split(cfg, "train")
    validation_ds = _load_split(cfg, "validation")

    seeds = args.seeds or cfg.seeds
    hp = _resolve_hyperparameters(cfg, registry)
    base = RunConfig(backbone=cfg.backbone, hyperparameters=hp, regime=cfg.regime, seed=seeds[0])
    adapter = resolve_adapter(cfg.backbone.family, cfg.adapter_options)

    campaign = trainer.run_campaign(base, seeds, train_ds, validation_ds, adapter, registry)

    print(f"{'seed':>6}  {'best_epoch':>10}  {'best_f1':>9}  run_id")
    for run in campaign.runs:
        print(
            f"{run.config.seed:>6}  {run.best_epoch:>10}  "
            f"{run.best_f1:>9.6f}  {run.run_id}"
        )
    stats = metrics.run_statistics(campaign.best_f1s)
    if stats.sd is None:
        print(f"mean F1 {stats.mean:.6f}")
    else:
        print(f"mean F1 {stats.mean:.6f}  SD {stats.sd:.6f}")
    return 0


def cmd_tune(cfg: ProjectConfig, args) -> int:
    registry = _registry_for(cfg, args)
    _check_splits_exist(cfg, ("train", "validation"))
    train_ds = _load_split(cfg, "train")
    validation_ds = _load_split(cfg, "validation")

    trials = args.trials if args.trials is not None else cfg.search_trials
    if trials < 1:
        raise ConfigError(f"search.trials must be >= 1, got {trials}")
    seed = args.search_seed if args.search_seed is not None else cfg.search_seed
    parallelism = args.parallelism if args.parallelism is not None else cfg.search_parallelism
    if parallelism < 1:
        raise ConfigError(f"search.parallelism must be >= 1, got {parallelism}")

    scratch_root = registry.root / "search-runs"
    counter = itertools.count()
    counter_lock = threading.Lock()

    # Trials differ only in hyperparameters: one iteration each, fixed seed 1.
    def objective(hp: Hyperparameters) -> float:
        with counter_lock:
            k = next(counter)
        trial_registry = RunRegistry(scratch_root / f"trial-{k:04d}")
        config = RunConfig(backbone=cfg.backbone, hyperparameters=hp, regime=cfg.regime, seed=1)
        adapter = resolve_adapter(cfg.backbone.family, cfg.adapter_options)
        run = trainer.run_iteration(config, train_ds, validation_ds, adapter, trial_registry)
        return run.best_f1

    result = hpo.execute_search(
        cfg.search_space, trials, seed, objective,
        parallelism=parallelism, log_dir=registry.root / "search",
    )
    done = sum(1 for t in result.trials if t.status is hpo.TrialStatus.DONE)
    print(f"completed {done}/{trials} trials")
    print(
        f"best: learning_rate={result.best.learning_rate:.6g} "
        f"weight_decay={result.best.weight_decay:.6g} "
        f"batch_size={result.best.batch_size} "
        f"objective={result.best_objective:.6f}"
    )
    print(f"wrote {registry.root / 'search' / 'search.jsonl'}")
    print(f"wrote {registry.root / 'search' / 'best.json'}")
    return 0


def _default_ensemble_members(registry: RunRegistry) -> list[str]:
    """All completed runs, ordered by (config fingerprint, seed)."""
    keyed = []
    for run_id in registry.list_runs():
        meta = registry.run_meta(run_id)
        keyed.append(((meta["config_fingerprint"], meta["seed"]), run_id))
    return [run_id for _, run_id in sorted(keyed)]


def cmd_ensemble(cfg: ProjectConfig, args) -> int:
    registry = _registry_for(cfg, args)
    run_ids = args.run_ids or _default_ensemble_members(registry)
    if not run_ids:
        raise ConfigError("no run ids given and the registry holds no completed runs")
    tie_policy = TiePolicy(args.tie_policy) if args.tie_policy else cfg.tie_policy
    model = build_ensemble(registry, run_ids, tie_policy)
    print(f"ensemble {model.ensemble_id}")
    for run_id in model.member_run_ids:
        print(f"  member {run_id}")
    return 0


def cmd_evaluate(cfg: ProjectConfig, args) -> int:
    registry = _registry_for(cfg, args)
    _check_splits_exist(cfg, (args.split,))
    gold = _load_split(cfg, args.split)
    if not gold.labeled:
        raise UnlabeledGold(f"cannot evaluate against unlabeled split {args.split!r}")

    entries = []
    for system_id in args.systems:
        if registry.kind_of(system_id) is None:
            raise UnknownRun(f"{system_id!r} is neither a run nor an ensemble in the registry")
        preds = registry.load_predictions(system_id, args.split)
        if preds is None:
            raise MissingPredictions(
                f"{system_id!r} has no stored predictions for {args.split!r}; "
                f"run `textcamp predict --system {system_id} --split {args.split}` first"
            )
        entries.append((system_id, preds, gold))

    references = published_reference_rows() if args.with_references else ()
    report = metrics.comparison_report(entries, references)

    rendered = metrics.render_report_markdown(report)
    reports_dir = registry.root / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    md_path = reports_dir / f"comparison-{args.split}.md"
    json_path = reports_dir / f"comparison-{args.split}.json"
    md_path.write_text(rendered, encoding="utf-8")
    json_path.write_text(
        json.dumps(metrics.report_to_json_dict(report, args.split), indent=2) + "\n",
        encoding="utf-8",
    )
    print(rendered, end="")
    print(f"wrote {md_path}", file=sys.stderr)
    print(f"wrote {json_path}", file=sys.stderr)
    return 0


def cmd_predict(cfg: ProjectConfig, args) -> int:
    registry = _registry_for(cfg, args)
    _check_splits_exist(cfg, (args.split,))
    ds = _load_split(cfg, args.split)

    kind = registry.kind_of(args.system)
    if kind is None:
        raise UnknownRun(f"{args.system!r} is neither a run nor an ensemble in the registry")
    system = registry.load_run(args.system) if kind == "run" else registry.load_ensemble(args.system)

    pset = trainer.predict(system, ds, registry)
    registry.save_predictions(args.system, pset)
    out_path = Path(args.out) if args.out else registry.root / "submissions" / f"{args.system}-{args.split}.tsv"
    write_predictions_tsv(pset, out_path)
    print(f"wrote {len(pset)} predictions to {out_path}")
    return 0


def cmd_report(cfg: ProjectConfig, args) -> int:
    registry = _registry_for(cfg, args)

    if args.confusion:
        _check_splits_exist(cfg, (args.split,))
        gold = _load_split(cfg, args.split)
        preds = registry.load_predictions(args.confusion, args.split)
        if preds is None:
            raise MissingPredictions(
                f"{args.confusion!r} has no stored predictions for {args.split!r}"
            )
        cm = metrics.confusion_matrix(preds, gold)
        print(metrics.render_confusion(cm, args.confusion_format), end="")
        return 0

    for split in ("train", "validation", "test"):
        path = cfg.data_paths.get(split)
        if path is not None and path.is_file():
            summary = summarize(load_dataset(path, cfg.data_format, split_name=split))
            print(json.dumps(summary.to_json_dict()))

    run_ids = registry.list_runs()
    if run_ids:
        print(f"{'seed':>6}  {'best_epoch':>10}  {'best_f1':>9}  run_id")
        for run_id in run_ids:
            meta = registry.run_meta(run_id)
            print(
                f"{meta['seed']:>6}  {meta['best_epoch']:>10}  "
                f"{meta['best_f1']:>9.6f}  {run_id}"
            )
    else:
        print("no completed runs")
    for ens_id in registry.list_ensembles():
        model = registry.load_ensemble(ens_id)
        members = ", ".join(model.member_run_ids)
        print(f"ensemble {ens_id} [{model.tie_policy.value}]: {members}")
    return 0


# --- argument parsing -------------------------------------------------------

def _comma_ints(value: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textcamp",
        description="Multi-seed fine-tuning campaigns, majority-vote ensembles, "
        "and random hyperparameter search for binary text classification.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-c", "--config", required=True, help="project config file (TOML or JSON)")
        p.add_argument("--registry", help=f"registry root (overrides config and ${REGISTRY_ENV_VAR})")

    p = sub.add_parser("train", help="run a multi-seed campaign and print the per-run table")
    common(p)
    p.add_argument("--seeds", type=_comma_ints, help="override campaign seeds, e.g. 1,2,3")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("tune", help="random hyperparameter search with FIFO scheduling")
    common(p)
    p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--search-seed", type=int, help="sampling seed")
    p.add_argument("--parallelism", type=int, help="concurrent trials")
    p.set_defaults(fn=cmd_tune)

    p = sub.add_parser("ensemble", help="combine runs into a majority-vote ensemble")
    common(p)
    p.add_argument("run_ids", nargs="*", help="member run ids (default: all completed runs)")
    p.add_argument("--tie-policy", choices=[t.value for t in TiePolicy])
    p.set_defaults(fn=cmd_ensemble)

    p = sub.add_parser("evaluate", help="score systems against a labeled split")
    common(p)
    p.add_argument("--systems", nargs="+", required=True, help="run or ensemble ids")
    p.add_argument("--split", default="validation")
    p.add_argument(
        "--with-references", action="store_true",
        help="include bundled published reference rows in the report",
    )
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("predict", help="write a submission TSV for a split")
    common(p)
    p.add_argument("--system", required=True, help="run or ensemble id")
    p.add_argument("--split", default="test")
    p.add_argument("--out", help="output TSV path (default under the registry)")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("report", help="registry overview, dataset summaries, confusion tables")
    common(p)
    p.add_argument("--confusion", metavar="SYSTEM_ID", help="render a confusion matrix for one system")
    p.add_argument("--split", default="validation")
    p.add_argument("--confusion-format", choices=("text", "csv"), default="text")
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_project_config(args.config)
        return args.fn(cfg, args)
    except CampaignAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.completed:
            print("partial results:", file=sys.stderr)
            for run in exc.completed:
                print(
                    f"  seed {run.config.seed}: best epoch {run.best_epoch}, "
                    f"F1 {run.best_f1:.6f} ({run.run_id})",
                    file=sys.stderr,
                )
        return 1
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    raise SystemExit(main())
