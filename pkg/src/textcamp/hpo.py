"""Random hyperparameter search with strict FIFO trial scheduling.

Configurations are sampled up front from the search space (log-uniform on
the continuous dimensions, uniform over the batch-size choices), so the
sampled set depends only on (space, n, seed) and never on parallelism.
Trials then start strictly in generation order (a trial may not begin
before every earlier trial has begun) while up to ``parallelism`` of them
run concurrently. Running trials are never preempted or stopped early.
"""

from __future__ import annotations

import enum
import json
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .errors import AllTrialsFailed, EmptySpace
from .runspec import Hyperparameters

logger = logging.getLogger(__name__)

# Brackets chosen to contain the bundled backbones' tuned values with margin.
DEFAULT_TRIAL_BUDGET = 20


@dataclass(frozen=True)
class SearchSpace:
    """Bounds for the tunable triple.

    Continuous dimensions are (lo, hi) intervals sampled log-uniformly;
    degenerate intervals (lo == hi) pin the dimension. ``batch_size`` is a
    finite choice set.
    """

    learning_rate: tuple[float, float] = (1e-6, 5e-5)
    weight_decay: tuple[float, float] = (1e-3, 0.1)
    batch_size: tuple[int, ...] = (8, 16, 32)

    def __post_init__(self):
        object.__setattr__(self, "batch_size", tuple(self.batch_size))
        for name in ("learning_rate", "weight_decay"):
            lo, hi = getattr(self, name)
            if not (lo > 0 and lo <= hi):
                raise EmptySpace(f"{name} interval must satisfy 0 < lo <= hi, got ({lo}, {hi})")
        if self.learning_rate[1] >= 1.0:
            raise EmptySpace("learning_rate upper bound must be < 1")
        if not self.batch_size:
            raise EmptySpace("batch_size choice set is empty")
        for b in self.batch_size:
            if int(b) != b or b < 1:
                raise EmptySpace(f"batch sizes must be positive integers, got {b!r}")


DEFAULT_SEARCH_SPACE = SearchSpace()


class TrialStatus(str, enum.Enum):
    PENDING = "pending"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


@dataclass
class Trial:
    """One sampled configuration and its lifecycle through the search."""

    index: int
    hyperparameters: Hyperparameters
    status: TrialStatus = TrialStatus.PENDING
    objective: Optional[float] = None
    start_seq: Optional[int] = None
    wall_time_s: Optional[float] = None
    error: Optional[str] = None

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "hyperparameters": {
                "learning_rate": self.hyperparameters.learning_rate,
                "weight_decay": self.hyperparameters.weight_decay,
                "batch_size": self.hyperparameters.batch_size,
            },
            "status": self.status.value,
            "objective": self.objective,
            "start_seq": self.start_seq,
            "wall_time_s": self.wall_time_s,
            "error": self.error,
        }


@dataclass(frozen=True)
class SearchResult:
    trials: tuple[Trial, ...]
    best: Hyperparameters
    best_objective: float

    @property
    def best_trial(self) -> Trial:
        for t in self.trials:
            if t.status is TrialStatus.DONE and t.objective == self.best_objective:
                return t
        raise AssertionError("no trial matches best_objective")


def generate_trials(space: SearchSpace, n: int, seed: int) -> list[Hyperparameters]:
    """Sample ``n`` configurations; fully determined by (space, n, seed)."""
    if n < 1:
        raise ValueError(f"trial count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)

    def log_uniform(lo: float, hi: float) -> float:
        if lo == hi:  # keep the exact constant: exp(log(x)) may round
            rng.uniform(math.log(lo), math.log(hi))  # consume one draw anyway
            return lo
        return math.exp(rng.uniform(math.log(lo), math.log(hi)))

    out = []
    for _ in range(n):
        lr = log_uniform(*space.learning_rate)
        wd = log_uniform(*space.weight_decay)
        bs = space.batch_size[int(rng.integers(0, len(space.batch_size)))]
        out.append(Hyperparameters(learning_rate=lr, weight_decay=wd, batch_size=bs))
    return out


class _FifoGate:
    """Blocks each trial until every earlier trial has started."""

    def __init__(self):
        self._cond = threading.Condition()
        self._next = 0

    def admit(self, index: int) -> int:
        with self._cond:
            while index != self._next:
                self._cond.wait()
            seq = self._next
            self._next += 1
            self._cond.notify_all()
        return seq


def execute_search(
    space: SearchSpace,
    n: int,
    seed: int,
    objective_fn: Callable[[Hyperparameters], float],
    parallelism: int = 1,
    log_dir: Optional[Union[str, Path]] = None,
) -> SearchResult:
    """Run ``n`` trials of ``objective_fn`` (higher is better) FIFO-scheduled.

    A failed trial (an exception, or a non-finite objective) is recorded
    with its diagnostic and excluded from the argmax; the search continues.
    The best configuration is the earliest done trial attaining the maximal
    objective. With ``log_dir`` set, every finished trial is appended to
    ``search.jsonl`` and the winner written to ``best.json``.

    Raises:
        AllTrialsFailed: no trial completed.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    trials = [Trial(i, hp) for i, hp in enumerate(generate_trials(space, n, seed))]

    gate = _FifoGate()
    log_lock = threading.Lock()
    log_file = None
    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = (log_dir / "search.jsonl").open("w", encoding="utf-8")

    def run_trial(trial: Trial) -> None:
        trial.start_seq = gate.admit(trial.index)
        trial.status = TrialStatus.RUNNING
        started = time.perf_counter()
        try:
            value = float(objective_fn(trial.hyperparameters))
            if not math.isfinite(value):
                raise ValueError(f"objective returned non-finite value {value!r}")
            trial.objective = value
            trial.status = TrialStatus.DONE
        except Exception as exc:
            trial.status = TrialStatus.FAILED
            trial.error = f"{type(exc).__name__}: {exc}"
            logger.warning("trial %d failed: %s", trial.index, trial.error)
        trial.wall_time_s = time.perf_counter() - started
        if log_file is not None:
            with log_lock:
                log_file.write(json.dumps(trial.to_json_dict()) + "\n")
                log_file.flush()

    try:
        if parallelism == 1:
            for trial in trials:
                run_trial(trial)
        else:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                futures = [pool.submit(run_trial, t) for t in trials]
                for f in futures:
                    f.result()
    finally:
        if log_file is not None:
            log_file.close()

    best_trial: Optional[Trial] = None
    for trial in trials:
        if trial.status is TrialStatus.DONE:
            if best_trial is None or trial.objective > best_trial.objective:
                best_trial = trial
    if best_trial is None:
        raise AllTrialsFailed(f"all {n} trials failed; see the trial log for diagnostics")

    result = SearchResult(
        trials=tuple(trials),
        best=best_trial.hyperparameters,
        best_objective=best_trial.objective,
    )
    if log_dir is not None:
        best_payload = {
            "hyperparameters": {
                "learning_rate": result.best.learning_rate,
                "weight_decay": result.best.weight_decay,
                "batch_size": result.best.batch_size,
            },
            "objective": result.best_objective,
            "trial_index": best_trial.index,
        }
        (Path(log_dir) / "best.json").write_text(
            json.dumps(best_payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return result
