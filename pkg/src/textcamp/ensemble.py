"""Hard majority voting over aligned prediction sets.

Each member contributes one hard label per example; the ensemble emits the
class with strictly more votes. Ties can only occur with an even member
count, which the default policy refuses outright rather than silently
biasing the output.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Sequence

from .errors import (
    EvenMembershipWithRequireOdd,
    MisalignedMembers,
    MissingPredictions,
    UnknownRun,
)


class TiePolicy(str, enum.Enum):
    REQUIRE_ODD = "require-odd"
    TIE_TO_ZERO = "tie-to-zero"
    TIE_TO_ONE = "tie-to-one"


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class PredictionSet:
    """Ordered hard labels for one split, aligned with the split's example ids.

    ``created_at`` is bookkeeping only and never participates in equality.
    """

    source_id: str
    split_name: str
    labels: tuple[int, ...]
    example_ids: tuple[str, ...]
    created_at: str = field(default_factory=_now_iso, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "example_ids", tuple(self.example_ids))
        if len(self.labels) != len(self.example_ids):
            raise ValueError(
                f"{self.source_id}: {len(self.labels)} labels for "
                f"{len(self.example_ids)} ids"
            )
        for lab in self.labels:
            if lab not in (0, 1):
                raise ValueError(f"{self.source_id}: labels must be 0/1, got {lab!r}")

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class EnsembleModel:
    """An ordered set of member runs combined by hard majority vote."""

    member_run_ids: tuple[str, ...]
    tie_policy: TiePolicy = TiePolicy.REQUIRE_ODD
    ensemble_id: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "member_run_ids", tuple(self.member_run_ids))
        object.__setattr__(self, "tie_policy", TiePolicy(self.tie_policy))
        n = len(self.member_run_ids)
        if n < 1:
            raise ValueError("an ensemble needs at least one member")
        if self.tie_policy is TiePolicy.REQUIRE_ODD and n % 2 == 0:
            raise EvenMembershipWithRequireOdd(
                f"{n} members under require-odd; use an odd count or pick a tie policy"
            )


def derive_ensemble_id(member_run_ids: Sequence[str], tie_policy: TiePolicy) -> str:
    blob = "\n".join([*member_run_ids, TiePolicy(tie_policy).value])
    return "ens-" + hashlib.sha256(blob.encode("utf-8")).hexdigest()[:10]


def majority_vote(
    members: Sequence[PredictionSet],
    tie_policy: TiePolicy = TiePolicy.REQUIRE_ODD,
    source_id: Optional[str] = None,
) -> PredictionSet:
    """Combine members' hard labels per example by vote count.

    All members must cover the same split with identical example id order.
    With an odd member count every example has a strict majority; with an
    even count, tied examples resolve per ``tie_policy``.

    Raises:
        MisalignedMembers: members differ in split, ids, or order.
        EvenMembershipWithRequireOdd: even member count under require-odd.
    """
    tie_policy = TiePolicy(tie_policy)
    if not members:
        raise ValueError("majority_vote needs at least one member")
    n = len(members)
    if tie_policy is TiePolicy.REQUIRE_ODD and n % 2 == 0:
        raise EvenMembershipWithRequireOdd(
            f"{n} members under require-odd; use an odd count or pick a tie policy"
        )
    first = members[0]
    for m in members[1:]:
        if m.split_name != first.split_name:
            raise MisalignedMembers(
                f"split mismatch: {m.source_id} covers {m.split_name!r}, "
                f"{first.source_id} covers {first.split_name!r}"
            )
        if m.example_ids != first.example_ids:
            raise MisalignedMembers(
                f"example ids of {m.source_id} do not match {first.source_id}"
            )

    labels = []
    for votes in zip(*(m.labels for m in members)):
        ones = sum(votes)
        zeros = n - ones
        if ones > zeros:
            labels.append(1)
        elif zeros > ones:
            labels.append(0)
        else:
            labels.append(0 if tie_policy is TiePolicy.TIE_TO_ZERO else 1)

    if source_id is None:
        source_id = derive_ensemble_id([m.source_id for m in members], tie_policy)
    return PredictionSet(
        source_id=source_id,
        split_name=first.split_name,
        labels=tuple(labels),
        example_ids=first.example_ids,
    )


def build_ensemble(registry, run_ids: Sequence[str], tie_policy=TiePolicy.REQUIRE_ODD) -> EnsembleModel:
    """Validate members against the registry and persist an ensemble manifest.

    Every member must exist and have stored validation predictions; the
    combined validation predictions are computed and stored alongside the
    manifest so the ensemble can be evaluated like any single run.

    Raises:
        UnknownRun: a member id is not in the registry.
        MissingPredictions: a member has no stored validation predictions.
    """
    run_ids = tuple(run_ids)
    member_predictions = []
    for run_id in run_ids:
        if not registry.has_run(run_id):
            raise UnknownRun(f"run {run_id!r} is not in the registry")
        preds = registry.load_predictions(run_id, "validation")
        if preds is None:
            raise MissingPredictions(f"run {run_id!r} has no validation predictions")
        member_predictions.append(preds)

    ensemble_id = derive_ensemble_id(run_ids, tie_policy)
    model = EnsembleModel(run_ids, TiePolicy(tie_policy), ensemble_id=ensemble_id)
    combined = majority_vote(member_predictions, model.tie_policy, source_id=ensemble_id)
    registry.save_ensemble(model)
    registry.save_predictions(ensemble_id, combined)
    return model
