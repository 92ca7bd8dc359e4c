import itertools
import random
from collections import Counter

import pytest

from textcamp.ensemble import (
    EnsembleModel,
    PredictionSet,
    TiePolicy,
    derive_ensemble_id,
    majority_vote,
)
from textcamp.errors import EvenMembershipWithRequireOdd, MisalignedMembers


def pset(labels, source="m", ids=None):
    labels = tuple(labels)
    if ids is None:
        ids = tuple(f"e{i:04d}" for i in range(len(labels)))
    return PredictionSet(
        source_id=source, split_name="validation", labels=labels, example_ids=ids
    )


def vote_oracle(member_labels, tie_policy):
    out = []
    for votes in zip(*member_labels):
        counts = Counter(votes)
        ones, zeros = counts[1], counts[0]
        if ones > zeros:
            out.append(1)
        elif zeros > ones:
            out.append(0)
        else:
            out.append(0 if tie_policy is TiePolicy.TIE_TO_ZERO else 1)
    return tuple(out)


def run_vote(member_labels, tie_policy=TiePolicy.REQUIRE_ODD):
    members = [pset(labels, source=f"m{k}") for k, labels in enumerate(member_labels)]
    return majority_vote(members, tie_policy).labels


def test_complete_three_member_enumeration():
    # Every {0,1}^3 voting pattern on a single example.
    for pattern in itertools.product([0, 1], repeat=3):
        result = run_vote([[v] for v in pattern])
        assert result == (1 if sum(pattern) >= 2 else 0,)


def test_random_instances_match_counting_oracle():
    rng = random.Random(90210)
    for _ in range(10_000):
        n = rng.choice([1, 3, 5])
        width = rng.randint(1, 12)
        member_labels = [[rng.randint(0, 1) for _ in range(width)] for _ in range(n)]
        assert run_vote(member_labels) == vote_oracle(member_labels, TiePolicy.REQUIRE_ODD)


def test_unanimity():
    rng = random.Random(11)
    for _ in range(1000):
        n = rng.choice([1, 3, 5, 7])
        width = rng.randint(1, 8)
        labels = [rng.randint(0, 1) for _ in range(width)]
        assert run_vote([labels] * n) == tuple(labels)


def test_permutation_invariance():
    rng = random.Random(22)
    for _ in range(1000):
        n = rng.choice([3, 5])
        width = rng.randint(1, 8)
        member_labels = [[rng.randint(0, 1) for _ in range(width)] for _ in range(n)]
        base = run_vote(member_labels)
        rng.shuffle(member_labels)
        assert run_vote(member_labels) == base


def test_idempotence_under_replication():
    # Replicating every member an odd number of times leaves the vote unchanged.
    rng = random.Random(33)
    for _ in range(1000):
        n = rng.choice([1, 3])
        width = rng.randint(1, 8)
        member_labels = [[rng.randint(0, 1) for _ in range(width)] for _ in range(n)]
        assert run_vote(member_labels * 3) == run_vote(member_labels)


def test_single_flip_monotonicity():
    # Flipping one member's vote 0 -> 1 never lowers the ensemble output.
    rng = random.Random(44)
    for _ in range(1000):
        n = rng.choice([3, 5])
        width = rng.randint(1, 8)
        member_labels = [[rng.randint(0, 1) for _ in range(width)] for _ in range(n)]
        base = run_vote(member_labels)
        k = rng.randrange(n)
        j = rng.randrange(width)
        if member_labels[k][j] == 1:
            continue
        member_labels[k][j] = 1
        flipped = run_vote(member_labels)
        assert all(b <= f for b, f in zip(base, flipped))
        assert all(b == f for i, (b, f) in enumerate(zip(base, flipped)) if i != j)


def test_even_membership_require_odd_raises():
    members = [pset([0, 1]), pset([1, 1])]
    with pytest.raises(EvenMembershipWithRequireOdd):
        majority_vote(members, TiePolicy.REQUIRE_ODD)


def test_even_membership_tie_to_zero():
    members = [pset([0, 1, 1]), pset([1, 1, 0])]
    result = majority_vote(members, TiePolicy.TIE_TO_ZERO)
    assert result.labels == (0, 1, 0)


def test_even_membership_tie_to_one():
    members = [pset([0, 1, 1]), pset([1, 1, 0])]
    result = majority_vote(members, TiePolicy.TIE_TO_ONE)
    assert result.labels == (1, 1, 1)


def test_even_membership_oracle_with_tie_policies():
    rng = random.Random(55)
    for policy in (TiePolicy.TIE_TO_ZERO, TiePolicy.TIE_TO_ONE):
        for _ in range(500):
            n = rng.choice([2, 4])
            width = rng.randint(1, 8)
            member_labels = [[rng.randint(0, 1) for _ in range(width)] for _ in range(n)]
            members = [pset(lab, source=f"m{k}") for k, lab in enumerate(member_labels)]
            assert majority_vote(members, policy).labels == vote_oracle(member_labels, policy)


def test_misaligned_members_raise():
    a = pset([0, 1], ids=("x1", "x2"))
    b = pset([1, 0], ids=("x1", "DIFFERENT"))
    c = pset([1, 1], ids=("x1", "x2"))
    with pytest.raises(MisalignedMembers):
        majority_vote([a, b, c], TiePolicy.REQUIRE_ODD)


def test_different_split_names_raise():
    a = pset([0, 1])
    b = PredictionSet(
        source_id="m1", split_name="test", labels=(1, 0), example_ids=a.example_ids
    )
    c = pset([1, 1], source="m2")
    with pytest.raises(MisalignedMembers):
        majority_vote([a, b, c], TiePolicy.REQUIRE_ODD)


def test_empty_members_raise():
    with pytest.raises(ValueError):
        majority_vote([], TiePolicy.REQUIRE_ODD)


def test_vote_result_carries_ensemble_source():
    members = [pset([1], source=f"m{k}") for k in range(3)]
    result = majority_vote(members, TiePolicy.REQUIRE_ODD, source_id="ens-abc")
    assert result.source_id == "ens-abc"
    assert result.split_name == "validation"


def test_ensemble_id_stable_and_input_sensitive():
    a = derive_ensemble_id(("r1", "r2", "r3"), TiePolicy.REQUIRE_ODD)
    assert a == derive_ensemble_id(("r1", "r2", "r3"), TiePolicy.REQUIRE_ODD)
    assert a != derive_ensemble_id(("r1", "r2", "r4"), TiePolicy.REQUIRE_ODD)
    assert a != derive_ensemble_id(("r1", "r2", "r3"), TiePolicy.TIE_TO_ZERO)
    assert a.startswith("ens-")


def test_ensemble_model_validates_require_odd():
    with pytest.raises(EvenMembershipWithRequireOdd):
        EnsembleModel(member_run_ids=("r1", "r2"), tie_policy=TiePolicy.REQUIRE_ODD)


def test_prediction_set_rejects_bad_labels():
    with pytest.raises(ValueError):
        PredictionSet(
            source_id="m", split_name="validation", labels=(0, 2), example_ids=("a", "b")
        )


def test_prediction_set_rejects_length_mismatch():
    with pytest.raises(ValueError):
        PredictionSet(
            source_id="m", split_name="validation", labels=(0, 1), example_ids=("a",)
        )
