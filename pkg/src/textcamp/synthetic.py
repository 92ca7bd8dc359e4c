"""Synthetic separable corpora for desk-scale pipeline runs.

Positive and negative examples draw their tokens from two disjoint keyword
vocabularies, so any bag-of-words classifier can separate them perfectly.
Useful for smoke-testing an installation end to end without real data.

Run as a module to write train/validation/test files:

    python -m textcamp.synthetic --out data/ --train 200 --validation 50 --test 50
"""

from __future__ import annotations

import argparse
import random
from pathlib import Path
from typing import Optional

from .corpus import Example, LabeledDataset, write_dataset

POSITIVE_VOCAB = (
    "aurora", "quartz", "meadow", "lantern", "drift",
    "ember", "willow", "harbor", "cobalt", "prism",
)
NEGATIVE_VOCAB = (
    "gravel", "mortar", "hinge", "tarmac", "girder",
    "sprocket", "flint", "rivet", "crank", "soot",
)


def separable_examples(
    n: int,
    seed: int,
    positive_count: Optional[int] = None,
    id_prefix: str = "ex",
    labeled: bool = True,
) -> list[Example]:
    """Generate ``n`` examples, each 5-12 tokens from its class vocabulary."""
    if positive_count is None:
        positive_count = n // 2
    if not 0 <= positive_count <= n:
        raise ValueError(f"positive_count must be in [0, {n}]")
    rng = random.Random(seed)
    classes = [1] * positive_count + [0] * (n - positive_count)
    rng.shuffle(classes)
    out = []
    for i, cls in enumerate(classes):
        vocab = POSITIVE_VOCAB if cls else NEGATIVE_VOCAB
        text = " ".join(rng.choice(vocab) for _ in range(rng.randint(5, 12)))
        out.append(Example(id=f"{id_prefix}{i:05d}", text=text, label=cls if labeled else None))
    return out


def separable_dataset(
    split_name: str,
    n: int,
    seed: int,
    positive_count: Optional[int] = None,
    labeled: bool = True,
) -> LabeledDataset:
    return LabeledDataset(
        split_name,
        tuple(
            separable_examples(
                n, seed, positive_count, id_prefix=f"{split_name[:2]}-", labeled=labeled
            )
        ),
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("--train", type=int, default=200)
    parser.add_argument("--validation", type=int, default=50)
    parser.add_argument("--test", type=int, default=50)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--format", choices=("tsv", "csv", "jsonl"), default="tsv")
    parser.add_argument(
        "--unlabeled-test", action="store_true",
        help="write the test split without labels, like a real submission setting",
    )
    args = parser.parse_args(argv)

    args.out.mkdir(parents=True, exist_ok=True)
    sizes = {"train": args.train, "validation": args.validation, "test": args.test}
    for offset, (split, n) in enumerate(sizes.items()):
        labeled = not (split == "test" and args.unlabeled_test)
        ds = separable_dataset(split, n, args.seed + offset, labeled=labeled)
        path = args.out / f"{split}.{args.format}"
        write_dataset(ds, path, args.format)
        print(f"wrote {len(ds)} examples to {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
