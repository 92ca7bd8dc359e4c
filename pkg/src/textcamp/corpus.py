"""Dataset ingestion and accounting for labeled tweet splits.

The canonical interchange format is UTF-8 TSV with the header
``id<TAB>text<TAB>label`` (the label column is optional for unlabeled test
splits). CSV and JSONL are accepted alternatives; texts containing tab or
newline characters are representable only in JSONL, and the flat formats
reject them loudly instead of guessing.

No text normalization is applied at ingestion. Lowercasing, handle
stripping, and the like are the concern of whichever backbone adapter
consumes the data, so that the file on disk round-trips byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import DuplicateId, EmptyDataset, MalformedRecord

SPLIT_NAMES = ("train", "validation", "test")
FORMATS = ("tsv", "csv", "jsonl")

_SUFFIX_TO_FORMAT = {".tsv": "tsv", ".csv": "csv", ".jsonl": "jsonl"}


@dataclass(frozen=True)
class Example:
    """One tweet with an opaque id and an optional binary label."""

    id: str
    text: str
    label: Optional[int] = None

    def __post_init__(self):
        if not self.id or not self.id.strip():
            raise MalformedRecord("example id must be non-empty")
        if not self.text.strip():
            raise MalformedRecord(f"example {self.id!r}: text is empty after trimming")
        if self.label is not None and self.label not in (0, 1):
            raise MalformedRecord(
                f"example {self.id!r}: label must be 0 or 1, got {self.label!r}"
            )


@dataclass(frozen=True)
class LabeledDataset:
    """An ordered split of examples; order is load order and is significant.

    Prediction alignment relies on example order being stable across loads
    of the same file, so examples are kept exactly as parsed.
    """

    split_name: str
    examples: tuple[Example, ...]

    def __post_init__(self):
        if self.split_name not in SPLIT_NAMES:
            raise ValueError(
                f"split_name must be one of {SPLIT_NAMES}, got {self.split_name!r}"
            )
        object.__setattr__(self, "examples", tuple(self.examples))
        seen = set()
        for ex in self.examples:
            if ex.id in seen:
                raise DuplicateId(f"duplicate example id {ex.id!r} in {self.split_name}")
            seen.add(ex.id)
        n_labeled = sum(1 for ex in self.examples if ex.label is not None)
        if 0 < n_labeled < len(self.examples):
            raise MalformedRecord(
                f"{self.split_name}: mixed labeling ({n_labeled} of "
                f"{len(self.examples)} examples carry labels)"
            )

    @property
    def labeled(self) -> bool:
        return bool(self.examples) and all(ex.label is not None for ex in self.examples)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(ex.id for ex in self.examples)

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(ex.text for ex in self.examples)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(ex.label for ex in self.examples if ex.label is not None)

    def __len__(self) -> int:
        return len(self.examples)


@dataclass(frozen=True)
class DatasetSummary:
    split_name: str
    total_count: int
    positive_count: Optional[int] = None
    negative_count: Optional[int] = None

    def to_json_dict(self) -> dict:
        out = {"split_name": self.split_name, "total_count": self.total_count}
        if self.positive_count is not None:
            out["positive_count"] = self.positive_count
            out["negative_count"] = self.negative_count
        return out


def summarize(ds: LabeledDataset) -> DatasetSummary:
    """Count totals and, for labeled splits, the per-class breakdown."""
    if not ds.labeled:
        return DatasetSummary(ds.split_name, len(ds))
    positive = sum(ex.label for ex in ds.examples)
    return DatasetSummary(ds.split_name, len(ds), positive, len(ds) - positive)


def infer_format(path: Path) -> str:
    fmt = _SUFFIX_TO_FORMAT.get(Path(path).suffix.lower())
    if fmt is None:
        raise ValueError(
            f"cannot infer dataset format from {path}; pass format= explicitly"
        )
    return fmt


def load_dataset(path, format: Optional[str] = None, split_name: str = "train") -> LabeledDataset:
    """Load a dataset file, preserving file order.

    Args:
        path: the file to read.
        format: one of {tsv, csv, jsonl}; inferred from the suffix if omitted.
        split_name: one of {train, validation, test}.

    Raises:
        MalformedRecord: a row is missing id/text, carries a label outside
            {0, 1}, or (flat formats) contains tab/newline characters.
        DuplicateId: an id occurs twice.
        EmptyDataset: the file holds no examples.
    """
    path = Path(path)
    fmt = format or infer_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown dataset format {fmt!r}")
    text = path.read_text(encoding="utf-8")
    if fmt == "tsv":
        examples = _parse_tsv(text, path)
    elif fmt == "csv":
        examples = _parse_csv(text, path)
    else:
        examples = _parse_jsonl(text, path)
    if not examples:
        raise EmptyDataset(f"{path}: no examples")
    return LabeledDataset(split_name, tuple(examples))


def write_dataset(ds: LabeledDataset, path, format: Optional[str] = None) -> None:
    """Write a dataset so that loading it back yields an identical dataset."""
    path = Path(path)
    fmt = format or infer_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown dataset format {fmt!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "tsv":
        payload = _render_tsv(ds)
    elif fmt == "csv":
        payload = _render_csv(ds)
    else:
        payload = _render_jsonl(ds)
    path.write_text(payload, encoding="utf-8")


# --- flat-format helpers ---

def _check_flat_text(value: str, where: str) -> None:
    # Tab/newline are only representable in JSONL.
    if "\t" in value or "\n" in value or "\r" in value:
        raise MalformedRecord(
            f"{where}: tab or newline characters are only supported in jsonl"
        )


def _parse_label(raw: str, where: str) -> int:
    if raw == "0":
        return 0
    if raw == "1":
        return 1
    raise MalformedRecord(f"{where}: label must be exactly '0' or '1', got {raw!r}")


def _rows_to_examples(rows: Iterable[Sequence[str]], has_label: bool, where: str) -> list[Example]:
    width = 3 if has_label else 2
    examples = []
    for lineno, row in rows:
        if len(row) != width:
            raise MalformedRecord(
                f"{where} line {lineno}: expected {width} fields, got {len(row)}"
            )
        label = _parse_label(row[2], f"{where} line {lineno}") if has_label else None
        try:
            examples.append(Example(id=row[0], text=row[1], label=label))
        except MalformedRecord as exc:
            raise MalformedRecord(f"{where} line {lineno}: {exc}") from None
    return examples


def _parse_tsv(text: str, path: Path) -> list[Example]:
    lines = text.splitlines()
    if not lines:
        raise EmptyDataset(f"{path}: empty file")
    header = lines[0].split("\t")
    if header == ["id", "text", "label"]:
        has_label = True
    elif header == ["id", "text"]:
        has_label = False
    else:
        raise MalformedRecord(f"{path}: bad TSV header {lines[0]!r}")
    rows = ((i + 2, line.split("\t")) for i, line in enumerate(lines[1:]))
    return _rows_to_examples(rows, has_label, str(path))


def _render_tsv(ds: LabeledDataset) -> str:
    has_label = ds.labeled
    out = ["id\ttext\tlabel" if has_label else "id\ttext"]
    for ex in ds.examples:
        _check_flat_text(ex.id, f"example {ex.id!r}")
        _check_flat_text(ex.text, f"example {ex.id!r}")
        if has_label:
            out.append(f"{ex.id}\t{ex.text}\t{ex.label}")
        else:
            out.append(f"{ex.id}\t{ex.text}")
    return "\n".join(out) + "\n"


def _parse_csv(text: str, path: Path) -> list[Example]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataset(f"{path}: empty file") from None
    if header == ["id", "text", "label"]:
        has_label = True
    elif header == ["id", "text"]:
        has_label = False
    else:
        raise MalformedRecord(f"{path}: bad CSV header {header!r}")
    rows = []
    for i, row in enumerate(reader):
        for cell in row:
            _check_flat_text(cell, f"{path} line {i + 2}")
        rows.append((i + 2, row))
    return _rows_to_examples(rows, has_label, str(path))


def _render_csv(ds: LabeledDataset) -> str:
    has_label = ds.labeled
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "text", "label"] if has_label else ["id", "text"])
    for ex in ds.examples:
        _check_flat_text(ex.id, f"example {ex.id!r}")
        _check_flat_text(ex.text, f"example {ex.id!r}")
        writer.writerow([ex.id, ex.text, ex.label] if has_label else [ex.id, ex.text])
    return buf.getvalue()


def _parse_jsonl(text: str, path: Path) -> list[Example]:
    examples = []
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        where = f"{path} line {i + 1}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"{where}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise MalformedRecord(f"{where}: expected a JSON object")
        if "id" not in obj or "text" not in obj:
            raise MalformedRecord(f"{where}: missing required key 'id' or 'text'")
        if not isinstance(obj["id"], str) or not isinstance(obj["text"], str):
            raise MalformedRecord(f"{where}: 'id' and 'text' must be strings")
        label = obj.get("label")
        if label is not None and (type(label) is not int or label not in (0, 1)):
            raise MalformedRecord(f"{where}: label must be integer 0 or 1, got {label!r}")
        try:
            examples.append(Example(id=obj["id"], text=obj["text"], label=label))
        except MalformedRecord as exc:
            raise MalformedRecord(f"{where}: {exc}") from None
    return examples


def _render_jsonl(ds: LabeledDataset) -> str:
    lines = []
    for ex in ds.examples:
        obj = {"id": ex.id, "text": ex.text}
        if ex.label is not None:
            obj["label"] = ex.label
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "\n".join(lines) + "\n"
