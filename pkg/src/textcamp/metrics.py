"""Positive-class evaluation: confusion counts, precision/recall/F1, cross-run stats.

All headline scores target the positive class (label 1) only. Values are
stored at full precision; display formatting rounds to 6 decimal places.
Degenerate cases (zero denominators) score 0 and set a flag instead of
raising, so pathological configurations surface as bad scores rather than
crashed searches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .corpus import LabeledDataset
from .ensemble import PredictionSet
from .errors import MisalignedPredictions, UnlabeledGold


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts with the positive class = label 1."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class ClassificationMetrics:
    f1: float
    precision: float
    recall: float
    support_positive: int
    degenerate: bool = False


@dataclass(frozen=True)
class RunStatistics:
    """Per-run F1 list with arithmetic mean and sample SD (n-1 denominator)."""

    per_run_f1: tuple[float, ...]
    mean: float
    sd: Optional[float]


@dataclass(frozen=True)
class ReportRow:
    name: str
    f1: float
    precision: float
    recall: float
    source: str = "computed"  # or "published"


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ReportRow, ...]
    reference_rows: tuple[ReportRow, ...] = ()

    @property
    def all_rows(self) -> tuple[ReportRow, ...]:
        return self.reference_rows + self.rows


def confusion_matrix(pred: PredictionSet, gold: LabeledDataset) -> ConfusionMatrix:
    """Count tp/fp/fn/tn for predictions against a labeled split.

    Raises:
        UnlabeledGold: the gold split carries no labels.
        MisalignedPredictions: ids differ from the gold split's ids in order.
    """
    if not gold.labeled:
        raise UnlabeledGold(f"split {gold.split_name!r} has no gold labels")
    if pred.example_ids != gold.ids:
        raise MisalignedPredictions(
            f"prediction ids from {pred.source_id!r} do not match the "
            f"{gold.split_name} split in order"
        )
    tp = fp = fn = tn = 0
    for y_hat, ex in zip(pred.labels, gold.examples):
        if ex.label == 1:
            if y_hat == 1:
                tp += 1
            else:
                fn += 1
        else:
            if y_hat == 1:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def precision_recall_f1(cm: ConfusionMatrix) -> ClassificationMetrics:
    """precision = tp/(tp+fp), recall = tp/(tp+fn), f1 = 2tp/(2tp+fp+fn).

    Zero-denominator cases yield 0 for the affected score and set the
    degenerate flag.
    """
    degenerate = False
    if cm.tp + cm.fp > 0:
        precision = cm.tp / (cm.tp + cm.fp)
    else:
        precision, degenerate = 0.0, True
    if cm.tp + cm.fn > 0:
        recall = cm.tp / (cm.tp + cm.fn)
    else:
        recall, degenerate = 0.0, True
    if 2 * cm.tp + cm.fp + cm.fn > 0:
        f1 = 2 * cm.tp / (2 * cm.tp + cm.fp + cm.fn)
    else:
        f1, degenerate = 0.0, True
    return ClassificationMetrics(
        f1=f1,
        precision=precision,
        recall=recall,
        support_positive=cm.tp + cm.fn,
        degenerate=degenerate,
    )


def run_statistics(f1s: Sequence[float]) -> RunStatistics:
    """Mean and sample SD of per-run F1 scores; SD is absent for a single run."""
    f1s = tuple(float(x) for x in f1s)
    if not f1s:
        raise ValueError("run_statistics needs at least one run")
    n = len(f1s)
    mean = math.fsum(f1s) / n
    if n < 2:
        return RunStatistics(f1s, mean, None)
    ss = math.fsum((x - mean) ** 2 for x in f1s)
    return RunStatistics(f1s, mean, math.sqrt(ss / (n - 1)))


ComputedEntry = tuple[str, PredictionSet, LabeledDataset]


def comparison_report(
    entries: Sequence[ComputedEntry],
    reference_rows: Sequence[ReportRow] = (),
) -> ComparisonReport:
    """One row per (name, predictions, gold) entry, plus pass-through constants."""
    rows = []
    for name, pred, gold in entries:
        m = precision_recall_f1(confusion_matrix(pred, gold))
        rows.append(ReportRow(name=name, f1=m.f1, precision=m.precision, recall=m.recall))
    refs = tuple(
        ReportRow(r.name, r.f1, r.precision, r.recall, source="published")
        for r in reference_rows
    )
    return ComparisonReport(rows=tuple(rows), reference_rows=refs)


def render_report_markdown(report: ComparisonReport) -> str:
    lines = [
        "| System | F1 | Precision | Recall |",
        "| --- | --- | --- | --- |",
    ]
    for row in report.all_rows:
        lines.append(
            f"| {row.name} | {row.f1:.6f} | {row.precision:.6f} | {row.recall:.6f} |"
        )
    return "\n".join(lines) + "\n"


def report_to_json_dict(report: ComparisonReport, split_name: Optional[str] = None) -> dict:
    out: dict = {
        "rows": [
            {
                "name": r.name,
                "f1": r.f1,
                "precision": r.precision,
                "recall": r.recall,
                "source": r.source,
            }
            for r in report.all_rows
        ]
    }
    if split_name is not None:
        out["split_name"] = split_name
    return out


def render_confusion(cm: ConfusionMatrix, format: str = "text") -> str:
    """Render a 2x2 table, gold classes as rows and predicted classes as columns."""
    if format == "text":
        rows = [
            ("", "pred=1", "pred=0", "total"),
            ("gold=1", str(cm.tp), str(cm.fn), str(cm.tp + cm.fn)),
            ("gold=0", str(cm.fp), str(cm.tn), str(cm.fp + cm.tn)),
            ("total", str(cm.tp + cm.fp), str(cm.fn + cm.tn), str(cm.total)),
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        return "\n".join(
            "  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows
        ) + "\n"
    if format == "csv":
        return (
            ",pred_1,pred_0\n"
            f"gold_1,{cm.tp},{cm.fn}\n"
            f"gold_0,{cm.fp},{cm.tn}\n"
        )
    raise ValueError(f"unknown confusion format {format!r}")
