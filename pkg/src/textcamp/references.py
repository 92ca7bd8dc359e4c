"""Bundled published reference scores for comparison-report layouts.

These are external constants (benchmark classifier and cross-team
aggregates on the shared-task test split); the toolkit never computes
them, it only displays them next to locally evaluated systems.
"""

from __future__ import annotations

import json
from importlib import resources

from .metrics import ReportRow


def published_reference_rows() -> tuple[ReportRow, ...]:
    payload = json.loads(
        resources.files("textcamp").joinpath("data/published_references.json").read_text("utf-8")
    )
    return tuple(
        ReportRow(
            name=row["name"],
            f1=row["f1"],
            precision=row["precision"],
            recall=row["recall"],
            source="published",
        )
        for row in payload["rows"]
    )
