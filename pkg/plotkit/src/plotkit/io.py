"""CSV loading and validation shared by the figure builders."""
from __future__ import annotations

import csv


class MissingColumnError(ValueError):
    """A required CSV column is absent; the message names it."""

    def __init__(self, column: str, csv_path: str):
        self.column = column
        super().__init__(f"column {column!r} missing from {csv_path!r}")


class GridError(ValueError):
    """CSV rows do not form a complete rectangular grid."""


def read_rows(csv_path: str, required: tuple[str, ...]) -> list[dict]:
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fieldnames = reader.fieldnames or []
        for col in required:
            if col not in fieldnames:
                raise MissingColumnError(col, csv_path)
        rows = list(reader)
    if not rows:
        raise GridError(f"{csv_path!r} contains no data rows")
    return rows
