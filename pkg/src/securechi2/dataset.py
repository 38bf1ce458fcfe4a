"""CSV ingestion and record alignment between the two parties."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

from securechi2.errors import DuplicateId, IdSetMismatch, MissingColumn, NonBinaryValue


@dataclass(frozen=True)
class Dataset:
    rows: tuple[tuple[str, int], ...]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r for r, _ in self.rows)

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.rows)

    def __len__(self):
        return len(self.rows)


def load_dataset(path, id_column: str = "id", value_column: str = "value") -> Dataset:
    """Read ``id_column``/``value_column`` from a headed CSV, keeping file order.

    Row indices in errors count data rows from 1, so the first line after the
    header is row 1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (id_column, value_column):
            if col not in header:
                raise MissingColumn(f"column {col!r} not in header {header}")
        rows = []
        seen = set()
        for i, rec in enumerate(reader, start=1):
            rid = (rec[id_column] or "").strip()
            raw = (rec[value_column] or "").strip()
            if raw not in ("0", "1"):
                raise NonBinaryValue(i, raw)
            if rid in seen:
                raise DuplicateId(rid)
            seen.add(rid)
            rows.append((rid, int(raw)))
    return Dataset(tuple(rows))


def align(carol_ids: Sequence[str], felix: Dataset) -> tuple[int, ...]:
    """Felix's values reordered to Carol's id order."""
    lookup = dict(felix.rows)
    ours = set(carol_ids)
    missing = sum(1 for i in carol_ids if i not in lookup)
    extra = sum(1 for i in lookup if i not in ours)
    if missing or extra or len(ours) != len(carol_ids):
        raise IdSetMismatch(missing, extra)
    return tuple(lookup[i] for i in carol_ids)
