"""Readers for the study CSV files.

The solver writes a handful of fixed schemas; this module recognizes them by
their exact header and hands back typed columns.  Nothing here recomputes
physics: the CSV content is taken at face value.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

__all__ = ["StudyCSV", "SchemaError", "read_study"]

_RATE_COLUMNS = ("h", "p", "dofs", "error", "rate", "seconds")
_DISCRIMINATORS = ("space", "scheme", "mesh", "kind")


class SchemaError(ValueError):
    """Header does not match any documented study schema."""


@dataclass(frozen=True)
class StudyCSV:
    path: str
    tag: str                      # convergence | energy | measurement | snapshot
    discriminator: Optional[str]  # leading label column, when present
    columns: Dict[str, np.ndarray]

    def series_keys(self) -> Tuple:
        """Distinct (discriminator value, p) pairs in file order."""
        if self.tag != "convergence":
            raise ValueError("series_keys is for convergence tables")
        labels = (self.columns[self.discriminator]
                  if self.discriminator else None)
        ps = self.columns["p"].astype(int)
        seen = []
        for i in range(len(ps)):
            key = (labels[i] if labels is not None else None, int(ps[i]))
            if key not in seen:
                seen.append(key)
        return tuple(seen)


def _classify(header: Tuple[str, ...]) -> Tuple[str, Optional[str]]:
    if header == _RATE_COLUMNS:
        return "convergence", None
    if (len(header) == 7 and header[0] in _DISCRIMINATORS
            and header[1:] == _RATE_COLUMNS):
        return "convergence", header[0]
    if header == ("t", "p", "E", "relerr"):
        return "energy", None
    if header == ("t", "UC"):
        return "measurement", None
    if header == ("x", "y", "t", "U"):
        return "snapshot", None
    raise SchemaError(f"unrecognized study header: {','.join(header)}")


def read_study(path) -> StudyCSV:
    path = str(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise SchemaError(f"{path}: empty file, no header")
    header = tuple(c.strip() for c in rows[0])
    tag, disc = _classify(header)
    body = rows[1:]
    if not body:
        raise SchemaError(f"{path}: header only, no data rows")
    cols: Dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        raw = [r[j].strip() for r in body]
        if name == disc:
            cols[name] = np.array(raw, dtype=object)
        else:
            try:
                cols[name] = np.array([float(v) for v in raw])
            except ValueError as exc:
                raise SchemaError(f"{path}: column {name}: {exc}") from None
    return StudyCSV(path, tag, disc, cols)
