"""CSV ingestion and export of n x p data panels."""

import csv
from dataclasses import dataclass
import math

import numpy as np

from .errors import ParameterError, ParseError

TRANSFORMS = ("none", "negate", "upper_tail_of_loss")


@dataclass(frozen=True)
class Dataset:
    matrix: np.ndarray
    column_names: tuple
    transform: str = "none"

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def p(self):
        return self.matrix.shape[1]


def _to_float(tok):
    try:
        return float(tok)
    except ValueError:
        return None


def ingest_csv(path, header="auto", transform="none"):
    """Read a rectangular numeric CSV into a :class:`Dataset`.

    header: True, False or "auto" (a first row with any non-numeric cell is a header).
    transform: "none", "negate" (returns to losses) or "upper_tail_of_loss"
    (negate, then floor at zero so only losses remain).
    """
    if transform not in TRANSFORMS:
        raise ParameterError(f"transform must be one of {TRANSFORMS}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty file")
    first = [c.strip() for c in rows[0]]
    if header == "auto":
        header = any(_to_float(c) is None for c in first)
    if header:
        names = first
        if len(set(names)) != len(names):
            j = next(j for j, c in enumerate(names) if c in names[:j])
            raise ParseError(f"duplicate column name {names[j]!r}", row=1, column=j + 1)
        body, offset = rows[1:], 2
    else:
        names = [f"X{j + 1}" for j in range(len(first))]
        body, offset = rows, 1
    p = len(names)
    out = np.empty((len(body), p))
    for i, row in enumerate(body):
        if len(row) != p:
            raise ParseError(f"ragged row: expected {p} cells, got {len(row)}", row=i + offset)
        for j, tok in enumerate(row):
            v = _to_float(tok.strip())
            if v is None or not math.isfinite(v):
                raise ParseError(f"cell {names[j]!r} is not a finite number: {tok!r}",
                                 row=i + offset, column=j + 1)
            out[i, j] = v
    if out.shape[0] < 2:
        raise ParseError("need at least two data rows")
    if transform == "negate":
        out = -out
    elif transform == "upper_tail_of_loss":
        out = np.maximum(-out, 0.0)
    return Dataset(out, tuple(names), transform)


def export_csv(matrix, path, column_names=None):
    """Write a matrix with a header row; repr() keeps every float bit-exact."""
    matrix = np.asarray(matrix, dtype=float)
    names = column_names or [f"X{j + 1}" for j in range(matrix.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in matrix:
            w.writerow([repr(float(v)) for v in row])
