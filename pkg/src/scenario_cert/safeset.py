"""Polyhedral safe sets {y : Ay + b >= 0} and per-row safety levels."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Row(NamedTuple):
    """One half-space constraint a^T y + b >= 0."""

    a: np.ndarray
    b: float


@dataclass(frozen=True)
class SafeSet:
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.b, dtype=np.float64))
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError("A must be (n_s, n_y) and b must have length n_s")
        if not (np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError("safe set entries must be finite")
        zero = np.where((A == 0.0).all(axis=1))[0]
        if zero.size:
            raise ValueError(
                f"safe-set row {zero[0]} is all zeros; the constraint is vacuous "
                "or infeasible regardless of the output, drop or fix it"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        A.setflags(write=False)
        b.setflags(write=False)

    @property
    def output_dim(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def rows(self) -> list[Row]:
        """Split into single-row problems; assessments run per row and
        aggregate by the worst (minimum) certified level."""
        return [Row(self.A[i], float(self.b[i])) for i in range(self.n_rows)]

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist()}


def safety_level(row: Row, y: np.ndarray):
    """a^T y + b; y is safe for this row iff the result is >= 0.
    Batched over rows of a 2-D y."""
    a, b = row
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != a.shape[0]:
        raise ValueError(f"y has dim {y.shape[-1]}, row expects {a.shape[0]}")
    if y.ndim == 1:
        return float(y @ a + b)
    return y @ a + b


def safeset_from_dict(d: dict) -> SafeSet:
    try:
        return SafeSet(
            np.asarray(d["A"], dtype=np.float64), np.asarray(d["b"], dtype=np.float64)
        )
    except KeyError as exc:
        raise ValueError(f"safe-set JSON is missing field {exc}") from exc


def load_safeset(path) -> SafeSet:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"could not parse safe-set file {path}: {exc}") from exc
    return safeset_from_dict(data)
