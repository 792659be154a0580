"""Regression dataset ingestion and preprocessing."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DATASET_ENV = "PDE_OLO_DATASET"
ROW_NORM_TOL = 1e-9


class DatasetError(ValueError):
    """Malformed dataset file; the message carries the row/column location."""


@dataclass
class DatasetMatrix:
    features: np.ndarray  # (n, d)
    targets: np.ndarray  # (n,)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.features.ndim != 2 or self.targets.shape != (self.features.shape[0],):
            raise ValueError("features must be (n, d) and targets (n,)")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def head(self, n: int) -> "DatasetMatrix":
        return DatasetMatrix(self.features[:n], self.targets[:n])


def minmax_columns(X: np.ndarray) -> np.ndarray:
    """Scale each column to [0, 1]; constant columns become 0."""
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (X - lo) / safe, 0.0)


def normalize_rows(X: np.ndarray) -> np.ndarray:
    """Scale each row to unit Euclidean norm; zero rows are left as they are."""
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return np.where(norms > 0, X / np.where(norms > 0, norms, 1.0), X)


def preprocess(features, targets) -> DatasetMatrix:
    return DatasetMatrix(normalize_rows(minmax_columns(np.asarray(features, dtype=float))), targets)


def read_numeric_csv(path, max_rows: int | None = None) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset not found: {path}")
    rows = []
    width = None
    with path.open(newline="") as fh:
        for i, row in enumerate(csv.reader(fh), start=1):
            if max_rows is not None and len(rows) >= max_rows:
                break
            if not row or all(not cell.strip() for cell in row):
                continue
            if width is None:
                width = len(row)
                if width < 2:
                    raise DatasetError(f"{path}:{i}: need a target and at least one feature column")
            elif len(row) != width:
                raise DatasetError(f"{path}:{i}: expected {width} columns, found {len(row)}")
            vals = []
            for j, cell in enumerate(row, start=1):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DatasetError(f"{path}: row {i}, column {j}: non-numeric value {cell!r}") from None
            rows.append(vals)
    if not rows:
        raise DatasetError(f"{path}: file contains no data rows")
    out = np.array(rows)
    bad = np.argwhere(~np.isfinite(out))
    if bad.size:
        r, c = bad[0]
        raise DatasetError(f"{path}: row {r + 1}, column {c + 1}: non-finite value")
    return out


def load_dataset(path=None, max_rows: int | None = None) -> DatasetMatrix:
    """Read ``target, feature_1, ..., feature_d`` rows and preprocess the features.

    Features are min-max scaled per column, then each row is scaled to unit
    norm.  ``path`` defaults to the ``PDE_OLO_DATASET`` environment variable.
    """
    if path is None:
        path = os.environ.get(DATASET_ENV)
        if not path:
            raise FileNotFoundError(f"no dataset path given and {DATASET_ENV} is unset")
    raw = read_numeric_csv(path, max_rows)
    return preprocess(raw[:, 1:], raw[:, 0])


def synthetic_regression(seed: int, T: int, d: int) -> DatasetMatrix:
    """Seeded stand-in for the reference data: a hidden positive linear model plus bounded noise."""
    if T < 1 or d < 1:
        raise ValueError("T and d must be at least 1")
    rng = np.random.default_rng(seed)
    raw = rng.random((T, d))
    X = normalize_rows(minmax_columns(raw))
    w = rng.uniform(0.5, 1.5, size=d) * np.sqrt(d)
    y = X @ w + rng.uniform(0.0, 0.1, size=T)
    return DatasetMatrix(X, y)


def check_invariants(data: DatasetMatrix) -> list[str]:
    """Problems with a preprocessed matrix (empty list when it is clean)."""
    issues = []
    X = data.features
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        issues.append("feature values outside [0, 1]")
    norms = np.linalg.norm(X, axis=1)
    off = (norms > 0) & (np.abs(norms - 1.0) > ROW_NORM_TOL)
    if np.any(off):
        issues.append(f"{int(off.sum())} rows without unit norm")
    return issues
