"""CSV ingestion and synthetic data generation."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import Dataset, DeepIceError

DEFAULT_SIGMA = 1e-8


class InputError(DeepIceError, ValueError):
    pass


def _resolve_column(header: Optional[list], ncols: int, label_column: Union[int, str]) -> int:
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None or label_column not in header:
            raise InputError(f"label column {label_column!r} not found in header")
        return header.index(label_column)
    idx = int(label_column)
    if not -ncols <= idx < ncols:
        raise InputError(f"label column index {idx} out of range for {ncols} columns")
    return idx % ncols


def map_labels(raw: Sequence[str]) -> np.ndarray:
    """Map a two-valued label column to +1/-1.

    ``{-1, 1}`` pass through, ``{0, 1}`` maps 0 to -1; any other pair maps the
    smaller value (numerically if possible) to -1.
    """
    values = sorted(set(raw))
    try:
        numeric = sorted({float(v) for v in values})
    except ValueError:
        numeric = None
    if numeric is not None:
        if len(numeric) > 2:
            raise InputError(f"label column has {len(numeric)} distinct values; need at most 2")
        if set(numeric) <= {-1.0, 1.0}:
            return np.array([1 if float(v) > 0 else -1 for v in raw], dtype=np.int8)
        hi = numeric[-1]
        return np.array([1 if float(v) == hi and len(numeric) == 2 else -1 for v in raw], dtype=np.int8)
    if len(values) > 2:
        raise InputError(f"label column has {len(values)} distinct values; need at most 2")
    return np.array([1 if v == values[-1] and len(values) == 2 else -1 for v in raw], dtype=np.int8)


def read_table(path, label_column: Union[int, str, None] = -1, delimiter: str = ",",
               header: bool = True) -> tuple:
    """Parse a delimited file into ``(features, raw_labels, header)``."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    head = None
    if header and rows:
        head = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        return np.zeros((0, 0)), [], head
    ncols = len(head) if head else len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != ncols:
            raise InputError(f"row {i + 1} has {len(r)} cells, expected {ncols}")
    lab = None if label_column is None else _resolve_column(head, ncols, label_column)
    feats, labels = [], []
    for i, r in enumerate(rows):
        cells = [c.strip() for c in r]
        if lab is not None:
            if cells[lab] == "":
                raise InputError(f"row {i + 1} has no label")
            labels.append(cells[lab])
        try:
            feats.append([float(c) for j, c in enumerate(cells) if j != lab])
        except ValueError as exc:
            raise InputError(f"row {i + 1}: {exc}") from exc
    return np.array(feats, dtype=np.float64), labels, head


def ingest(path, label_column: Union[int, str] = -1, sigma: float = DEFAULT_SIGMA, seed: int = 0, *,
           delimiter: str = ",", header: bool = True, min_rows: int = 0) -> Dataset:
    """Load a labelled CSV as a :class:`Dataset`.

    Exact duplicate rows are dropped (first occurrence kept), each coordinate
    gets independent N(0, sigma^2) jitter, and the rows are then shuffled with
    the same seeded generator.
    """
    X, raw, _ = read_table(path, label_column, delimiter, header)
    if len(raw) == 0:
        raise InputError(f"{path}: no data rows")
    seen, keep = set(), []
    for i, (row, lab) in enumerate(zip(X.tolist(), raw)):
        key = (tuple(row), lab)
        if key not in seen:
            seen.add(key)
            keep.append(i)
    X = X[keep]
    y = map_labels([raw[i] for i in keep])
    if len(X) < min_rows:
        raise InputError(f"{path}: {len(X)} usable rows, need at least {min_rows}")
    rng = np.random.default_rng(seed)
    if sigma > 0:
        X = X + rng.normal(0.0, sigma, size=X.shape)
    perm = rng.permutation(len(X))
    try:
        return Dataset(X[perm], y[perm])
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def write_csv(path, points: np.ndarray, labels: Optional[np.ndarray] = None, names: Optional[list] = None) -> None:
    points = np.asarray(points)
    D = points.shape[1] if points.ndim == 2 else 0
    names = names or [f"x{i + 1}" for i in range(D)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + (["label"] if labels is not None else []))
        for i, row in enumerate(points.tolist()):
            w.writerow([repr(v) for v in row] + ([int(labels[i])] if labels is not None else []))


def gen_data(n: int, D: int = 2, seed: int = 0, *, kind: str = "blobs", flip: float = 0.1) -> Dataset:
    """Random points in general position with noisy labels.

    ``blobs``: two Gaussian clouds; ``linear``: labels from a random
    hyperplane, each flipped with probability ``flip``; ``wedge``: positive
    inside the union of two random half-spaces.
    """
    rng = np.random.default_rng(seed)
    if kind == "blobs":
        y = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
        X = rng.normal(size=(n, D)) + 1.25 * y[:, None] * np.eye(D)[0]
    else:
        X = rng.normal(size=(n, D))
        if kind == "linear":
            w = rng.normal(size=D + 1)
            y = np.where(X @ w[:-1] + w[-1] >= 0, 1, -1).astype(np.int8)
        elif kind == "wedge":
            W = rng.normal(size=(2, D + 1))
            y = np.where((np.hstack([X, np.ones((n, 1))]) @ W.T).max(axis=1) >= 0, 1, -1).astype(np.int8)
        else:
            raise ValueError(f"unknown kind {kind!r}")
        flips = rng.random(n) < flip
        y = np.where(flips, -y, y).astype(np.int8)
    return Dataset(X, y)


def save_dataset(ds: Dataset, path) -> None:
    write_csv(Path(path), ds.points, ds.labels)
