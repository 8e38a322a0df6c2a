"""K-fold cross-validation with per-fold logs and a compact text report."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import MAXOUT, Dataset, DeepIceError
from .model import fit
from .solver import min_points


class FoldError(DeepIceError, ValueError):
    pass


@dataclass
class FoldRecord:
    fold: int
    n_train: int
    n_test: int
    train_loss: int
    test_loss: int

    @property
    def train_error(self) -> float:
        return self.train_loss / self.n_train

    @property
    def test_error(self) -> float:
        return self.test_loss / self.n_test if self.n_test else 0.0

    def to_json(self) -> str:
        return json.dumps({"fold": self.fold, "n_train": self.n_train, "n_test": self.n_test,
                           "train_loss": self.train_loss, "test_loss": self.test_loss,
                           "train_error": self.train_error, "test_error": self.test_error})


@dataclass
class CVReport:
    folds: list = field(default_factory=list)

    def _stats(self, attr: str) -> tuple:
        v = np.array([getattr(f, attr) for f in self.folds], dtype=np.float64)
        return float(v.mean()), float(v.std(ddof=0))

    @property
    def train(self) -> tuple:
        """Mean and population std of the per-fold training error rate."""
        return self._stats("train_error")

    @property
    def test(self) -> tuple:
        return self._stats("test_error")

    def summary(self) -> dict:
        (mtr, str_), (mte, ste) = self.train, self.test
        return {"train_mean": mtr, "train_std": str_, "test_mean": mte, "test_std": ste,
                "folds": len(self.folds)}

    def table_cell(self, digits: int = 3) -> str:
        """``Train/Test (std_train/std_test)`` with error rates."""
        (mtr, str_), (mte, ste) = self.train, self.test
        f = f"{{:.{digits}f}}"
        return f"{f.format(mtr)}/{f.format(mte)} ({f.format(str_)}/{f.format(ste)})"


def fold_indices(n: int, folds: int, seed: int) -> list:
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, folds)]


def cv_run(ds: Dataset, K: int, activation: str = MAXOUT, folds: int = 5, seed: int = 0, *,
           method: str = "exact", log_sink: Optional[Callable[[str], None]] = None, **fit_kwargs) -> CVReport:
    """Fit on each training split, score 0-1 loss on train and held-out points.

    Each fold's record is written as a JSON line to ``log_sink`` as soon as
    that fold finishes.
    """
    if folds < 2:
        raise FoldError("need at least 2 folds")
    if folds > ds.n:
        raise FoldError(f"{folds} folds requested for {ds.n} points")
    parts = fold_indices(ds.n, folds, seed)
    report = CVReport()
    for i, test_idx in enumerate(parts):
        train_idx = np.setdiff1d(np.arange(ds.n), test_idx)
        if len(train_idx) < min_points(ds.dim, K):
            raise FoldError(f"fold {i}: {len(train_idx)} training points cannot host {K} hyperplanes in D={ds.dim}")
        train = ds.subset(train_idx)
        model = fit(train, K, activation, method=method, seed=seed, **fit_kwargs)
        test_loss = int(np.count_nonzero(model.predict(ds.points[test_idx]) != ds.labels[test_idx]))
        rec = FoldRecord(i, len(train_idx), len(test_idx), model.training_loss, test_loss)
        report.folds.append(rec)
        if log_sink is not None:
            log_sink(rec.to_json())
    return report
