import json
import statistics

import numpy as np
import pytest

from deepice.core import Dataset
from deepice.cv import FoldError, cv_run, fold_indices

from conftest import random_dataset


def test_fold_split_partitions():
    parts = fold_indices(23, 5, 1)
    assert sorted(np.concatenate(parts).tolist()) == list(range(23))
    assert [len(p) for p in parts] == [5, 5, 5, 4, 4]


def test_leave_one_out():
    ds = random_dataset(6, 2, 0)
    rep = cv_run(ds, 1, folds=6)
    assert len(rep.folds) == 6
    assert all(f.n_test == 1 and f.test_loss in (0, 1) for f in rep.folds)


def test_separable_train_loss_zero():
    # positives on a parabola, negatives far below: any training fold contains
    # two adjacent positives whose chord separates, so a data-spanned
    # hyperplane reaches zero loss even with on-plane points counted positive
    rng = np.random.default_rng(2)
    xs = np.linspace(-3, 3, 20) + rng.uniform(-0.01, 0.01, 20)
    pos = np.column_stack([xs, xs ** 2])
    neg = np.column_stack([rng.uniform(-3, 3, 15), rng.uniform(-15, -11, 15)])
    ds = Dataset(np.vstack([pos, neg]), [1] * 20 + [-1] * 15)
    assert cv_run(ds, 1).train[0] == 0.0


def test_report_matches_fold_logs():
    ds = random_dataset(40, 2, 3)
    lines = []
    rep = cv_run(ds, 1, seed=2, log_sink=lines.append)
    recs = [json.loads(l) for l in lines]
    tr = [r["train_loss"] / r["n_train"] for r in recs]
    te = [r["test_loss"] / r["n_test"] for r in recs]
    s = rep.summary()
    assert s["train_mean"] == pytest.approx(statistics.fmean(tr), rel=1e-12)
    assert s["test_std"] == pytest.approx(statistics.pstdev(te), rel=1e-12, abs=1e-15)
    assert rep.table_cell().count("/") == 2


def test_fold_errors():
    ds = random_dataset(6, 2, 0)
    with pytest.raises(FoldError):
        cv_run(ds, 1, folds=1)
    with pytest.raises(FoldError):
        cv_run(ds, 1, folds=7)
    with pytest.raises(FoldError):
        cv_run(random_dataset(4, 2, 0), 3, folds=2)
