"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a single ``[PASS]``/``[FAIL]``/``[SKIP]`` line which is
printed in the terminal summary.  The published-number reproduction needs the
voicemap data, which is not redistributed: point ``DEEPICE_VOICEMAP`` at a
CSV (features then label) to enable it, and additionally set
``DEEPICE_LONG=1`` for the multi-hour K=2 run.
"""
import contextlib
import itertools
import json
import os
import statistics
import time
from math import comb

import numpy as np
import pytest

from deepice.combinatorics import rank_combination, unrank_combination
from deepice.core import MAXOUT, RELU, Dataset
from deepice.coreset import FilterParams, coreset_fit
from deepice.cv import cv_run
from deepice.evaluator import PredictionCache, assignments, maxout_losses
from deepice.geometry import fit_normals
from deepice.io import gen_data, ingest
from deepice.oracle import oracle_search
from deepice.solver import count_candidates, deep_ice, search

from conftest import ACCEPTANCE_LINES, random_dataset


@contextlib.contextmanager
def criterion(number: int, title: str):
    info: dict = {}
    t0 = time.perf_counter()
    try:
        yield info
    except pytest.skip.Exception as exc:
        ACCEPTANCE_LINES.append(f"[SKIP] {number}. {title}: {exc.msg}")
        raise
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"[FAIL] {number}. {title}: {type(exc).__name__}: {str(exc)[:200]}")
        raise
    detail = info.get("detail", "")
    ACCEPTANCE_LINES.append(f"[PASS] {number}. {title} ({time.perf_counter() - t0:.1f}s{', ' + detail if detail else ''})")


def suite_instances():
    """The 200 seeded instances shared by criteria 1 and 6."""
    rng = np.random.default_rng(20240601)
    out = []
    for i in range(200):
        n = int(rng.integers(4, 11))
        D = int(rng.choice([2, 3]))
        K = int(rng.choice([1, 2]))
        act = (MAXOUT, RELU)[i % 2]
        if count_candidates(n, D, K) < 1:
            n = D + 1
        out.append((random_dataset(n, D, 1000 + i), K, act))
    return out


SUITE = suite_instances()


def test_c1_oracle_equivalence():
    with criterion(1, "oracle equivalence on 200 seeded instances, < 60 s") as info:
        t0 = time.perf_counter()
        bad = []
        for ds, K, act in SUITE:
            fast = deep_ice(ds, K, act)
            ref = oracle_search(ds, K, act).best
            if fast.loss != ref.loss or fast.key != ref.key:
                bad.append((ds.n, ds.dim, K, act, fast.key, ref.key))
        elapsed = time.perf_counter() - t0
        assert not bad, f"{len(bad)} mismatches, first {bad[0]}"
        assert elapsed < 60, f"took {elapsed:.1f}s"
        acts = {a for _, _, a in SUITE}
        assert acts == {MAXOUT, RELU}
        info["detail"] = f"{len(SUITE)} instances"


def test_c2_candidate_count_law():
    with criterion(2, "candidate counter = C(C(N,D),K) x 2^(K-1) (maxout) / 2^K (relu), N <= 8") as info:
        checked = 0
        for n in range(2, 9):
            for D in (2, 3):
                for K in (1, 2, 3):
                    if count_candidates(n, D, K) < 1 or count_candidates(n, D, K) > 5000:
                        continue
                    ds = random_dataset(n, D, 7 * n + D + K)
                    for act, per in ((MAXOUT, 1 << (K - 1)), (RELU, 1 << K)):
                        stats = search(ds, K, act).stats
                        assert stats.candidates == comb(comb(n, D), K) * per, (n, D, K, act)
                        assert stats.tuples_evaluated == comb(comb(n, D), K)
                        checked += 1
        info["detail"] = f"{checked} runs"


def test_c3_symmetric_fusion():
    with criterion(3, "fused loss(-a) == re-evaluation with negated normals, >= 10^4 configs") as info:
        configs = 0
        for seed, (n, K) in enumerate([(8, 2), (8, 3), (7, 3), (8, 2), (6, 3)]):
            ds = random_dataset(n, 2, 500 + seed)
            cache = PredictionCache(ds)
            combos = np.array(list(itertools.combinations(range(n), 2)), dtype=np.int64)
            ranks = cache.add(combos)
            W = fit_normals(ds.points[combos], combos)
            d = W @ ds.homogeneous.T
            d[np.abs(d) <= cache.eps] = 0.0
            row_of = {int(r): i for i, r in enumerate(ranks)}
            block = np.array(list(itertools.combinations(sorted(row_of), K)), dtype=np.int64)
            nonneg, strict = cache.masks(block)
            fused = maxout_losses(nonneg, strict, cache.valid, ds.labels_pos)
            A = assignments(K)
            rows = np.vectorize(row_of.get)(block)
            neg_d = -d[rows]                                   # (M, K, N), every normal negated
            for i in range(len(A) // 2, len(A)):
                a = np.array(A[i])[None, :, None]
                pred = (a * neg_d).max(axis=1) >= 0.0
                direct = np.count_nonzero(pred != (ds.labels > 0), axis=1)
                assert np.array_equal(fused[:, len(A) - 1 - i], direct)
                configs += len(block)
        assert configs >= 10**4, configs
        info["detail"] = f"{configs} configs"


def test_c4_rank_unrank_bijection():
    with criterion(4, "rank/unrank round trip over all r-subsets, pools <= 12, r <= 4") as info:
        total = 0
        for n in range(1, 13):
            for r in range(1, min(4, n) + 1):
                seen = set()
                for c in itertools.combinations(range(n), r):
                    k = rank_combination(c)
                    assert 0 <= k < comb(n, r)
                    assert unrank_combination(k, r) == c
                    seen.add(k)
                assert len(seen) == comb(n, r)
                total += len(seen)
        info["detail"] = f"{total} subsets"


def test_c5_hyperplane_once():
    with criterion(5, "hyperplane creation count = C(N,D) under three split shapes, N <= 10") as info:
        runs = 0
        for n in range(2, 11):
            for D in (2, 3):
                if n < D:
                    continue
                ds = random_dataset(n, D, 40 + n)
                for shape in ("balanced", "left", "right"):
                    assert search(ds, 1, split=shape).stats.hyperplanes_created == comb(n, D), (n, D, shape)
                    runs += 1
        info["detail"] = f"{runs} runs"


def test_c6_schedule_independence():
    with criterion(6, "1-thread vs 4-thread runs identical on all suite instances") as info:
        for ds, K, act in SUITE:
            assert search(ds, K, act, threads=1).best == search(ds, K, act, threads=4).best
        info["detail"] = f"{len(SUITE)} instances (host has {os.cpu_count()} CPU)"


def test_c7_coreset_conservative():
    with criterion(7, "coreset loss >= exact loss, equal when B_max >= N, 50 instances, < 120 s") as info:
        t0 = time.perf_counter()
        equal_cases = 0
        for i in range(50):
            n = 20 + (i % 21)
            K = 1 + (i % 2)
            ds = gen_data(n, 2, seed=300 + i, kind=("blobs", "wedge")[i % 2])
            if i % 5 == 0:
                params = FilterParams(block_size=10, bmax=40, heap_size=2, seed=i)
            else:
                params = FilterParams(block_size=8, bmax=12, heap_size=2, shrink=0.5, seed=i)
            exact = deep_ice(ds, K)
            approx = coreset_fit(ds, K, MAXOUT, params).best
            assert approx.loss >= exact.loss, (i, approx.loss, exact.loss)
            if params.bmax >= n:
                assert approx.loss == exact.loss
                equal_cases += 1
        elapsed = time.perf_counter() - t0
        assert elapsed < 120, f"took {elapsed:.1f}s"
        info["detail"] = f"{equal_cases} equality cases"


VOICEMAP = os.environ.get("DEEPICE_VOICEMAP")


@pytest.mark.skipif(not VOICEMAP, reason="set DEEPICE_VOICEMAP to the voicemap CSV")
def test_c8_voicemap_k1():
    with criterion(8, "voicemap K=1 exact loss 19"):
        ds = ingest(VOICEMAP)
        # [PAPER] best linear model on voicemap has 0-1 loss 19
        assert deep_ice(ds, 1).loss == 19


@pytest.mark.skipif(not (VOICEMAP and os.environ.get("DEEPICE_LONG")),
                    reason="multi-hour run; set DEEPICE_VOICEMAP and DEEPICE_LONG=1")
def test_c8_voicemap_k2():
    with criterion(8, "voicemap K=2 maxout exact loss 16"):
        ds = ingest(VOICEMAP)
        # [PAPER] two-unit maxout optimum on voicemap has 0-1 loss 16
        assert deep_ice(ds, 2, MAXOUT).loss == 16


def test_c8_status_line():
    if not VOICEMAP:
        ACCEPTANCE_LINES.append("[SKIP] 8. voicemap reproduction (19 / 16): data not supplied "
                                "(set DEEPICE_VOICEMAP, plus DEEPICE_LONG=1 for K=2)")
    elif not os.environ.get("DEEPICE_LONG"):
        ACCEPTANCE_LINES.append("[SKIP] 8. voicemap K=2 maxout exact loss 16: multi-hour run, set DEEPICE_LONG=1")


def test_c9_cv_report_integrity():
    with criterion(9, "CV report means/stds equal recomputation from fold logs, rel 1e-12") as info:
        ds = gen_data(100, 2, seed=9, kind="linear", flip=0.1)
        lines = []
        report = cv_run(ds, 1, MAXOUT, folds=5, seed=9, log_sink=lines.append)
        recs = [json.loads(l) for l in lines]
        assert len(recs) == 5
        train = [r["train_loss"] / r["n_train"] for r in recs]
        test = [r["test_loss"] / r["n_test"] for r in recs]
        s = report.summary()
        want = {"train_mean": statistics.fmean(train), "train_std": statistics.pstdev(train),
                "test_mean": statistics.fmean(test), "test_std": statistics.pstdev(test)}
        for key, v in want.items():
            assert s[key] == pytest.approx(v, rel=1e-12, abs=0 if v else 1e-300), key
        info["detail"] = report.table_cell()
