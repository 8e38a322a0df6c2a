from math import comb

import numpy as np
import pytest

from deepice.core import MAXOUT, RELU, ConfigurationError, Dataset, NoConfigError
from deepice.oracle import oracle_search
from deepice.solver import (
    BITSET_ONLY,
    CACHE_DOTS,
    UNRANK_ON_DEMAND,
    count_candidates,
    deep_ice,
    min_points,
    search,
    split_strategy,
    tree_leaves,
)

from conftest import random_dataset


def test_count_candidates_examples():
    assert count_candidates(4, 2, 1) == 6
    assert count_candidates(4, 2, 2) == 15
    assert count_candidates(6, 2, 2) == 105  # [DERIVED] C(15, 2)
    assert count_candidates(60, 3, 3) == comb(comb(60, 3), 3)
    assert count_candidates(1, 2, 1) == 0


def test_min_points():
    assert min_points(2, 1) == 2
    assert min_points(2, 2) == 3
    assert min_points(3, 2) == 4


def test_split_shapes():
    assert split_strategy(4) == ((0, 1), (2, 3))
    assert split_strategy(1) == 0
    assert split_strategy(5) == ((0, 1), (2, (3, 4)))
    for shape in ("balanced", "left", "right"):
        assert tree_leaves(split_strategy(9, shape)) == list(range(9))
    with pytest.raises(ValueError):
        split_strategy(3, "zigzag")


def test_separable_gives_zero():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(20, 2))
    y = np.where(X[:, 0] + 0.3 * X[:, 1] > 0.1, 1, -1)
    assert deep_ice(Dataset(X, y), 1).loss == 0


def test_oracle_agreement_n4():
    ds = random_dataset(4, 2, 11)
    assert deep_ice(ds, 1).key == oracle_search(ds, 1).best.key


@pytest.mark.parametrize("n", [5, 7])
def test_split_shape_invariance(n):
    ds = random_dataset(n, 2, n)
    keys = {search(ds, 2, split=s).best.key for s in ("balanced", "left", "right")}
    custom = ((0, (1, 2)), (3, 4)) if n == 5 else ((0, (1, 2)), ((3, 4), (5, 6)))
    keys.add(search(ds, 2, split=custom).best.key)
    assert len(keys) == 1


def test_too_few_points():
    with pytest.raises(NoConfigError):
        deep_ice(random_dataset(2, 2, 0), 2)
    with pytest.raises(NoConfigError):
        deep_ice(Dataset(np.zeros((1, 2)), [1]), 1)


def test_bad_arguments():
    ds = random_dataset(5, 2, 0)
    with pytest.raises(ConfigurationError):
        search(ds, 1, "tanh")
    with pytest.raises(ConfigurationError):
        search(ds, 0)
    with pytest.raises(ConfigurationError):
        search(ds, 1, RELU, mode=BITSET_ONLY)
    with pytest.raises(ValueError):
        search(ds, 1, split=(0, 1))


@pytest.mark.parametrize("activation", [MAXOUT, RELU])
def test_cache_modes_agree(activation):
    ds = random_dataset(8, 2, 3)
    base = search(ds, 2, activation)
    lazy = search(ds, 2, activation, memory_cap=1)
    assert lazy.stats.mode == UNRANK_ON_DEMAND
    assert lazy.best.key == base.best.key
    if activation == MAXOUT:
        assert search(ds, 2, activation, mode=CACHE_DOTS).best.key == base.best.key


def test_stats_and_anytime_history():
    ds = random_dataset(9, 2, 5)
    seen = []
    res = search(ds, 2, progress=lambda m, b: seen.append((m, b)))
    assert res.stats.merges == ds.n - 1 == len(seen)
    assert res.stats.hyperplanes_created == comb(9, 2)
    assert res.stats.candidates == count_candidates(9, 2, 2) * 2
    losses = [b for _, b in seen if b is not None]
    assert losses == sorted(losses, reverse=True)
    assert losses[-1] == res.best.loss
    keys = [k for _, k in res.stats.history]
    assert all(k >= res.best.key for k in keys)
    assert sum(v["candidates"] for v in res.stats.per_level.values()) == res.stats.candidates


def test_threads_match_sequential():
    ds = random_dataset(10, 2, 8)
    assert search(ds, 2, threads=4).best == search(ds, 2).best


def test_small_chunks_stream_everything():
    ds = random_dataset(8, 2, 2)
    assert search(ds, 2, chunk=3).best.key == search(ds, 2).best.key


def test_defining_points_attached():
    ds = random_dataset(6, 2, 1)
    best = deep_ice(ds, 2)
    assert len(best.defining_points) == 2
    rows = {tuple(p) for p in ds.points.tolist()}
    assert all(tuple(p) in rows for pts in best.defining_points for p in pts)
