import statistics
from math import comb

import pytest

from deepice.core import MAXOUT, RELU, BudgetExceededError, Dataset
from deepice.oracle import enumerate_solutions, oracle_exact, oracle_search
from deepice.solver import count_candidates, deep_ice

from conftest import random_dataset


def test_two_points_only_one_line():
    # the single data-spanned line holds both points, and on-plane points are
    # predicted positive under either orientation, so the negative point is lost
    ds = Dataset([[0.0, 0.0], [1.0, 1.0]], [1, -1])
    assert oracle_exact(ds, 1).loss == 1


def test_three_points_separable():
    ds = Dataset([[0.0, 0.0], [1.0, 0.2], [0.3, 1.0]], [1, 1, -1])
    assert oracle_exact(ds, 1).loss == 0


@pytest.mark.parametrize("activation", [MAXOUT, RELU])
def test_candidate_counter(activation):
    ds = random_dataset(6, 2, 0)
    assert oracle_search(ds, 2, activation).candidates == count_candidates(6, 2, 2) * 4


def test_budget_refusal():
    with pytest.raises(BudgetExceededError):
        oracle_exact(random_dataset(10, 2, 0), 2, cap=1000)
    with pytest.raises(BudgetExceededError):
        enumerate_solutions(random_dataset(10, 2, 0), 2, cap=1000)


def test_threshold_zero_is_empty():
    assert enumerate_solutions(random_dataset(6, 2, 0), 1, threshold=0) == []


def test_vacuous_threshold_returns_everything():
    ds = random_dataset(5, 2, 1)
    sols = enumerate_solutions(ds, 2, threshold=ds.n + 1)
    assert len(sols) == comb(comb(5, 2), 2) * 4
    assert [s.key for s in sols] == sorted(s.key for s in sols)


@pytest.mark.parametrize("seed", range(3))
def test_median_threshold_filters_full_scan(seed):
    # [DERIVED] filter of the unfiltered oracle listing
    ds = random_dataset(6, 2, seed)
    everything = enumerate_solutions(ds, 2, threshold=ds.n + 1)
    med = statistics.median(s.loss for s in everything)
    got = enumerate_solutions(ds, 2, threshold=med)
    assert [s.key for s in got] == [s.key for s in everything if s.loss < med]


def test_optimum_contained():
    ds = random_dataset(7, 2, 4)
    best = deep_ice(ds, 2)
    sols = enumerate_solutions(ds, 2, threshold=best.loss + 1)
    assert sols[0].key == best.key
    for s in sols:
        assert len(s.defining_points) == 2 and all(len(p) == 2 for p in s.defining_points)
