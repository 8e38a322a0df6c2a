"""One-by-one exhaustive enumeration, used as ground truth for the fast search.

Every D-subset of points is visited with plain nested loops, every K-subset
of the resulting hyperplanes and every one of the 2^K sign assignments is
scored separately (no symmetric fusion), and the minimum is kept.  Sign rows
are converted to Python integers so that this path shares only the geometry
with the packed-array evaluator.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .combinatorics import rank_combination
from .core import MAXOUT, RELU, BudgetExceededError, Config, ConfigurationError, Dataset, ScoredConfig, bits_to_int
from .geometry import EPS, fit_hyperplane, signed_distances
from .solver import count_candidates, defining_points

DEFAULT_CAP = 10**7


@dataclass
class _Plane:
    rank: int
    combo: tuple
    normal: np.ndarray
    nonneg: int
    strict: int
    dots: np.ndarray


def _planes(ds: Dataset, eps: float) -> list:
    D = ds.dim
    planes = []
    for combo in itertools.combinations(range(ds.n), D):
        h = fit_hyperplane(ds, combo, eps)
        planes.append(_Plane(rank_combination(combo), combo, h.normal, bits_to_int(h.nonneg_mask),
                             bits_to_int(h.strictpos_mask), signed_distances(h.normal, ds, eps)[0]))
    return planes


def _check_budget(ds: Dataset, K: int, cap: int) -> int:
    total = count_candidates(ds.n, ds.dim, K) * (1 << K)
    if total > cap:
        raise BudgetExceededError(f"oracle would score {total} candidates (cap {cap})")
    return total


def _score(group, asg, activation: str, labels: int, full: int, label_arr: np.ndarray) -> int:
    if activation == MAXOUT:
        pos = 0
        for p, a in zip(group, asg):
            pos |= p.nonneg if a > 0 else (~p.strict & full)
        return bin(pos ^ labels).count("1")
    total = None
    for p, a in zip(group, asg):
        term = np.maximum(p.dots, 0.0) if a > 0 else np.minimum(p.dots, 0.0)
        total = term if total is None else total + term
    return int(np.count_nonzero((total >= 0.0) != label_arr))


def _walk(ds: Dataset, K: int, activation: str, eps: float):
    if activation not in (MAXOUT, RELU):
        raise ConfigurationError(f"unknown activation {activation!r}")
    planes = _planes(ds, eps)
    labels = bits_to_int(ds.labels_pos)
    full = (1 << ds.n) - 1
    label_arr = ds.labels > 0
    for group in itertools.combinations(planes, K):
        group = sorted(group, key=lambda p: p.rank)
        ranks = tuple(p.rank for p in group)
        for asg in itertools.product((-1, 1), repeat=K):
            yield ranks, asg, _score(group, asg, activation, labels, full, label_arr)


@dataclass
class OracleResult:
    best: ScoredConfig
    candidates: int


def oracle_search(ds: Dataset, K: int, activation: str = MAXOUT, *, cap: int = DEFAULT_CAP,
                  eps: float = EPS) -> OracleResult:
    _check_budget(ds, K, cap)
    best: Optional[tuple] = None
    count = 0
    for ranks, asg, loss in _walk(ds, K, activation, eps):
        count += 1
        key = (loss, ranks, asg)
        if best is None or key < best:
            best = key
    if best is None:
        raise BudgetExceededError("no candidate configurations")
    loss, ranks, asg = best
    sc = ScoredConfig(Config(ranks, asg, activation), loss, defining_points=defining_points(ds, ranks))
    return OracleResult(sc, count)


def oracle_exact(ds: Dataset, K: int, activation: str = MAXOUT, *, cap: int = DEFAULT_CAP,
                 eps: float = EPS) -> ScoredConfig:
    return oracle_search(ds, K, activation, cap=cap, eps=eps).best


def enumerate_solutions(ds: Dataset, K: int, activation: str = MAXOUT, threshold: int = 0, *,
                        cap: int = DEFAULT_CAP, eps: float = EPS) -> list:
    """Every configuration with loss strictly below ``threshold``.

    Each solution carries its defining points, i.e. the hyperplanes returned
    are the ones passing through exactly D data points.  The list is sorted by
    (loss, ranks, assignment).
    """
    _check_budget(ds, K, cap)
    out = []
    for ranks, asg, loss in _walk(ds, K, activation, eps):
        if loss < threshold:
            out.append(ScoredConfig(Config(ranks, asg, activation), loss,
                                    defining_points=defining_points(ds, ranks)))
    out.sort(key=lambda s: s.key)
    return out
