"""Divide-and-conquer exact search over all K-combinations of data-spanned hyperplanes.

The data list is split recursively down to single points.  Each join merges
the two halves' combination tables, fits the hyperplanes whose D defining
points have just come together, and streams every K-combination of
hyperplanes that became complete at this join straight into the evaluator.
Only combinations of size < K are carried upward, and the running optimum is
folded with ``min_01`` which is commutative and associative, so the result
does not depend on the split shape or on the order in which sibling subtrees
finish.
"""
from __future__ import annotations

import logging
import math
import threading
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Optional, Union

import numpy as np

from .combinatorics import DEFAULT_CHUNK, empty_tables, nested_merge, singleton_table, unrank_combination
from .core import (
    ACTIVATIONS,
    MAXOUT,
    RELU,
    ConfigurationError,
    Config,
    Dataset,
    DeepIceError,
    NoConfigError,
    ScoredConfig,
)
from .evaluator import LossFn, PredictionCache, best_in_block, block_losses, cache_nbytes, zero_one_loss
from .geometry import EPS

log = logging.getLogger(__name__)

Tree = Union[None, int, tuple]

CACHE_DOTS = "cache-dots"
BITSET_ONLY = "bitset-only"
UNRANK_ON_DEMAND = "unrank-on-demand"


def count_candidates(N: int, D: int, K: int) -> int:
    """Number of K-combinations of data-spanned hyperplanes, ``C(C(N, D), K)``."""
    if N < D:
        return 0
    return comb(comb(N, D), K)


def assignments_per_tuple(K: int, activation: str) -> int:
    """Scored units per hyperplane tuple: fused pairs for maxout, all signs for ReLU."""
    return 1 << (K - 1) if activation == MAXOUT else 1 << K


def min_points(D: int, K: int) -> int:
    n = D
    while count_candidates(n, D, K) < 1:
        n += 1
    return n


# --------------------------------------------------------------------------
# split trees
# --------------------------------------------------------------------------

def split_strategy(n: int, shape: str = "balanced") -> Tree:
    """Merge tree over point indices ``0..n-1``.

    ``balanced`` halves at the midpoint; ``left`` and ``right`` build
    left-deep and right-deep chains (useful to check split independence).
    """
    if n == 0:
        return None
    if shape == "balanced":
        def build(lo, hi):
            if hi - lo == 1:
                return lo
            mid = (lo + hi) // 2
            return (build(lo, mid), build(mid, hi))
        return build(0, n)
    if shape == "left":
        tree: Tree = 0
        for i in range(1, n):
            tree = (tree, i)
        return tree
    if shape == "right":
        tree = n - 1
        for i in range(n - 2, -1, -1):
            tree = (i, tree)
        return tree
    raise ValueError(f"unknown split shape {shape!r}")


def tree_leaves(tree: Tree) -> list:
    if tree is None:
        return []
    if isinstance(tree, tuple):
        return tree_leaves(tree[0]) + tree_leaves(tree[1])
    return [int(tree)]


# --------------------------------------------------------------------------
# driver
# --------------------------------------------------------------------------

@dataclass
class SearchStats:
    merges: int = 0
    hyperplanes_created: int = 0
    tuples_evaluated: int = 0
    candidates: int = 0
    seconds: float = 0.0
    mode: str = BITSET_ONLY
    per_level: dict = field(default_factory=lambda: defaultdict(lambda: {"merges": 0, "candidates": 0, "seconds": 0.0}))
    history: list = field(default_factory=list)


@dataclass
class SearchResult:
    best: ScoredConfig
    stats: SearchStats
    cache: PredictionCache


class _Search:
    def __init__(self, ds, K, activation, cache, chunk, progress, loss_fn):
        self.ds, self.K, self.activation = ds, K, activation
        self.D = ds.dim
        self.cache = cache
        self.chunk = chunk
        self.progress = progress
        self.loss_fn = loss_fn
        self.per_tuple = assignments_per_tuple(K, activation)
        self.best: Optional[tuple] = None
        self.stats = SearchStats(mode=cache_mode(cache))
        self._lock = threading.Lock()

    def score(self, block: np.ndarray, level: int) -> None:
        losses = block_losses(self.cache, block, self.activation, self.loss_fn)
        cand = best_in_block(block, losses)
        with self._lock:
            if self.best is None or cand < self.best:
                self.best = cand
            self.stats.tuples_evaluated += len(block)
            self.stats.candidates += len(block) * self.per_tuple
            self.stats.per_level[level]["candidates"] += len(block) * self.per_tuple

    def merge(self, left, right, level: int):
        t0 = time.perf_counter()
        out = nested_merge(left, right, self.D, self.K,
                           on_new_hyperplanes=self.cache.add,
                           on_full=lambda block: self.score(block, level),
                           chunk=self.chunk)
        dt = time.perf_counter() - t0
        with self._lock:
            self.stats.merges += 1
            lvl = self.stats.per_level[level]
            lvl["merges"] += 1
            lvl["seconds"] += dt
            merges, best = self.stats.merges, self.best
            if best is not None:
                self.stats.history.append((merges, best))
        if self.progress is not None:
            self.progress(merges, None if best is None else best[0])
        return out

    def solve(self, tree: Tree, level: int = 0, pool=None, par_depth: int = 0):
        if tree is None:
            return empty_tables(self.D, self.K)
        if not isinstance(tree, tuple):
            return singleton_table(tree, self.D, self.K)
        left, right = tree
        if pool is not None and level < par_depth:
            fut = pool.submit(self.solve, left, level + 1, pool, par_depth)
            r = self.solve(right, level + 1, pool, par_depth)
            l = fut.result()
        else:
            l = self.solve(left, level + 1)
            r = self.solve(right, level + 1)
        return self.merge(l, r, level)


def cache_mode(cache: PredictionCache) -> str:
    if cache.on_demand:
        return UNRANK_ON_DEMAND
    return CACHE_DOTS if cache.keep_dots else BITSET_ONLY


def build_cache(ds: Dataset, activation: str, memory_cap: Optional[int] = None,
                mode: Optional[str] = None, eps: float = EPS) -> PredictionCache:
    keep_dots = activation == RELU
    if mode is None:
        mode = CACHE_DOTS if keep_dots else BITSET_ONLY
        if memory_cap is not None and cache_nbytes(ds.n, ds.dim, keep_dots) > memory_cap:
            mode = UNRANK_ON_DEMAND
    if mode == BITSET_ONLY and keep_dots:
        raise ConfigurationError("ReLU search needs raw dot products; use cache-dots or unrank-on-demand")
    if mode not in (CACHE_DOTS, BITSET_ONLY, UNRANK_ON_DEMAND):
        raise ConfigurationError(f"unknown cache mode {mode!r}")
    return PredictionCache(ds, keep_dots=keep_dots or mode == CACHE_DOTS, eps=eps,
                           on_demand=mode == UNRANK_ON_DEMAND)


def search(
    ds: Dataset,
    K: int,
    activation: str = MAXOUT,
    *,
    threads: int = 1,
    split: Union[str, Tree] = "balanced",
    memory_cap: Optional[int] = None,
    mode: Optional[str] = None,
    eps: float = EPS,
    chunk: int = DEFAULT_CHUNK,
    progress: Optional[Callable[[int, Optional[int]], None]] = None,
    loss_fn: LossFn = zero_one_loss,
) -> SearchResult:
    """Run the exact search and return the optimum with search statistics.

    ``progress(merges_done, best_loss)`` is called after every join with the
    best loss found so far (``None`` until the first complete tuple).
    """
    if activation not in ACTIVATIONS:
        raise ConfigurationError(f"unknown activation {activation!r}")
    if K < 1:
        raise ConfigurationError("K must be at least 1")
    N, D = ds.n, ds.dim
    total = count_candidates(N, D, K)
    if total < 1:
        raise NoConfigError(f"N={N} points in D={D} span fewer than K={K} hyperplanes")

    tree = split_strategy(N, split) if isinstance(split, str) else split
    if tree_leaves(tree) != list(range(N)):
        raise ValueError("split tree must list every point index once, in order")

    cache = build_cache(ds, activation, memory_cap, mode, eps)
    s = _Search(ds, K, activation, cache, chunk, progress, loss_fn)
    t0 = time.perf_counter()
    if threads > 1:
        par_depth = math.ceil(math.log2(threads))
        # one worker per submitted subtree so that waiting parents never starve children
        with ThreadPoolExecutor(max_workers=(1 << par_depth) - 1) as pool:
            s.solve(tree, 0, pool, par_depth)
    else:
        s.solve(tree)
    s.stats.seconds = time.perf_counter() - t0
    s.stats.hyperplanes_created = cache.created

    expected = total * s.per_tuple
    if s.stats.candidates != expected:
        raise DeepIceError(f"evaluated {s.stats.candidates} candidates, expected {expected}")

    loss, ranks, asg = s.best
    best = ScoredConfig(Config(ranks, asg, activation), loss,
                        defining_points=defining_points(ds, ranks))
    return SearchResult(best, s.stats, cache)


def deep_ice(ds: Dataset, K: int, activation: str = MAXOUT, **kwargs) -> ScoredConfig:
    """Globally optimal K-unit configuration under 0-1 loss."""
    return search(ds, K, activation, **kwargs).best


def defining_points(ds: Dataset, ranks) -> tuple:
    """Coordinates of the D points spanning each ranked hyperplane."""
    return tuple(
        tuple(tuple(float(v) for v in ds.points[i]) for i in unrank_combination(r, ds.dim))
        for r in ranks
    )
