"""Network predictions, 0-1 loss, and selection of the best configuration.

A maxout unit over K oriented hyperplanes predicts +1 wherever at least one
oriented dot product is >= 0, so its positive set is the union of the K
non-negative sides.  Reversing every orientation only changes the points that
sit strictly on the positive side of all K planes (they become negative) or
on the non-positive side of all K (they become positive); the loss of the
reversed configuration is therefore read off the same rows without refitting.
"""
from __future__ import annotations

import itertools
import threading
from functools import lru_cache
from math import comb
from typing import Callable, Optional, Sequence

import numpy as np

from .combinatorics import BinomialTable, unrank_combination
from .core import (
    MAXOUT,
    RELU,
    CacheMissError,
    Config,
    ConfigurationError,
    Dataset,
    ScoredConfig,
    full_mask,
    n_words,
    pack_bits,
    popcount,
)
from .geometry import EPS, check_general_position, fit_normals, signed_distances

LossFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def zero_one_loss(pred_pos: np.ndarray, labels_pos: np.ndarray) -> np.ndarray:
    """Misclassification count of packed predictions against packed labels."""
    return popcount(pred_pos ^ labels_pos)


@lru_cache(maxsize=None)
def assignments(K: int) -> tuple:
    """All 2^K sign vectors in lexicographic order (-1 before +1).

    The negation of entry ``i`` is entry ``2**K - 1 - i``, and the entries
    with a leading +1 are the second half.
    """
    return tuple(itertools.product((-1, 1), repeat=K))


# --------------------------------------------------------------------------
# prediction cache
# --------------------------------------------------------------------------

def cache_nbytes(N: int, D: int, keep_dots: bool) -> int:
    rows = comb(N, D)
    per_row = 2 * 8 * n_words(N) + 1 + (8 * N if keep_dots else 0)
    return rows * per_row


class PredictionCache:
    """Sign rows of every fitted hyperplane, addressed by hyperplane rank.

    The workspace is preallocated with one row per possible D-combination
    (``C(N, D)`` rows) and rows are written once, when the hyperplane is
    created.  With ``on_demand=True`` nothing is stored: rows are rebuilt from
    the rank by unranking the point combination and refitting, at extra cost
    per lookup.
    """

    def __init__(self, ds: Dataset, keep_dots: bool = False, eps: float = EPS, on_demand: bool = False):
        self.ds = ds
        self.eps = eps
        self.keep_dots = keep_dots
        self.on_demand = on_demand
        self.N, self.D = ds.n, ds.dim
        self.n_rows = comb(self.N, self.D)
        self.binom = BinomialTable(self.N, self.D)
        self.valid = full_mask(self.N)
        self.created = 0
        self._lock = threading.Lock()
        W = n_words(self.N)
        if on_demand:
            self._filled = None
        else:
            self._nonneg = np.zeros((self.n_rows, W), dtype=np.uint64)
            self._strict = np.zeros((self.n_rows, W), dtype=np.uint64)
            self._filled = np.zeros(self.n_rows, dtype=bool)
            self._dots = np.zeros((self.n_rows, self.N)) if keep_dots else None

    def _fit(self, combos: np.ndarray):
        normals = fit_normals(self.ds.points[combos], combos)
        d = signed_distances(normals, self.ds, self.eps)
        nonneg, strict = pack_bits(d >= 0.0), pack_bits(d > 0.0)
        check_general_position(nonneg, strict, self.D, combos)
        return d, nonneg, strict

    def add(self, combos: np.ndarray) -> np.ndarray:
        """Fit hyperplanes for point combinations ``(B, D)`` and return their ranks."""
        combos = np.asarray(combos, dtype=np.int64).reshape(-1, self.D)
        ranks = self.binom.rank_rows(combos)
        d, nonneg, strict = self._fit(combos)
        if not self.on_demand:
            # distinct segments own distinct ranks, so concurrent writes never collide
            self._nonneg[ranks] = nonneg
            self._strict[ranks] = strict
            if self._dots is not None:
                self._dots[ranks] = d
            self._filled[ranks] = True
        with self._lock:
            self.created += len(combos)
        return ranks

    def _rebuild(self, ranks: np.ndarray):
        flat = ranks.reshape(-1)
        uniq, inv = np.unique(flat, return_inverse=True)
        if uniq.size and (uniq[0] < 0 or uniq[-1] >= self.n_rows):
            raise CacheMissError(f"rank outside 0..{self.n_rows - 1}")
        combos = np.array([unrank_combination(r, self.D) for r in uniq.tolist()], dtype=np.int64).reshape(-1, self.D)
        d, nonneg, strict = self._fit(combos)
        return d[inv], nonneg[inv], strict[inv]

    def _check(self, ranks: np.ndarray) -> None:
        if ranks.size and (ranks.min() < 0 or ranks.max() >= self.n_rows or not self._filled[ranks].all()):
            raise CacheMissError("rank requested before its hyperplane was created")

    def masks(self, ranks) -> tuple:
        """``(nonneg, strictpos)`` rows, shape ``ranks.shape + (W,)``."""
        ranks = np.asarray(ranks, dtype=np.int64)
        if self.on_demand:
            _, nonneg, strict = self._rebuild(ranks)
            W = nonneg.shape[-1]
            return nonneg.reshape(ranks.shape + (W,)), strict.reshape(ranks.shape + (W,))
        self._check(ranks)
        return self._nonneg[ranks], self._strict[ranks]

    def dots(self, ranks) -> np.ndarray:
        ranks = np.asarray(ranks, dtype=np.int64)
        if not self.keep_dots:
            raise ConfigurationError("ReLU evaluation needs a cache built with keep_dots=True")
        if self.on_demand:
            d, _, _ = self._rebuild(ranks)
            return d.reshape(ranks.shape + (self.N,))
        self._check(ranks)
        return self._dots[ranks]

    def combo(self, rank: int) -> tuple:
        return unrank_combination(rank, self.D)


# --------------------------------------------------------------------------
# batched scoring
# --------------------------------------------------------------------------

def maxout_losses(nonneg: np.ndarray, strict: np.ndarray, valid: np.ndarray, labels_pos: np.ndarray,
                  loss_fn: LossFn = zero_one_loss) -> np.ndarray:
    """Losses of all 2^K assignments for a block of K-tuples, using symmetric fusion.

    ``nonneg`` and ``strict`` have shape ``(M, K, W)``.  Only assignments with
    a leading +1 are unioned; each one's negation is scored from the
    intersection of the strictly-positive sides under the original signs.
    Returns ``(M, 2^K)`` in :func:`assignments` order.
    """
    M, K, _ = nonneg.shape
    A = 1 << K
    out = np.empty((M, A), dtype=np.int64)
    not_strict = ~strict & valid
    not_nonneg = ~nonneg & valid
    for i in range(A // 2, A):
        a = assignments(K)[i]
        pos = (nonneg[:, 0] if a[0] > 0 else not_strict[:, 0]).copy()
        both = (strict[:, 0] if a[0] > 0 else not_nonneg[:, 0]).copy()
        for k in range(1, K):
            if a[k] > 0:
                pos |= nonneg[:, k]
                both &= strict[:, k]
            else:
                pos |= not_strict[:, k]
                both &= not_nonneg[:, k]
        out[:, i] = loss_fn(pos, labels_pos)
        out[:, A - 1 - i] = loss_fn(~both & valid, labels_pos)
    return out


def maxout_losses_direct(nonneg: np.ndarray, strict: np.ndarray, valid: np.ndarray, labels_pos: np.ndarray,
                         loss_fn: LossFn = zero_one_loss) -> np.ndarray:
    """Same as :func:`maxout_losses` but unions every assignment explicitly."""
    M, K, _ = nonneg.shape
    A = 1 << K
    out = np.empty((M, A), dtype=np.int64)
    not_strict = ~strict & valid
    for i, a in enumerate(assignments(K)):
        pos = np.zeros_like(nonneg[:, 0])
        for k in range(K):
            pos |= nonneg[:, k] if a[k] > 0 else not_strict[:, k]
        out[:, i] = loss_fn(pos, labels_pos)
    return out


def relu_decision(dots: np.ndarray, assignment: Sequence[int]) -> np.ndarray:
    """Output-layer value ``sum_k a_k * max(0, a_k * d_k)`` summed in k order.

    ``dots`` has shape ``(..., K, N)``; a +1 sign contributes ``max(0, d)``,
    a -1 sign ``min(0, d)``.
    """
    f = None
    for k, a in enumerate(assignment):
        term = np.maximum(dots[..., k, :], 0.0) if a > 0 else np.minimum(dots[..., k, :], 0.0)
        f = term.copy() if f is None else f + term
    return f


def relu_losses(dots: np.ndarray, labels_pos: np.ndarray, loss_fn: LossFn = zero_one_loss) -> np.ndarray:
    """Losses of all 2^K assignments for a block ``(M, K, N)`` of ReLU units."""
    M, K, _ = dots.shape
    out = np.empty((M, 1 << K), dtype=np.int64)
    for i, a in enumerate(assignments(K)):
        out[:, i] = loss_fn(pack_bits(relu_decision(dots, a) >= 0.0), labels_pos)
    return out


def block_losses(cache: PredictionCache, block: np.ndarray, activation: str,
                 loss_fn: LossFn = zero_one_loss) -> np.ndarray:
    labels = cache.ds.labels_pos
    if activation == MAXOUT:
        nonneg, strict = cache.masks(block)
        return maxout_losses(nonneg, strict, cache.valid, labels, loss_fn)
    if activation == RELU:
        return relu_losses(cache.dots(block), labels, loss_fn)
    raise ConfigurationError(f"unknown activation {activation!r}")


def best_in_block(block: np.ndarray, losses: np.ndarray) -> tuple:
    """``(loss, ranks, assignment)`` minimising loss, then ranks, then assignment."""
    mn = losses.min()
    rows, cols = np.nonzero(losses == mn)
    keys = [cols] + [block[rows, k] for k in range(block.shape[1] - 1, -1, -1)]
    j = np.lexsort(keys)[0]
    K = block.shape[1]
    return int(mn), tuple(int(r) for r in block[rows[j]]), assignments(K)[cols[j]]


# --------------------------------------------------------------------------
# single-configuration API
# --------------------------------------------------------------------------

def _as_block(ranks: Sequence[int]) -> np.ndarray:
    return np.asarray(ranks, dtype=np.int64).reshape(1, -1)


def eval_maxout(cache: PredictionCache, ranks: Sequence[int], assignment: Sequence[int],
                labels_pos: Optional[np.ndarray] = None) -> tuple:
    """``(loss(a), loss(-a))`` of a maxout configuration."""
    labels_pos = cache.ds.labels_pos if labels_pos is None else labels_pos
    nonneg, strict = cache.masks(_as_block(ranks))
    K = nonneg.shape[1]
    a = tuple(int(x) for x in assignment)
    i = assignments(K).index(a)
    losses = maxout_losses(nonneg, strict, cache.valid, labels_pos)[0]
    return int(losses[i]), int(losses[(1 << K) - 1 - i])


def maxout_positive_set(cache: PredictionCache, ranks: Sequence[int], assignment: Sequence[int]) -> np.ndarray:
    nonneg, strict = cache.masks(np.asarray(ranks, dtype=np.int64))
    pos = np.zeros_like(cache.valid)
    for k, a in enumerate(assignment):
        pos |= nonneg[k] if a > 0 else (~strict[k] & cache.valid)
    return pos


def eval_relu(cache: PredictionCache, ranks: Sequence[int], assignment: Sequence[int],
              labels_pos: Optional[np.ndarray] = None) -> int:
    labels_pos = cache.ds.labels_pos if labels_pos is None else labels_pos
    dots = cache.dots(_as_block(ranks))
    pred = relu_decision(dots, tuple(assignment)) >= 0.0
    return int(zero_one_loss(pack_bits(pred), labels_pos)[0])


def eval_assignments(cache: PredictionCache, ranks: Sequence[int], activation: str = MAXOUT,
                     labels_pos: Optional[np.ndarray] = None) -> ScoredConfig:
    """Best assignment for one hyperplane tuple (maxout via 2^(K-1) fused pairs)."""
    block = np.sort(_as_block(ranks), axis=1)
    if labels_pos is None:
        losses = block_losses(cache, block, activation)
    elif activation == MAXOUT:
        nonneg, strict = cache.masks(block)
        losses = maxout_losses(nonneg, strict, cache.valid, labels_pos)
    else:
        losses = relu_losses(cache.dots(block), labels_pos)
    loss, r, a = best_in_block(block, losses)
    return ScoredConfig(Config(r, a, activation), loss)


def min_01(a: Optional[ScoredConfig], b: Optional[ScoredConfig]) -> Optional[ScoredConfig]:
    """Lower loss wins; ties go to the lexicographically smaller (ranks, assignment)."""
    if a is None:
        return b
    if b is None:
        return a
    return a if a.key <= b.key else b
