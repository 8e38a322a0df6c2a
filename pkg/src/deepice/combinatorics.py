"""Combination ranking and the mergeable combination generators.

Tables are size-indexed lists of flat ``int64`` arrays: entry ``i`` has shape
``(count, i)`` and holds strictly increasing index tuples.  Merging two tables
built over disjoint segments is the join step of a divide-and-conquer
recursion over the data list; the nested variant additionally turns every
completed D-combination of points into a hyperplane rank and grows
combinations of those ranks.

Ranks use colexicographic order, so the rank of a combination does not depend
on the size of the pool it was drawn from.
"""
from __future__ import annotations

import itertools
import math
from math import comb
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .core import InvalidCombinationError

DEFAULT_CHUNK = 1 << 15


def rank_combination(combo: Sequence[int]) -> int:
    """Colex rank: ``sum(C(combo[i], i + 1))``."""
    combo = tuple(int(c) for c in combo)
    if any(c < 0 for c in combo):
        raise InvalidCombinationError(f"negative index in {combo}")
    if any(b <= a for a, b in zip(combo, combo[1:])):
        raise InvalidCombinationError(f"combination {combo} is not strictly increasing")
    return sum(comb(c, i + 1) for i, c in enumerate(combo))


def _largest_below(rank: int, i: int) -> int:
    # largest c with C(c, i) <= rank
    if rank == 0:
        return i - 1
    # float estimate of the i-th root of i! * rank brackets the answer; exact bisection finishes
    try:
        est = int((float(rank) * math.factorial(i)) ** (1.0 / i))
    except OverflowError:
        est = i
    lo, hi = i - 1, max(i, est)
    while comb(hi, i) <= rank:
        lo, hi = hi, 2 * hi + 1
    if lo < est - 1 and comb(est - 1, i) <= rank:
        lo = est - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if comb(mid, i) <= rank:
            lo = mid
        else:
            hi = mid
    return lo


def unrank_combination(rank: int, r: int) -> tuple:
    """Inverse of :func:`rank_combination` for combinations of size ``r``."""
    rank = int(rank)
    if rank < 0:
        raise InvalidCombinationError("rank must be nonnegative")
    out = []
    for i in range(r, 0, -1):
        c = _largest_below(rank, i)
        out.append(c)
        rank -= comb(c, i)
    return tuple(reversed(out))


class BinomialTable:
    """``C(n, i)`` for ``n < size`` and ``i <= r`` as an int64 lookup."""

    def __init__(self, size: int, r: int):
        self.size, self.r = size, r
        top = comb(max(size, 1), r) if size > r else 0
        if top >= 2 ** 62:
            raise OverflowError("ranks do not fit in int64; use rank_combination")
        table = np.zeros((max(size, 1), r + 1), dtype=np.int64)
        for n in range(size):
            for i in range(r + 1):
                table[n, i] = comb(n, i)
        self.table = table

    def rank_rows(self, combos: np.ndarray) -> np.ndarray:
        combos = np.asarray(combos, dtype=np.int64)
        if combos.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        cols = np.arange(1, combos.shape[1] + 1)
        return self.table[combos, cols].sum(axis=1)


def unrank_rows(ranks: Sequence[int], r: int) -> np.ndarray:
    return np.array([unrank_combination(x, r) for x in ranks], dtype=np.int64).reshape(-1, r)


# --------------------------------------------------------------------------
# tables
# --------------------------------------------------------------------------

class CombTable:
    """Size-indexed combinations; entry ``i`` is an ``(count, i)`` int64 array.

    Used both for point-index combinations (cap D) and, as the nested table,
    for hyperplane-rank combinations (cap K - 1 retained).
    """

    __slots__ = ("by_size",)

    def __init__(self, by_size: Sequence[np.ndarray]):
        self.by_size = [_as_rows(e, i) for i, e in enumerate(by_size)]

    @classmethod
    def empty(cls, cap: int) -> "CombTable":
        """Table of an empty segment: only the empty combination."""
        return cls([np.zeros((1, 0), dtype=np.int64)] + [np.zeros((0, i), dtype=np.int64) for i in range(1, cap + 1)])

    @classmethod
    def of_items(cls, items: Sequence[int], cap: int) -> "CombTable":
        """All combinations of size <= cap of ``items`` (assumed distinct)."""
        items = sorted(int(x) for x in items)
        entries = [np.zeros((1, 0), dtype=np.int64)]
        for i in range(1, cap + 1):
            flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(items, i)), dtype=np.int64)
            entries.append(flat.reshape(-1, i))
        return cls(entries)

    @property
    def cap(self) -> int:
        return len(self.by_size) - 1

    def __getitem__(self, i: int) -> np.ndarray:
        return self.by_size[i]

    def counts(self) -> list:
        return [len(e) for e in self.by_size]

    def set_empty(self, i: int) -> "CombTable":
        entries = list(self.by_size)
        entries[i] = np.zeros((0, i), dtype=np.int64)
        return CombTable(entries)

    def truncate(self, cap: int) -> "CombTable":
        return CombTable(self.by_size[: cap + 1])

    def elements(self) -> np.ndarray:
        return np.unique(np.concatenate([e.reshape(-1) for e in self.by_size]))

    def as_sets(self) -> list:
        return [set(map(tuple, e.tolist())) for e in self.by_size]

    def __repr__(self) -> str:
        return f"CombTable(counts={self.counts()})"


def _as_rows(e, i: int) -> np.ndarray:
    e = np.asarray(e, dtype=np.int64)
    if e.ndim == 2 and e.shape[1] == i:
        return e
    if i == 0:
        raise ValueError("entry 0 must be a 2-D array with zero columns")
    return e.reshape(-1, i)


def singleton_table(index: int, D: int, K: int) -> tuple:
    """(css, ncss) of a one-point segment."""
    css = CombTable.empty(D)
    css.by_size[1] = np.array([[int(index)]], dtype=np.int64)
    return css, CombTable.empty(max(K - 1, 0))


def empty_tables(D: int, K: int) -> tuple:
    return CombTable.empty(D), CombTable.empty(max(K - 1, 0))


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All concatenations ``l + r`` for rows l of a and r of b, rows sorted."""
    na, nb = len(a), len(b)
    out = np.empty((na * nb, a.shape[1] + b.shape[1]), dtype=np.int64)
    out[:, : a.shape[1]] = np.repeat(a, nb, axis=0)
    out[:, a.shape[1]:] = np.tile(b, (na, 1))
    out.sort(axis=1)
    return out


def iter_cross(a: np.ndarray, b: np.ndarray, chunk: int = DEFAULT_CHUNK) -> Iterator[np.ndarray]:
    """Stream :func:`cross` in bounded chunks."""
    if len(a) == 0 or len(b) == 0:
        return
    step = max(1, chunk // len(b))
    for start in range(0, len(a), step):
        yield cross(a[start:start + step], b)


def _check_disjoint(left: CombTable, right: CombTable) -> None:
    # tables are downward closed, so the singletons name every element
    if left.cap < 1 or right.cap < 1:
        return
    le, re = left[1].reshape(-1), right[1].reshape(-1)
    if le.size and re.size and np.intersect1d(le, re).size:
        raise InvalidCombinationError("tables cover overlapping index segments")


def kcombs_merge(left: CombTable, right: CombTable, cap: int, check: bool = True) -> CombTable:
    """Join step of the combination generator.

    Entry ``i`` of the result is the union over ``j`` of ``left[j] x right[i-j]``;
    sizes above ``cap`` are dropped.
    """
    if check:
        _check_disjoint(left, right)
    entries = []
    for i in range(cap + 1):
        parts = [
            cross(left[j], right[i - j])
            for j in range(i + 1)
            if j <= left.cap and i - j <= right.cap and len(left[j]) and len(right[i - j])
        ]
        entries.append(np.concatenate(parts) if parts else np.zeros((0, i), dtype=np.int64))
    return CombTable(entries)


def iter_kcombs_top(left: CombTable, right: CombTable, size: int, chunk: int = DEFAULT_CHUNK) -> Iterator[np.ndarray]:
    """Stream entry ``size`` of ``kcombs_merge(left, right)`` without storing it."""
    for j in range(size + 1):
        if j <= left.cap and size - j <= right.cap:
            yield from iter_cross(left[j], right[size - j], chunk)


def iter_combinations(items: np.ndarray, r: int, chunk: int = DEFAULT_CHUNK) -> Iterator[np.ndarray]:
    """All r-subsets of ``items`` (sorted), streamed in chunks."""
    items = np.sort(np.asarray(items, dtype=np.int64))
    if r > len(items):
        return
    it = itertools.combinations(range(len(items)), r)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, chunk)), dtype=np.int64)
        if flat.size == 0:
            return
        yield items[flat.reshape(-1, r)]


def nested_merge(
    left: tuple,
    right: tuple,
    D: int,
    K: int,
    on_new_hyperplanes: Callable[[np.ndarray], np.ndarray],
    on_full: Optional[Callable[[np.ndarray], None]] = None,
    chunk: int = DEFAULT_CHUNK,
) -> tuple:
    """Join step of the nested (hyperplane-of-points) combination generator.

    ``left`` and ``right`` are ``(css, ncss)`` pairs over disjoint, ordered
    segments.  Newly completed D-combinations of points are handed to
    ``on_new_hyperplanes`` which returns their ranks.  Every K-combination of
    hyperplanes that first becomes available at this merge is streamed to
    ``on_full`` in chunks (sorted rows) and is not stored; the returned nested
    table keeps sizes ``0 .. K-1`` only.
    """
    (lcss, lncss), (rcss, rncss) = left, right
    css = kcombs_merge(lcss, rcss, D)
    new_points = css[D]
    css = css.set_empty(D)

    if len(new_points):
        new_ranks = np.asarray(on_new_hyperplanes(new_points), dtype=np.int64).reshape(-1)
    else:
        new_ranks = np.zeros(0, dtype=np.int64)

    old = kcombs_merge(lncss, rncss, K - 1, check=False)
    new = CombTable.of_items(new_ranks, K - 1)
    ncss = kcombs_merge(old, new, K - 1, check=False)

    if on_full is not None:
        # old x old across the two halves
        for block in iter_kcombs_top(lncss, rncss, K, chunk):
            on_full(block)
        # mixed: j old hyperplanes with K - j new ones
        for j in range(1, K):
            for block in iter_cross(old[j], new[K - j], chunk):
                on_full(block)
        for block in iter_combinations(new_ranks, K, chunk):
            on_full(block)
    return css, ncss

