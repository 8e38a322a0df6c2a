"""Layer-by-layer coreset filtering around the exact solver.

Each layer shuffles the surviving points, cuts them into blocks of about M
points, solves every block exactly, and keeps the L best (configuration,
block) pairs in a bounded heap.  The next layer's survivors are the distinct
points of the kept blocks, and L shrinks by the factor c.  Once the survivors
number at most ``bmax`` they are solved exactly one last time.  Every kept
configuration is then re-scored on the full dataset.
"""
from __future__ import annotations

import heapq
import itertools
import json
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .combinatorics import rank_combination
from .core import MAXOUT, Config, Dataset, DeepIceError, ScoredConfig
from .evaluator import PredictionCache, assignments, block_losses
from .geometry import EPS
from .solver import deep_ice, min_points

log = logging.getLogger(__name__)


class CoresetError(DeepIceError):
    pass


@dataclass(frozen=True)
class FilterParams:
    block_size: int = 60          # M
    rounds: int = 1               # R
    heap_size: int = 8            # L
    bmax: int = 120               # B_max
    shrink: float = 0.5           # c
    seed: int = 0

    def validate(self, D: int, K: int) -> None:
        if self.block_size < D + K:
            raise CoresetError(f"block size {self.block_size} below D+K={D + K}")
        if self.heap_size < 1:
            raise CoresetError("heap size must be at least 1")
        if not 0 < self.shrink <= 1:
            raise CoresetError("shrink factor must lie in (0, 1]")
        if self.bmax < self.block_size:
            raise CoresetError(f"bmax={self.bmax} is smaller than the block size {self.block_size}")
        if self.rounds < 1:
            raise CoresetError("rounds must be at least 1")


class BestHeap:
    """Keeps the ``capacity`` lowest-loss entries; on ties the earlier push survives."""

    def __init__(self, capacity: int):
        self.capacity = int(capacity)
        self._heap: list = []          # max-heap on (loss, seq) via negation
        self._seq = itertools.count()

    def push(self, scored: ScoredConfig, block: Sequence[int]) -> bool:
        item = (-scored.loss, -next(self._seq), scored, tuple(int(i) for i in block))
        if len(self._heap) < self.capacity:
            heapq.heappush(self._heap, item)
            return True
        if item > self._heap[0]:
            heapq.heapreplace(self._heap, item)
            return True
        return False

    def shrink_to(self, capacity: int) -> None:
        self.capacity = int(capacity)
        while len(self._heap) > self.capacity:
            heapq.heappop(self._heap)

    def entries(self) -> list:
        """``(ScoredConfig, block)`` pairs, best first."""
        return [(it[2], it[3]) for it in sorted(self._heap, reverse=True)]

    def __len__(self) -> int:
        return len(self._heap)


def partition(indices: np.ndarray, M: int, min_size: int) -> list:
    """Cut into ``ceil(n / M)`` consecutive blocks; a too-small tail joins its predecessor."""
    blocks = [indices[i:i + M] for i in range(0, len(indices), M)]
    if len(blocks) > 1 and len(blocks[-1]) < min_size:
        tail = blocks.pop()
        blocks[-1] = np.concatenate([blocks[-1], tail])
    return blocks


def _locate(ds: Dataset, points) -> list:
    lookup = {tuple(p): i for i, p in enumerate(ds.points.tolist())}
    try:
        return [lookup[tuple(p)] for p in points]
    except KeyError as exc:
        raise CoresetError("a stored defining point is not part of the dataset") from exc


def rescore_on_full(entries: Sequence, ds: Dataset, eps: float = EPS) -> list:
    """Refit every stored configuration on ``ds`` and score it on all points.

    ``entries`` holds ScoredConfigs or ``(ScoredConfig, block)`` pairs.
    Returned configurations use ``ds`` ranks and are sorted by full-data key.
    """
    out = []
    for entry in entries:
        scored = entry[0] if isinstance(entry, tuple) else entry
        if scored.defining_points is None:
            raise CoresetError("configuration has no defining points to refit from")
        combos = [tuple(sorted(_locate(ds, pts))) for pts in scored.defining_points]
        ranks = [rank_combination(c) for c in combos]
        # hyperplanes are re-derived in full-data indexing; the orientation of each
        # unit follows its hyperplane, not its position in the tuple
        order = np.argsort(ranks)
        ranks_sorted = [ranks[i] for i in order]
        asg = [scored.config.assignment[i] for i in order]
        pts = tuple(scored.defining_points[i] for i in order)
        out.append(_score_on(ds, ranks_sorted, asg, scored.config.activation, pts, scored.source_block, eps))
    out.sort(key=lambda s: s.key)
    return out


def _score_on(ds, ranks, asg, activation, pts, source, eps) -> ScoredConfig:
    cache = PredictionCache(ds, keep_dots=activation != MAXOUT, eps=eps, on_demand=True)
    losses = block_losses(cache, np.array([ranks], dtype=np.int64), activation)
    i = assignments(len(ranks)).index(tuple(asg))
    return ScoredConfig(Config(ranks, asg, activation), int(losses[0, i]), source_block=source,
                        defining_points=pts)


@dataclass
class CoresetResult:
    best: ScoredConfig
    heap: BestHeap
    rounds_log: list


def coreset_fit(
    ds: Dataset,
    K: int,
    activation: str = MAXOUT,
    params: FilterParams = FilterParams(),
    *,
    solver: Callable = deep_ice,
    eps: float = EPS,
    log_sink: Optional[Callable[[str], None]] = None,
    **solver_kwargs,
) -> CoresetResult:
    """Filter ``ds`` down to at most ``bmax`` points and solve exactly.

    Returns the best configuration re-scored on the full data, the heap, and
    one log record per layer (also written as JSON lines to ``log_sink``).
    """
    D = ds.dim
    params.validate(D, K)
    rng = np.random.default_rng(params.seed)
    smallest = max(min_points(D, K), D + K)
    survivors = np.arange(ds.n)
    L = params.heap_size
    heap = BestHeap(L)
    records = []

    def solve(idx: np.ndarray) -> ScoredConfig:
        idx = np.sort(idx)
        sub = ds.subset(idx)
        res = solver(sub, K, activation, eps=eps, **solver_kwargs)
        return res

    layer = 0
    while len(survivors) > params.bmax:
        t0 = time.perf_counter()
        heap = BestHeap(L)
        n_blocks = 0
        best_block_loss = None
        for _ in range(params.rounds):
            order = rng.permutation(survivors)
            for block in partition(order, params.block_size, smallest):
                block = np.sort(block)
                scored = solve(block)
                n_blocks += 1
                best_block_loss = scored.loss if best_block_loss is None else min(best_block_loss, scored.loss)
                heap.push(ScoredConfig(scored.config, scored.loss, source_block=(layer, n_blocks - 1),
                                       defining_points=scored.defining_points), block)
        kept = [b for _, b in heap.entries()]
        if not kept:
            raise CoresetError(f"layer {layer}: no block survived (|C|={len(survivors)})")
        new_survivors = np.unique(np.concatenate([np.asarray(b) for b in kept]))
        new_L = max(1, math.ceil(L * params.shrink))
        rec = {"round": layer, "size": int(len(survivors)), "heap": int(L), "blocks": n_blocks,
               "best_block_loss": best_block_loss, "survivors": int(len(new_survivors)),
               "seconds": time.perf_counter() - t0}
        records.append(rec)
        if log_sink is not None:
            log_sink(json.dumps(rec))
        log.debug("coreset layer %s", rec)
        if len(new_survivors) >= len(survivors) and new_L >= L:
            raise CoresetError(
                f"filtering stalled at {len(survivors)} points: heap size {L} times block size "
                f"{params.block_size} covers every point and shrink={params.shrink} cannot reduce it")
        if len(new_survivors) == 0:
            raise CoresetError("filtering collapsed to an empty survivor set")
        survivors = new_survivors
        L = new_L
        layer += 1

    heap.shrink_to(L)
    final = solve(survivors)
    heap.push(ScoredConfig(final.config, final.loss, source_block=(layer, "final"),
                           defining_points=final.defining_points), np.sort(survivors))
    rescored = rescore_on_full(heap.entries(), ds, eps)
    return CoresetResult(rescored[0], heap, records)
