"""Scoring an assignment and its negation from one pass.

For maxout, the points that change sides when every unit is flipped are the
ones that were positive (or on the plane) for all units at once.  The fused
evaluator therefore scores only assignments starting with +1 and derives the
other half.
"""
import itertools

import numpy as np

from deepice import gen_data
from deepice.evaluator import PredictionCache, assignments, maxout_losses, maxout_losses_direct

ds = gen_data(8, 2, seed=1)
cache = PredictionCache(ds)
cache.add(np.array(list(itertools.combinations(range(ds.n), 2))))
block = np.array(list(itertools.combinations(range(28), 3)))
nonneg, strict = cache.masks(block)

fused = maxout_losses(nonneg, strict, cache.valid, ds.labels_pos)
direct = maxout_losses_direct(nonneg, strict, cache.valid, ds.labels_pos)
print("assignments:", assignments(3))
print(f"{len(block)} triples of hyperplanes, fused == direct:", np.array_equal(fused, direct))
print("best loss over all triples and signs:", fused.min())
