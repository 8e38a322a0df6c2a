"""Exact training of a two-unit maxout network on a small synthetic set.

Every hyperplane through two data points is a candidate unit; the search
visits every pair of such hyperplanes and both orientations of each, so the
reported loss is the global minimum of the 0-1 loss.
"""
from math import comb

from deepice import deep_ice, gen_data, search
from deepice.oracle import oracle_exact

ds = gen_data(30, 2, seed=4, kind="wedge", flip=0.1)
print(f"{ds.n} points in R^{ds.dim}, {int((ds.labels > 0).sum())} positive")

# K=1 is the best linear classifier, K=2 the best union of two half-planes
for K in (1, 2):
    res = search(ds, K)
    print(f"K={K}: loss {res.best.loss}  hyperplanes {res.stats.hyperplanes_created} (= C({ds.n},2) = {comb(ds.n, 2)})"
          f"  candidates {res.stats.candidates}  {res.stats.seconds:.2f}s")

# the brute-force enumeration agrees, including which optimum is reported on ties
small = ds.subset(range(9))
print("fast == brute force on 9 points:", deep_ice(small, 2).key == oracle_exact(small, 2).key)

# each unit is stored as the points that span it, not as indices
best = deep_ice(ds, 2)
for pts, a in zip(best.defining_points, best.config.assignment):
    print(f"  unit through {pts[0]} and {pts[1]}, orientation {a:+d}")
