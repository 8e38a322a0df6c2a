"""Ranking combinations and the merge algebra behind the search.

A D-combination of points is stored as one integer (its colex rank).  Tables
of combinations of each size are merged bottom-up; every D-combination is
completed at exactly one merge, which is where its hyperplane gets fitted.
"""
import numpy as np

from deepice.combinatorics import (
    CombTable,
    kcombs_merge,
    nested_merge,
    rank_combination,
    singleton_table,
    unrank_combination,
)

# colex order of the 2-subsets of {0,1,2,3}
for r in range(6):
    print(r, unrank_combination(r, 2))
print("rank of (1, 3):", rank_combination((1, 3)))
print("rank of (1, 3) does not depend on the pool size; rank of (10, 40, 77):", rank_combination((10, 40, 77)))

left = CombTable.of_items([0, 1], 1)
right = CombTable.of_items([2], 1)
print("pairs across {0,1} and {2}:", sorted(kcombs_merge(left, right, 2).as_sets()[2]))

# trace hyperplane creation for four points merged as ((0,1),(2,3))
created = []


def fit(points):
    created.append(points.tolist())
    return np.array([rank_combination(p) for p in points.tolist()])


full = []
tables = [singleton_table(i, 2, 2) for i in range(4)]
a = nested_merge(tables[0], tables[1], 2, 2, fit, full.extend)
b = nested_merge(tables[2], tables[3], 2, 2, fit, full.extend)
nested_merge(a, b, 2, 2, fit, full.extend)
for step, pts in enumerate(created):
    print(f"merge {step}: new hyperplanes through {pts}")
print(f"{len(full)} pairs of hyperplanes streamed to the evaluator")
