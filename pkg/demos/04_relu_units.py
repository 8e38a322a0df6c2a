"""ReLU networks with unit output weights.

Each unit contributes max(0, d) with sign +1 or min(0, d) with sign -1, and a
point is positive when the sum is nonnegative.  All 2^K sign patterns are
tried for every K-tuple of hyperplanes.
"""
from deepice import RELU, MAXOUT, deep_ice, gen_data
from deepice.model import model_from_config

ds = gen_data(16, 2, seed=7, kind="blobs")
for act in (MAXOUT, RELU):
    for K in (1, 2, 3):
        best = deep_ice(ds, K, act)
        print(f"{act:6s} K={K}: loss {best.loss}, signs {best.config.assignment}")

best = deep_ice(ds, 2, RELU)
model = model_from_config(best, ds)
print("decision values on the first five points:", model.decision_values(ds.points[:5]).round(3))
