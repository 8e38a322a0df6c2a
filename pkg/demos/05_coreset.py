"""Coreset filtering for data too large for the exact search.

Blocks of the data are solved exactly, the points of the best blocks
survive, and the loop repeats until at most bmax points remain.  The result
is never better than the exact optimum and can be worse.
"""
import json
import time

from deepice import FilterParams, coreset_fit, deep_ice, gen_data

ds = gen_data(80, 2, seed=11, kind="wedge", flip=0.08)
params = FilterParams(block_size=20, rounds=2, heap_size=3, bmax=30, shrink=0.5, seed=0)

t0 = time.perf_counter()
res = coreset_fit(ds, 2, params=params, log_sink=lambda line: print("  layer", json.loads(line)))
t_core = time.perf_counter() - t0
print(f"coreset: full-data loss {res.best.loss} in {t_core:.2f}s, heap holds {len(res.heap)}")

t0 = time.perf_counter()
exact = deep_ice(ds, 2)
print(f"exact:   loss {exact.loss} in {time.perf_counter() - t0:.2f}s")
