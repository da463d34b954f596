"""
Solver speed on random trees
============================

Random labelled trees (uniform, via Pruefer sequences) with masses, edge
lengths and costs drawn uniformly from ``[0, 10**6]``. The solver time grows
almost linearly with the number of nodes, while the min-cost-flow oracle
falls behind quickly.
"""
import time

import numpy as np

from treegkr import gkr_distance, gkr_oracle
from treegkr.instances import random_instance

# the first call compiles the kernel (or loads it from the cache)
gkr_distance(*random_instance(16, np.random.default_rng(0)))

for k in range(8, 19, 2):
    tree, a, b, costs = random_instance(1 << k, np.random.default_rng(k))
    t0 = time.perf_counter()
    d = gkr_distance(tree, a, b, costs).distance
    print(f"n=2^{k:<2d}  {1e3 * (time.perf_counter() - t0):8.2f} ms  distance={d}")

###############################################################################
# Against the oracle at a size where it still finishes in a second or two.
tree, a, b, costs = random_instance(1 << 10, np.random.default_rng(1))
t0 = time.perf_counter()
fast = gkr_distance(tree, a, b, costs).distance
t_fast = time.perf_counter() - t0
t0 = time.perf_counter()
slow = gkr_oracle(tree, a, b, costs)
t_slow = time.perf_counter() - t0
print(fast == slow, f"speed-up x{t_slow / t_fast:.0f}")

###############################################################################
# The same protocol, with CSV output, is available from the command line:
#
#   treegkr bench --min-exp 7 --max-exp 20 --trials 10 --out bench.csv
