"""Instance generators and independent reference computations for the tests."""
from __future__ import annotations

import itertools
import math
import random

import numpy as np

from treegkr.tree import CostParams, distance_matrix, validate_tree

INF = math.inf


def random_edges(n: int, rng: random.Random, max_w: int = 10, shape: str | None = None):
    shape = shape or rng.choice(["recursive", "prufer", "path", "star", "caterpillar"])
    if n == 1:
        return []
    if shape == "path":
        perm = list(range(n))
        rng.shuffle(perm)
        pairs = [(perm[i], perm[i + 1]) for i in range(n - 1)]
    elif shape == "star":
        c = rng.randrange(n)
        pairs = [(c, x) for x in range(n) if x != c]
    elif shape == "caterpillar":
        spine = max(1, n // 2)
        pairs = [(i, i - 1) for i in range(1, spine)] + [(i, rng.randrange(spine)) for i in range(spine, n)]
    elif shape == "prufer":
        seq = [rng.randrange(n) for _ in range(n - 2)]
        deg = [1] * n
        for x in seq:
            deg[x] += 1
        pairs = []
        for x in seq:
            leaf = min(i for i in range(n) if deg[i] == 1)
            pairs.append((leaf, x))
            deg[leaf] -= 1
            deg[x] -= 1
        u, v = [i for i in range(n) if deg[i] == 1]
        pairs.append((u, v))
    else:
        pairs = [(i, rng.randrange(i)) for i in range(1, n)]
    return [(u, v, rng.randint(0, max_w)) for u, v in pairs]


def random_lambda(n: int, rng: random.Random, tree=None, kind: str | None = None):
    """Costs drawn from ``{0..10, inf}`` in several flavours.

    ``kind``: constant, mixed (per node, may violate the cost condition),
    mixed_sym (same but lambda_d = lambda_c), anchors (distance to an
    anchor set, always satisfies the condition) or inf.
    """
    kind = kind or rng.choice(["constant", "mixed", "mixed", "mixed_sym", "anchors", "inf"])
    pick = lambda: INF if rng.random() < 0.15 else rng.randint(0, 10)  # noqa: E731
    if kind == "constant":
        lam = pick()
        return CostParams([lam] * n, [lam] * n)
    if kind == "inf":
        return CostParams([INF] * n, [INF] * n)
    if kind == "mixed_sym":
        ld = [pick() for _ in range(n)]
        return CostParams(ld, list(ld))
    if kind == "anchors":
        from treegkr.gkr import boundary_params

        k = rng.randint(1, max(1, n // 4))
        return boundary_params(tree, rng.sample(range(n), k))
    return CostParams([pick() for _ in range(n)], [pick() for _ in range(n)])


def seeded_instances(count: int = 1000, seed: int = 20240101, max_n: int = 64):
    """Seeded instances: n <= 64, masses <= 20, weights <= 10, lambda in {0..10, inf}."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n = rng.randint(1, max_n) if i % 4 else rng.randint(1, 8)
        tree = validate_tree(random_edges(n, rng), n)
        a = [rng.randint(0, 20) if rng.random() < 0.7 else 0 for _ in range(n)]
        b = [rng.randint(0, 20) if rng.random() < 0.7 else 0 for _ in range(n)]
        costs = random_lambda(n, rng, tree)
        out.append((tree, a, b, costs))
    return out


def balanced_pair(n: int, rng: random.Random, max_mass: int = 20):
    a = [rng.randint(0, max_mass) for _ in range(n)]
    b = [0] * n
    for _ in range(sum(a)):
        b[rng.randrange(n)] += 1
    return a, b


def closed_form_wasserstein(tree, a, b) -> int:
    """Sum over edges of weight times the subtree imbalance, by DFS from node 0."""
    n = tree.n
    adj = [[] for _ in range(n)]
    for u, v, w in tree.edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    parent = [-1] * n
    pw = [0] * n
    order = [0]
    seen = [False] * n
    seen[0] = True
    for x in order:
        for y, w in adj[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                pw[y] = w
                order.append(y)
    diff = [a[i] - b[i] for i in range(n)]
    total = 0
    for x in reversed(order[1:]):
        total += pw[x] * abs(diff[x])
        diff[parent[x]] += diff[x]
    return total


# ---------------------------------------------------------------- enumeration

BIG = 10**9  # stands in for an infinite cost; any plan using it costs >= BIG


def _finite(x):
    return BIG if x == INF else int(x)


def enumerate_all_measures(dist, ld, lc, cap: int = 3) -> np.ndarray:
    """GKR for every pair of integer measures with entries in ``0..cap``.

    Returns an array indexed ``[a_0, .., a_{n-1}, b_0, .., b_{n-1}]``;
    entries ``>= BIG`` mean infinite. For a sub-coupling ``pi`` the cost is
    ``a.ld + b.lc + sum pi_xy (d_xy - ld_x - lc_y)``; the minimum of the last
    sum over every integer ``pi`` with given row and column sums is built
    row by row, then relaxed to row/column sums dominated by ``(a, b)``.
    """
    n = len(dist)
    LD = [_finite(x) for x in ld]
    LC = [_finite(x) for x in lc]
    top = np.iinfo(np.int64).max // 4
    H = np.full((cap + 1,) * (2 * n), top, dtype=np.int64)
    H[(0,) * (2 * n)] = 0
    choices = [v for v in itertools.product(range(cap + 1), repeat=n) if sum(v) <= cap]
    for x in range(n):
        gain = [dist[x][y] - LD[x] - LC[y] for y in range(n)]
        new = np.full_like(H, top)
        for v in choices:
            s = sum(v)
            src = [slice(None)] * (2 * n)
            dst = [slice(None)] * (2 * n)
            src[x], dst[x] = 0, s
            for y in range(n):
                src[n + y] = slice(0, cap + 1 - v[y])
                dst[n + y] = slice(v[y], cap + 1)
            cost = sum(v[y] * gain[y] for y in range(n))
            cand = H[tuple(src)] + cost
            view = new[tuple(dst)]
            np.minimum(view, np.where(H[tuple(src)] >= top, top, cand), out=view)
        H = new
    for axis in range(2 * n):
        H = np.minimum.accumulate(H, axis=axis)
    grid = np.indices((cap + 1,) * (2 * n))
    base = sum(grid[i] * LD[i] for i in range(n)) + sum(grid[n + i] * LC[i] for i in range(n))
    return H + base


def brute_force_gkr(dist, a, b, ld, lc):
    """Direct enumeration of every integer sub-coupling (tiny instances only)."""
    n = len(a)
    cells = [(x, y) for x in range(n) for y in range(n)]
    best = INF
    ranges = [range(min(a[x], b[y]) + 1) for x, y in cells]
    for vals in itertools.product(*ranges):
        rows = [0] * n
        cols = [0] * n
        cost = 0
        for (x, y), m in zip(cells, vals):
            rows[x] += m
            cols[y] += m
            cost += m * dist[x][y]
        if any(rows[i] > a[i] or cols[i] > b[i] for i in range(n)):
            continue
        for i in range(n):
            if a[i] > rows[i]:
                cost += (a[i] - rows[i]) * ld[i]
            if b[i] > cols[i]:
                cost += (b[i] - cols[i]) * lc[i]
        best = min(best, cost)
    return best


def tree_distances(tree):
    return distance_matrix(tree)
