"""Seeded random instances: uniform labelled trees and uniform masses."""
from __future__ import annotations

import numpy as np

from .tree import CostParams, validate_tree

HIGH = 10**6


def prufer_tree(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints of a uniformly random labelled tree on ``n`` nodes.

    Decodes a random Prüfer sequence in linear time.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    seq = rng.integers(0, n, size=n - 2)
    deg = np.ones(n, dtype=np.int64)
    np.add.at(deg, seq, 1)
    u = np.empty(n - 1, np.int64)
    v = np.empty(n - 1, np.int64)
    deg = deg.tolist()
    ptr = 0
    while deg[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i, x in enumerate(seq.tolist()):
        u[i] = leaf
        v[i] = x
        deg[x] -= 1
        if deg[x] == 1 and x < ptr:
            leaf = x
        else:
            ptr += 1
            while deg[ptr] != 1:
                ptr += 1
            leaf = ptr
    u[n - 2] = leaf
    v[n - 2] = n - 1
    return u, v


def random_instance(n: int, rng: np.random.Generator, high: int = HIGH):
    """Prüfer tree with integer weights, masses and costs uniform in ``[0, high]``.

    Returns ``(tree, a, b, costs)``.
    """
    u, v = prufer_tree(n, rng)
    w = rng.integers(0, high + 1, n - 1)
    tree = validate_tree(np.column_stack([u, v, w]), n)
    a = rng.integers(0, high + 1, n)
    b = rng.integers(0, high + 1, n)
    costs = CostParams(rng.integers(0, high + 1, n), rng.integers(0, high + 1, n))
    return tree, a, b, costs


def trial_seed(seed: int, exponent: int, trial: int) -> int:
    """Per-trial seed derived from the run seed, stable across runs."""
    return int(np.random.SeedSequence([seed, exponent, trial]).generate_state(1, np.uint64)[0])
