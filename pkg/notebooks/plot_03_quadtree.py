"""
Approximating Euclidean GKR with a quadtree
===========================================

Two weighted point clouds in the unit square are embedded into a randomly
shifted quadtree. GKR on the tree is cheap to compute; after fitting a
single scale factor it tracks the exact Euclidean value closely.
"""
import numpy as np
from scipy.stats import spearmanr

from treegkr import PointCloud, build_quadtree, gkr_distance
from treegkr.oracle import euclidean_gkr_exact
from treegkr.quadtree import fit_metric_scale_ternary, scale_heuristic


def clouds(seed):
    rng = np.random.default_rng(seed)
    na, nb = rng.integers(10, 51, 2)
    return (PointCloud(rng.random((na, 2)), rng.random(na)),
            PointCloud(rng.random((nb, 2)), rng.random(nb)))


def embed(seed):
    ca, cb = clouds(seed)
    build, a, b = build_quadtree(ca, cb, depth=15, seed=seed, translate=True)
    return build, a, b, ca, cb


lam = 0.1
train = [embed(1000 + s) for s in range(10)]
test = [embed(s) for s in range(30)]


def exact(group):
    return [euclidean_gkr_exact(ca.points, ca.masses, cb.points, cb.masses, lam) for *_, ca, cb in group]


###############################################################################
# A first guess for the scale is the mean ratio of Euclidean to tree
# distance between leaf cells.
print("heuristic scale:", scale_heuristic(train[0][0], K=200))

###############################################################################
# Ternary search picks the edge-length scale that minimises the mean
# relative error on the training clouds.
s = fit_metric_scale_ternary([(bd.tree, a, b, bd.costs(lam)) for bd, a, b, *_ in train], exact(train))
print("fitted scale:", s)

approx = np.array([gkr_distance(bd.scaled(s), a, b, bd.costs(lam), mode="float").distance for bd, a, b, *_ in test])
truth = np.array(exact(test))
print("spearman:", spearmanr(approx, truth).statistic)
print("median relative error:", np.median(np.abs(approx - truth) / truth))
