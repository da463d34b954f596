"""Quadtree embeddings of point clouds and scale fitting.

A quadtree over ``R^d`` recursively halves a bounding cube along every
axis. Points of both clouds are pushed down to a fixed depth; every
non-empty cell becomes a tree node, joined to its parent cell by an edge
whose length is the distance between the two cell centers. GKR on the
resulting tree approximates GKR under the Euclidean metric up to a scale
factor, which the fitting helpers estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial.distance import pdist

from .errors import (
    DimensionMismatch,
    EmptyClouds,
    EmptyTrainingSet,
    TooFewLeaves,
    ZeroEuclideanDistance,
)
from .tree import CostParams, Tree, validate_tree

MAX_DIM = 12
SPREAD_LIMIT = 4000  # above this many points the spread is not computed


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Weighted points in ``R^d``.

    Parameters
    ----------
    points : array-like, shape (n, d)
    masses : array-like, shape (n,)
        Non-negative. Integer masses stay integers in the built measures.
    """

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DimensionMismatch(f"points must be an (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        m = np.asarray(self.masses)
        if m.dtype.kind not in "iu":
            m = m.astype(np.float64)
        if m.shape != (pts.shape[0],):
            raise DimensionMismatch(f"{pts.shape[0]} points but {m.size} masses")
        if m.size and (np.any(m < 0) or not np.all(np.isfinite(m))):
            raise ValueError("masses must be finite and non-negative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", m)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class QuadtreeBuild:
    """A built quadtree and where each input point landed.

    Attributes
    ----------
    tree : Tree
        Node 0 is the root cell.
    leaf_of_a, leaf_of_b : ndarray of int
        Leaf node of every point of each cloud.
    depth : int
    translation : ndarray, shape (d,)
        Random offset of the grid (zeros when not translated).
    origin : ndarray, shape (d,)
        Lower corner of the root cell.
    side : float
        Side length of the root cell.
    centers : ndarray, shape (n_nodes, d)
    half_width : ndarray, shape (n_nodes,)
    level : ndarray, shape (n_nodes,)
    parent : ndarray, shape (n_nodes,)
        ``-1`` for the root.
    weighting : str
    spread : float or None
        Farthest over closest distance between distinct input points.
        Informational only.
    """

    tree: Tree
    leaf_of_a: np.ndarray
    leaf_of_b: np.ndarray
    depth: int
    translation: np.ndarray
    origin: np.ndarray
    side: float
    centers: np.ndarray
    half_width: np.ndarray
    level: np.ndarray
    parent: np.ndarray
    weighting: str
    spread: float | None

    @property
    def n_nodes(self) -> int:
        return self.tree.n

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.level == self.depth)

    def costs(self, lambda_d, lambda_c=None) -> CostParams:
        """Creation/destruction costs: finite on leaves, infinite elsewhere.

        Each of *lambda_d*, *lambda_c* is a scalar or one value per input
        point (cloud a first, then cloud b). A leaf holding several points
        takes the smallest of their values.
        """
        if lambda_c is None:
            lambda_c = lambda_d
        n_pts = len(self.leaf_of_a) + len(self.leaf_of_b)
        where = np.concatenate([self.leaf_of_a, self.leaf_of_b])
        out = []
        for lam in (lambda_d, lambda_c):
            vals = np.full(self.n_nodes, np.inf)
            lam = np.asarray(lam, dtype=np.float64)
            if lam.ndim == 0:
                vals[self.leaves] = float(lam)
            else:
                if lam.shape != (n_pts,):
                    raise DimensionMismatch(f"expected {n_pts} per-point costs, got {lam.size}")
                np.minimum.at(vals, where, lam)
            out.append(vals)
        return CostParams(out[0], out[1])

    def scaled(self, s: float) -> Tree:
        """The same tree with every edge length multiplied by *s*."""
        t = self.tree
        return Tree(t.n, t.u, t.v, t.w * float(s))

    def leaf_distance(self, x: int, y: int) -> float:
        """Tree distance between two nodes, via their common ancestor."""
        total = 0.0
        par, lev, w = self.parent, self.level, self._up
        while lev[x] > lev[y]:
            total += w[x]
            x = par[x]
        while lev[y] > lev[x]:
            total += w[y]
            y = par[y]
        while x != y:
            total += w[x] + w[y]
            x, y = par[x], par[y]
        return float(total)

    @cached_property
    def _up(self) -> np.ndarray:
        # weight of the edge to the parent, indexed by child; edges are built in child order
        up = np.zeros(self.n_nodes)
        up[self.tree.v] = self.tree.w
        return up


def _spread(points: np.ndarray) -> float | None:
    if len(points) > SPREAD_LIMIT:
        return None
    d = pdist(points)
    d = d[d > 0]
    if d.size == 0:
        return None
    return float(d.max() / d.min())


def build_quadtree(
    cloud_a: PointCloud,
    cloud_b: PointCloud,
    depth: int = 15,
    seed: int | None = 0,
    translate: bool = True,
    weighting: str = "centers",
):
    """Build a quadtree over the union of two clouds.

    Parameters
    ----------
    cloud_a, cloud_b : PointCloud
    depth : int
        Number of subdivision levels; every point ends in a leaf at this level.
    seed : int, optional
        Seed of the random grid translation.
    translate : bool
        Shift the grid by a random offset in ``[0, L)^d`` where ``L`` is the
        side of the bounding cube. The root cell is doubled so that it still
        contains every point.
    weighting : {"centers", "dyadic"}
        ``"centers"``: edge length is the distance between parent and child
        cell centers. ``"dyadic"``: edge length is the side of the child cell.

    Returns
    -------
    build : QuadtreeBuild
    a, b : ndarray
        Masses of each cloud accumulated on the tree nodes.
    """
    if cloud_a.dimension != cloud_b.dimension:
        raise DimensionMismatch(
            f"cloud dimensions differ: {cloud_a.dimension} vs {cloud_b.dimension}"
        )
    if cloud_a.n + cloud_b.n == 0:
        raise EmptyClouds("both point clouds are empty")
    if int(depth) != depth or depth < 1:
        raise ValueError(f"depth must be a positive integer, got {depth}")
    depth = int(depth)
    if depth > 60:
        raise ValueError("depth above 60 exceeds the integer cell index range")
    if weighting not in ("centers", "dyadic"):
        raise ValueError(f"unknown weighting {weighting!r}")
    d = cloud_a.dimension
    if d > MAX_DIM:
        raise DimensionMismatch(f"dimension {d} exceeds the quadtree limit of {MAX_DIM}")

    pts = np.concatenate([cloud_a.points, cloud_b.points])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = 0.01 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    side = float((hi - lo).max())
    if side == 0.0:
        side = 1.0  # all points coincide
    center = (lo + hi) / 2
    origin = center - side / 2
    offset = np.zeros(d)
    if translate:
        offset = np.random.default_rng(seed).uniform(0.0, side, size=d)
        origin = origin - offset
        side *= 2

    # integer cell of every point at the deepest level; cells are (lo, hi]
    cells = 1 << depth
    leaf_side = side / cells
    q = np.ceil((pts - origin) / leaf_side).astype(np.int64) - 1
    np.clip(q, 0, cells - 1, out=q)

    parent = [-1]
    level = [0]
    keys = [np.zeros(d, dtype=np.int64)]
    node_of = np.zeros(len(pts), dtype=np.int64)
    for lev in range(1, depth + 1):
        k = q >> (depth - lev)
        uniq, first, inv = np.unique(k, axis=0, return_index=True, return_inverse=True)
        inv = inv.reshape(-1)
        base = len(parent)
        parent.extend(node_of[first].tolist())
        level.extend([lev] * len(uniq))
        keys.extend(uniq)
        node_of = base + inv

    parent = np.asarray(parent, dtype=np.int64)
    level = np.asarray(level, dtype=np.int64)
    keys = np.asarray(keys, dtype=np.float64)
    cell = side / (2.0 ** level)
    centers = origin + (keys + 0.5) * cell[:, None]
    child = np.arange(1, len(parent))
    if weighting == "centers":
        w = np.linalg.norm(centers[child] - centers[parent[child]], axis=1)
    else:
        w = cell[child].copy()
    tree = validate_tree(
        np.column_stack([parent[child], child, w]).astype(np.float64), len(parent)
    )

    n_a = cloud_a.n
    leaf_a, leaf_b = node_of[:n_a].copy(), node_of[n_a:].copy()
    masses = []
    for leaf, cloud in ((leaf_a, cloud_a), (leaf_b, cloud_b)):
        m = np.zeros(len(parent), dtype=cloud.masses.dtype)
        np.add.at(m, leaf, cloud.masses)
        masses.append(m)
    build = QuadtreeBuild(
        tree=tree,
        leaf_of_a=leaf_a,
        leaf_of_b=leaf_b,
        depth=depth,
        translation=offset,
        origin=origin,
        side=side,
        centers=centers,
        half_width=cell / 2,
        level=level,
        parent=parent,
        weighting=weighting,
        spread=_spread(pts),
    )
    return build, masses[0], masses[1]


def _relative_error(s: float, t: np.ndarray, e: np.ndarray) -> float:
    return float(np.mean(np.abs(s * t - e) / e))


def _check_training(euclid) -> np.ndarray:
    e = np.asarray(euclid, dtype=np.float64)
    if e.size == 0:
        raise EmptyTrainingSet("no training pairs")
    bad = np.flatnonzero(~(e > 0))
    if bad.size:
        raise ZeroEuclideanDistance(f"Euclidean distance of pair {int(bad[0])} is {e[bad[0]]}")
    return e


def _ternary(objective, lo: float, hi: float, iters: int) -> float:
    u, v = math.log(lo), math.log(hi)
    for _ in range(iters):
        m1 = u + (v - u) / 3
        m2 = v - (v - u) / 3
        if objective(math.exp(m1)) <= objective(math.exp(m2)):
            v = m2
        else:
            u = m1
    return math.exp((u + v) / 2)


def fit_scale_ternary(tree_distances, euclid_distances, lo: float = 1e-6, hi: float = 1e6, iters: int = 200) -> float:
    """Scale ``s`` minimising the mean relative error of ``s * tree`` against ``euclid``.

    Ternary search over ``log s`` in ``[lo, hi]``. The objective here is
    convex in ``s``, so the search finds its minimum; see
    :func:`fit_metric_scale_ternary` for scaling the metric itself.

    Examples
    --------
    >>> round(fit_scale_ternary([2.0, 4.0], [1.0, 2.0]), 6)
    0.5
    """
    e = _check_training(euclid_distances)
    t = np.asarray(tree_distances, dtype=np.float64)
    if t.shape != e.shape:
        raise DimensionMismatch(f"{t.size} tree values but {e.size} Euclidean values")
    return _ternary(lambda s: _relative_error(s, t, e), lo, hi, iters)


def fit_metric_scale_ternary(
    instances, euclid_distances, lo: float = 1e-6, hi: float = 1e6, iters: int = 100
) -> float:
    """Scale ``s`` of the tree metric minimising the mean relative GKR error.

    Unlike :func:`fit_scale_ternary` the costs stay fixed while the edge
    lengths are multiplied by ``s``, so the distances are recomputed for
    every candidate. The objective need not be unimodal and the result is
    a heuristic optimum.

    Parameters
    ----------
    instances : sequence of (Tree, a, b, CostParams)
    euclid_distances : sequence of float
        Reference values, all positive.
    """
    from .gkr import gkr_distance

    e = _check_training(euclid_distances)
    if len(instances) != e.size:
        raise DimensionMismatch(f"{len(instances)} instances but {e.size} Euclidean values")

    def objective(s):
        t = np.empty(e.size)
        for i, (tree, a, b, costs) in enumerate(instances):
            scaled = Tree(tree.n, tree.u, tree.v, tree.w * s)
            t[i] = gkr_distance(scaled, a, b, costs, mode="float").distance
        return _relative_error(1.0, t, e)

    return _ternary(objective, lo, hi, iters)


def scale_heuristic(build: QuadtreeBuild, K: int | None = 100, seed: int | None = 0) -> float:
    """Mean ratio of Euclidean to tree distance over random leaf pairs.

    Euclidean distances are taken between leaf cell centers. Pairs with
    zero tree distance are redrawn. ``K=None`` averages over every pair of
    distinct leaves instead of sampling.
    """
    leaves = build.leaves
    if len(leaves) < 2:
        raise TooFewLeaves(f"need at least two leaves, the build has {len(leaves)}")
    if K is not None and K < 1:
        raise ValueError("K must be at least 1")

    def ratio(x, y):
        t = build.leaf_distance(int(x), int(y))
        if t <= 0:
            return None
        return float(np.linalg.norm(build.centers[x] - build.centers[y])) / t

    vals = []
    if K is None:
        for i in range(len(leaves)):
            for j in range(i + 1, len(leaves)):
                r = ratio(leaves[i], leaves[j])
                if r is not None:
                    vals.append(r)
        if not vals:
            raise TooFewLeaves("every leaf pair is at tree distance zero")
        return float(np.mean(vals))
    rng = np.random.default_rng(seed)
    tries = 0
    while len(vals) < K:
        x, y = rng.choice(leaves, size=2, replace=False)
        r = ratio(x, y)
        tries += 1
        if r is None:
            if tries > 100 * K:
                raise TooFewLeaves("could not find leaf pairs at positive tree distance")
            continue
        vals.append(r)
    return float(np.mean(vals))
