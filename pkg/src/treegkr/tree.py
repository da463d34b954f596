"""Weighted trees, measures and creation/destruction costs.

Nodes are identified by ``0..n-1``. Numbers are kept exact whenever the
caller passes integers: weights, masses and costs are stored as numpy
arrays of dtype ``int64`` when they fit, ``object`` (Python ints, with
``math.inf`` for an infinite cost) otherwise, and ``float64`` in float mode.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from numbers import Integral, Real
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import (
    BadNodeId,
    CycleDetected,
    DimensionMismatch,
    Disconnected,
    DuplicateEdge,
    NegativeWeight,
)

INF = math.inf


def _is_int_like(x) -> bool:
    return isinstance(x, Integral) or (isinstance(x, float) and x.is_integer())


def as_values(values, allow_inf: bool = False, name: str = "values") -> np.ndarray:
    """Normalise a sequence of non-negative numbers.

    Integer input stays exact: ``int64`` when every entry fits, otherwise an
    ``object`` array of Python ints (``math.inf`` allowed when *allow_inf*).
    Anything non-integral becomes ``float64``.
    """
    if isinstance(values, np.ndarray):
        arr = values
    else:
        arr = np.empty(len(values), dtype=object)
        arr[:] = list(values)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.dtype.kind in "iu":
        if arr.size and arr.min() < 0:
            raise ValueError(f"{name} must be non-negative")
        return arr.astype(np.int64, copy=False)
    if arr.dtype.kind == "b":
        return arr.astype(np.int64)
    if arr.dtype.kind == "f":
        if np.isnan(arr).any():
            raise ValueError(f"{name} contains NaN")
        if arr.size and arr.min() < 0:
            raise ValueError(f"{name} must be non-negative")
        if not allow_inf and np.isinf(arr).any():
            raise ValueError(f"{name} must be finite")
        return arr.astype(np.float64, copy=False)
    # object: mixed ints / inf / Fractions / floats
    out = arr.tolist()
    for x in out:
        if not isinstance(x, Real) or x != x:
            raise ValueError(f"{name} contains a non-numeric entry {x!r}")
        if x < 0:
            raise ValueError(f"{name} must be non-negative")
        if x == INF and not allow_inf:
            raise ValueError(f"{name} must be finite")
    finite = [x for x in out if x != INF]
    if any(isinstance(x, float) and not x.is_integer() for x in finite):
        return np.asarray([float(x) for x in out], dtype=np.float64)
    if all(_is_int_like(x) for x in finite):
        finite = [int(x) for x in finite]
        if len(finite) == len(out) and all(-(2**63) <= x < 2**63 for x in finite):
            return np.asarray(finite, dtype=np.int64)
        out = [x if x == INF else int(x) for x in out]
    obj = np.empty(len(out), dtype=object)
    obj[:] = out
    return obj


def to_exact_list(arr: np.ndarray) -> list:
    """Python-number list with ints kept as ints and infinities as ``math.inf``."""
    if arr.dtype == np.float64:
        return [float(x) for x in arr.tolist()]
    return arr.tolist()


def is_integral(arr: np.ndarray) -> bool:
    if arr.dtype.kind in "iu":
        return True
    if arr.dtype.kind == "f":
        finite = arr[np.isfinite(arr)]
        return bool(np.all(finite == np.floor(finite)))
    return all(x == INF or isinstance(x, Integral) for x in arr.tolist())


@dataclass(frozen=True, eq=False)
class RootedTree:
    """Parent pointers and traversal orders of a tree hung from ``root``."""

    root: int
    parent: np.ndarray
    parent_weight: np.ndarray
    order: np.ndarray  # BFS order, root first
    child_ptr: np.ndarray
    child_idx: np.ndarray

    def children(self, v: int) -> np.ndarray:
        return self.child_idx[self.child_ptr[v] : self.child_ptr[v + 1]]

    @cached_property
    def hops(self) -> np.ndarray:
        hops = np.zeros(len(self.parent), dtype=np.int64)
        for v in self.order[1:].tolist():
            hops[v] = hops[self.parent[v]] + 1
        return hops

    @cached_property
    def depth(self) -> list:
        """Weighted distance from the root, exact."""
        w = to_exact_list(self.parent_weight)
        par = self.parent.tolist()
        depth = [0] * len(par)
        for v in self.order[1:].tolist():
            depth[v] = depth[par[v]] + w[v]
        return depth


@dataclass(frozen=True, eq=False)
class Tree:
    """A weighted tree on nodes ``0..n-1``; build it with :func:`validate_tree`."""

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    _rooted: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def edges(self) -> list[tuple[int, int, object]]:
        return list(zip(self.u.tolist(), self.v.tolist(), self.w.tolist()))

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
            and self.w.tolist() == other.w.tolist()
        )

    __hash__ = None

    @cached_property
    def adjacency(self) -> list[list[tuple[int, object]]]:
        adj = [[] for _ in range(self.n)]
        for a, b, w in self.edges:
            adj[a].append((b, w))
            adj[b].append((a, w))
        return adj

    def rooted(self, root: int = 0) -> RootedTree:
        if not 0 <= root < self.n:
            raise BadNodeId(root, self.n)
        cached = self._rooted.get(root)
        if cached is not None:
            return cached
        n = self.n
        if n == 1:
            wdt = np.int64 if self.w.dtype == object else self.w.dtype
            rt = RootedTree(
                root,
                np.array([-1], dtype=np.int64),
                np.zeros(1, dtype=wdt),
                np.array([0], dtype=np.int64),
                np.zeros(2, dtype=np.int64),
                np.zeros(0, dtype=np.int64),
            )
            self._rooted[root] = rt
            return rt
        graph = coo_matrix(
            (np.ones(2 * len(self.u)), (np.concatenate([self.u, self.v]), np.concatenate([self.v, self.u]))),
            shape=(n, n),
        ).tocsr()
        order, pred = breadth_first_order(graph, root, directed=False, return_predecessors=True)
        order = order.astype(np.int64)
        parent = pred.astype(np.int64)
        parent[root] = -1
        if self.w.dtype == object:
            pw = np.empty(n, dtype=object)
            pw[:] = 0
        else:
            pw = np.zeros(n, dtype=self.w.dtype)
        down = parent[self.v] == self.u
        pw[self.v[down]] = self.w[down]
        pw[self.u[~down]] = self.w[~down]
        nonroot = order[1:]
        # children in BFS order, grouped by parent
        par_of = parent[nonroot]
        sort = np.argsort(par_of, kind="stable")
        child_idx = nonroot[sort]
        counts = np.bincount(par_of, minlength=n)
        child_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=child_ptr[1:])
        rt = RootedTree(root, parent, pw, order, child_ptr, child_idx)
        self._rooted[root] = rt
        return rt


def _find_cycle_edge(n: int, edges) -> tuple | None:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        ra, rb = find(e[0]), find(e[1])
        if ra == rb:
            return e
        parent[ra] = rb
    return None


def validate_tree(edges, n: int | None = None) -> Tree:
    """Check that *edges* form a tree on ``n`` nodes and return it.

    *edges* is a sequence of ``(u, v, w)`` triples or an ``(m, 3)`` array.
    Raises :class:`BadNodeId`, :class:`NegativeWeight`,
    :class:`DuplicateEdge`, :class:`CycleDetected` or :class:`Disconnected`,
    each naming the offending element.
    """
    if isinstance(edges, np.ndarray) and edges.ndim == 2:
        u = edges[:, 0].astype(np.int64)
        v = edges[:, 1].astype(np.int64)
        w_raw = edges[:, 2]
        edge_list = None
    else:
        edge_list = [tuple(e) for e in edges]
        for e in edge_list:
            if len(e) != 3:
                raise ValueError(f"edge {e} is not a (u, v, w) triple")
            for node in e[:2]:
                if not isinstance(node, Integral):
                    raise BadNodeId(node, n)
        u = np.fromiter((e[0] for e in edge_list), dtype=np.int64, count=len(edge_list))
        v = np.fromiter((e[1] for e in edge_list), dtype=np.int64, count=len(edge_list))
        w_raw = [e[2] for e in edge_list]
    if n is None:
        n = int(max(u.max(initial=-1), v.max(initial=-1))) + 1 if len(u) else 1
    if n < 1:
        raise ValueError("a tree needs at least one node")
    m = len(u)

    def edge_at(i):
        if edge_list is not None:
            return edge_list[i]
        return (int(u[i]), int(v[i]), w_raw[i])

    bad = np.flatnonzero((u < 0) | (u >= n) | (v < 0) | (v >= n))
    if bad.size:
        i = int(bad[0])
        node = int(u[i]) if not 0 <= u[i] < n else int(v[i])
        raise BadNodeId(node, n)
    for i in range(m) if not isinstance(w_raw, np.ndarray) else ():
        x = w_raw[i]
        if not isinstance(x, Real) or x != x or x < 0 or x == INF:
            raise NegativeWeight(edge_at(i))
    if isinstance(w_raw, np.ndarray):
        wf = w_raw.astype(np.float64)
        bad = np.flatnonzero(~np.isfinite(wf) | (wf < 0))
        if bad.size:
            raise NegativeWeight(edge_at(int(bad[0])))
    w = as_values(w_raw, name="edge weights")
    self_loops = np.flatnonzero(u == v)
    if self_loops.size:
        raise CycleDetected(edge_at(int(self_loops[0])))
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    key = lo * n + hi
    order = np.argsort(key, kind="stable")
    dup = np.flatnonzero(key[order][1:] == key[order][:-1])
    if dup.size:
        raise DuplicateEdge(edge_at(int(order[dup[0] + 1])))
    if m > n - 1:
        cyc = _find_cycle_edge(n, [edge_at(i) for i in range(m)])
        raise CycleDetected(cyc)
    if m < n - 1:
        # fewer edges than a spanning tree: either a cycle or a gap, name it
        cyc = _find_cycle_edge(n, [edge_at(i) for i in range(m)])
        if cyc is not None:
            raise CycleDetected(cyc)
    if n > 1:
        graph = coo_matrix((np.ones(m), (u, v)), shape=(n, n))
        ncomp, labels = connected_components(graph, directed=False)
        if ncomp > 1:
            cyc = _find_cycle_edge(n, [edge_at(i) for i in range(m)])
            if cyc is not None:
                raise CycleDetected(cyc)
            node = int(np.flatnonzero(labels != labels[0])[0])
            raise Disconnected(node)
    return Tree(n, u, v, w)


@dataclass(frozen=True, eq=False)
class CostParams:
    """Per-node destruction and creation costs, each in ``[0, inf]``."""

    lambda_d: np.ndarray
    lambda_c: np.ndarray

    def __post_init__(self):
        ld = as_values(self.lambda_d, allow_inf=True, name="lambda_d")
        lc = as_values(self.lambda_c, allow_inf=True, name="lambda_c")
        if len(ld) != len(lc):
            raise DimensionMismatch(f"lambda_d has {len(ld)} entries, lambda_c has {len(lc)}")
        object.__setattr__(self, "lambda_d", ld)
        object.__setattr__(self, "lambda_c", lc)

    def __len__(self):
        return len(self.lambda_d)

    def __eq__(self, other):
        if not isinstance(other, CostParams):
            return NotImplemented
        return (
            self.lambda_d.tolist() == other.lambda_d.tolist()
            and self.lambda_c.tolist() == other.lambda_c.tolist()
        )

    __hash__ = None

    @classmethod
    def constant(cls, n: int, lam) -> "CostParams":
        vals = [lam] * n
        return cls(vals, vals)


def as_measure(mass, n: int | None = None, name: str = "measure") -> np.ndarray:
    arr = as_values(mass, name=name)
    if n is not None and len(arr) != n:
        raise DimensionMismatch(f"{name} has {len(arr)} entries, expected {n}")
    return arr


def tree_distance(tree: Tree, u: int, v: int):
    """Length of the unique path between ``u`` and ``v``."""
    for x in (u, v):
        if not isinstance(x, Integral) or not 0 <= x < tree.n:
            raise BadNodeId(x, tree.n)
    rt = tree.rooted(0)
    hops, depth, par = rt.hops, rt.depth, rt.parent
    a, b = int(u), int(v)
    while hops[a] > hops[b]:
        a = int(par[a])
    while hops[b] > hops[a]:
        b = int(par[b])
    while a != b:
        a, b = int(par[a]), int(par[b])
    return depth[u] + depth[v] - 2 * depth[a]


def distances_from(tree: Tree, source: int) -> list:
    """Exact distances from *source* to every node (one BFS)."""
    if not 0 <= source < tree.n:
        raise BadNodeId(source, tree.n)
    dist = [None] * tree.n
    dist[source] = 0
    adj = tree.adjacency
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y, w in adj[x]:
            if dist[y] is None:
                dist[y] = dist[x] + w
                queue.append(y)
    return dist


def distance_matrix(tree: Tree) -> list[list]:
    return [distances_from(tree, s) for s in range(tree.n)]


@dataclass(frozen=True)
class Condition2Report:
    satisfied: bool
    witness: tuple[int, int] | None = None
    violated: str | None = None  # "destroy" or "create"

    def __str__(self):
        if self.satisfied:
            return "condition2: satisfied"
        x, y = self.witness
        return f"condition2: violated ({self.violated} cost, pair {x} {y})"


def check_condition2(tree: Tree, costs: CostParams) -> Condition2Report:
    """Pairwise check of ``ld(x) <= d(x,y) + ld(y)`` and ``lc(y) <= lc(x) + d(x,y)``.

    Quadratic in ``n``; meant for validation, not for the solver's hot path.
    """
    if len(costs) != tree.n:
        raise DimensionMismatch(f"costs have {len(costs)} entries, tree has {tree.n} nodes")
    ld = to_exact_list(costs.lambda_d)
    lc = to_exact_list(costs.lambda_c)
    for x in range(tree.n):
        dist = distances_from(tree, x)
        for y in range(tree.n):
            if ld[x] > dist[y] + ld[y]:
                return Condition2Report(False, (x, y), "destroy")
            if lc[y] > lc[x] + dist[y]:
                return Condition2Report(False, (x, y), "create")
    return Condition2Report(True)


@dataclass(frozen=True, eq=False)
class PreprocessedTree:
    """Binary rooted tree whose mass and finite costs sit only on leaves."""

    tree: Tree
    root: int
    origin: dict[int, int]
    a: np.ndarray
    b: np.ndarray
    costs: CostParams

    def leaf_of(self, node: int) -> int:
        for leaf, orig in self.origin.items():
            if orig == node:
                return leaf
        raise KeyError(node)


def preprocess(tree: Tree, a, b, costs: CostParams, root: int = 0) -> PreprocessedTree:
    """Rewrite an instance so that it is binary with leaf-only mass.

    Every internal node hands its mass and costs to a fresh leaf hung from it
    by a zero-weight edge and keeps infinite costs itself; nodes with more
    than two children get their surplus children regrouped under zero-weight
    dummy nodes. The distance of the instance is unchanged.
    """
    n = tree.n
    a = as_measure(a, n, "a")
    b = as_measure(b, n, "b")
    if len(costs) != n:
        raise DimensionMismatch(f"costs have {len(costs)} entries, tree has {n} nodes")
    rt = tree.rooted(root)
    zero = 0 if tree.w.dtype != np.float64 else 0.0
    children = [rt.children(v).tolist() for v in range(n)]
    weights = to_exact_list(rt.parent_weight)
    a_l, b_l = to_exact_list(a), to_exact_list(b)
    ld, lc = to_exact_list(costs.lambda_d), to_exact_list(costs.lambda_c)

    edges: list[tuple[int, int, object]] = []
    na, nb, nld, nlc = list(a_l), list(b_l), list(ld), list(lc)
    origin: dict[int, int] = {}
    next_id = n

    def new_node(mass_a=0, mass_b=0, lam_d=INF, lam_c=INF):
        nonlocal next_id
        na.append(mass_a)
        nb.append(mass_b)
        nld.append(lam_d)
        nlc.append(lam_c)
        next_id += 1
        return next_id - 1

    for v in rt.order.tolist():
        kids = [(c, weights[c]) for c in children[v]]
        if not kids:
            origin[v] = v
            continue
        leaf = new_node(a_l[v], b_l[v], ld[v], lc[v])
        origin[leaf] = v
        na[v] = nb[v] = zero
        nld[v] = nlc[v] = INF
        kids.append((leaf, zero))
        # regroup: keep one child at v, hang the rest under a zero-weight chain
        host = v
        while len(kids) > 2:
            first = kids.pop(0)
            edges.append((host, first[0], first[1]))
            dummy = new_node()
            edges.append((host, dummy, zero))
            host = dummy
        for c, w in kids:
            edges.append((host, c, w))
    new_tree = validate_tree(edges, next_id)
    return PreprocessedTree(
        tree=new_tree,
        root=root,
        origin=origin,
        a=as_measure(na),
        b=as_measure(nb),
        costs=CostParams(nld, nlc),
    )
