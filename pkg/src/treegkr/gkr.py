"""Exact GKR distance on a tree by leaf-to-root convex dynamic programming.

For every node ``v`` the solver keeps ``t_v(x)``: the optimal cost inside
the subtree of ``v`` when ``x`` extra units of supply (``x < 0``: demand)
sit at ``v``. A node starts from its own balancing cost, each child is
extended over its edge (``|x| * w`` is added) and min-sum convolved into
the parent. The distance is ``t_root(0)``.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral

import numpy as np

from .errors import BadKappa, DimensionMismatch, EmptyAnchorSet, Infeasible, UnbalancedMeasures
from .pwl import CREATE, DESTROY, INF, ConvexPLF, MergeStats
from .tree import (
    CostParams,
    Tree,
    as_measure,
    is_integral,
    to_exact_list,
    tree_distance,
    validate_tree,
)

ENGINES = ("auto", "python", "numba")


@dataclass
class GkrResult:
    """Distance plus solver counters.

    ``distance`` is ``math.inf`` when no sub-coupling has finite cost.
    """

    distance: object
    stats: dict = field(default_factory=dict)

    @property
    def infeasible(self) -> bool:
        return self.distance == INF

    def __float__(self):
        return float(self.distance)


@dataclass
class Coupling:
    flows: list[tuple[int, int, object]]
    destroyed: list[tuple[int, object]]
    created: list[tuple[int, object]]

    def objective(self, tree: Tree, costs: CostParams):
        ld = to_exact_list(costs.lambda_d)
        lc = to_exact_list(costs.lambda_c)
        total = 0
        for x, y, m in self.flows:
            total += m * tree_distance(tree, x, y)
        for x, m in self.destroyed:
            total += m * ld[x]
        for y, m in self.created:
            total += m * lc[y]
        return total

    def marginals(self, n: int):
        """Return ``(row sums + destroyed, column sums + created)``."""
        rows = [0] * n
        cols = [0] * n
        for x, y, m in self.flows:
            rows[x] += m
            cols[y] += m
        for x, m in self.destroyed:
            rows[x] += m
        for y, m in self.created:
            cols[y] += m
        return rows, cols


@dataclass(frozen=True)
class _Instance:
    """Validated numpy inputs; ``weights[v]`` is the edge weight to the parent."""

    tree: Tree
    a: np.ndarray
    b: np.ndarray
    ld: np.ndarray
    lc: np.ndarray
    weights: np.ndarray
    mode: str


def _resolve_mode(tree, a, b, costs, mode):
    if mode is None:
        exact = all(is_integral(x) for x in (tree.w, a, b, costs.lambda_d, costs.lambda_c))
        return "int" if exact else "float"
    if mode not in ("int", "float"):
        raise ValueError(f"mode must be 'int' or 'float', got {mode!r}")
    if mode == "int":
        for name, arr in (("weights", tree.w), ("a", a), ("b", b), ("lambda_d", costs.lambda_d), ("lambda_c", costs.lambda_c)):
            if not is_integral(arr):
                raise ValueError(f"integer mode needs integral {name}")
    return mode


def _convert(arr: np.ndarray, mode: str) -> list:
    values = to_exact_list(arr)
    if mode == "int":
        if arr.dtype == np.int64:
            return values
        return [x if x == INF else int(x) for x in values]
    return [float(x) for x in values]


def _prepare(tree, a, b, costs, root, mode) -> tuple[_Instance, object]:
    if not isinstance(tree, Tree):
        raise TypeError("tree must be a Tree; build one with validate_tree()")
    n = tree.n
    a = as_measure(a, n, "a")
    b = as_measure(b, n, "b")
    if len(costs) != n:
        raise DimensionMismatch(f"costs have {len(costs)} entries, tree has {n} nodes")
    mode = _resolve_mode(tree, a, b, costs, mode)
    rt = tree.rooted(root)
    inst = _Instance(tree, a, b, costs.lambda_d, costs.lambda_c, rt.parent_weight, mode)
    return inst, rt


def _run_dp(inst: _Instance, rt, tagged: bool):
    n = inst.tree.n
    stats = MergeStats()
    order = rt.order.tolist()
    ptr = rt.child_ptr.tolist()
    kids = rt.child_idx.tolist()
    size = [1] * n
    funcs: list = [None] * n
    max_segments = 0
    worst_ratio = 0.0
    violations = 0
    a, b, ld, lc, w = (_convert(x, inst.mode) for x in (inst.a, inst.b, inst.ld, inst.lc, inst.weights))
    for v in reversed(order):
        f = ConvexPLF.leaf(a[v], b[v], lc[v], ld[v], origin=v if tagged else -1, stats=stats)
        for i in range(ptr[v], ptr[v + 1]):
            c = kids[i]
            g = funcs[c]
            funcs[c] = None
            g.extend(w[c])
            size[v] += size[c]
            cnt = len(g)
            if cnt > 3 * size[c]:
                violations += 1
            worst_ratio = max(worst_ratio, cnt / (3 * size[c]))
            max_segments = max(max_segments, cnt)
            f = f.convolve(g)
        cnt = len(f)
        if cnt > 3 * size[v]:
            violations += 1
        worst_ratio = max(worst_ratio, cnt / (3 * size[v]))
        max_segments = max(max_segments, cnt)
        funcs[v] = f
    info = {
        "segments_created": stats.created,
        "segments_moved": stats.moved,
        "merges": stats.merges,
        "max_segments": max_segments,
        "max_segment_ratio": worst_ratio,
        "segment_bound_violations": violations,
    }
    return funcs[rt.root], info, (a, b)


def gkr_distance(
    tree: Tree,
    a,
    b,
    costs: CostParams,
    *,
    root: int = 0,
    mode: str | None = None,
    engine: str = "auto",
) -> GkrResult:
    """Generalized Kantorovich-Rubinstein distance on a tree metric.

    Parameters
    ----------
    tree : Tree
    a, b : array_like
        Source and target masses per node.
    costs : CostParams
        Destruction (``lambda_d``) and creation (``lambda_c``) cost per node.
    root : int
        Node the dynamic programme is rooted at; the value does not depend
        on it.
    mode : {'int', 'float'}, optional
        Exact integer arithmetic or doubles. Inferred from the inputs.
    engine : {'auto', 'python', 'numba'}
        ``'numba'`` runs the compiled kernel (int64 or float64). ``'auto'``
        picks it whenever int64 cannot overflow and falls back to exact
        Python otherwise.

    Returns
    -------
    GkrResult
        ``distance`` is an ``int`` in integer mode and ``math.inf`` for an
        infeasible instance.
    """
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    start = time.perf_counter()
    inst, rt = _prepare(tree, a, b, costs, root, mode)
    if engine != "python":
        from . import _fast

        if _fast.available() and _fast.fits(inst, rt):
            dist, info = _fast.solve(inst, rt)
            info.update(engine="numba", mode=inst.mode, seconds=time.perf_counter() - start)
            return GkrResult(dist, info)
        if engine == "numba":
            raise ValueError("instance exceeds the int64 range of the compiled engine")
    f, info, _ = _run_dp(inst, rt, tagged=False)
    dist = f.value_at(0)
    info.update(engine="python", mode=inst.mode, seconds=time.perf_counter() - start)
    return GkrResult(dist, info)


def _root_amounts(f: ConvexPLF, n: int):
    """Created and destroyed mass per node, read off the root function.

    A destroy piece contributes the part of it lying left of ``x = 0``; a
    create piece the part lying at or right of 0. Pieces behind an infinite
    one sit at that infinity.
    """
    created = [0] * n
    destroyed = [0] * n
    pieces = f.tagged_segments()
    split = sum(1 for piece in pieces if piece[4])
    # walk outward from b on both sides
    pos = f.b
    for slope, length, origin, kind, _ in reversed(pieces[:split]):
        if pos == -INF:
            lo, hi = -INF, -INF
        else:
            lo, hi = pos - length, pos
        _credit(created, destroyed, origin, kind, lo, hi, length)
        pos = lo
    pos = f.b
    for slope, length, origin, kind, _ in pieces[split:]:
        if pos == INF:
            lo, hi = INF, INF
        else:
            lo, hi = pos, pos + length
        _credit(created, destroyed, origin, kind, lo, hi, length)
        pos = hi
    return created, destroyed


def _credit(created, destroyed, origin, kind, lo, hi, length):
    if kind == DESTROY:
        if hi == -INF:
            amount = length
        elif lo >= 0:
            amount = 0
        else:
            amount = min(hi, 0) - lo
        if amount:
            destroyed[origin] += amount
    elif kind == CREATE:
        if lo == INF:
            amount = length
        elif hi <= 0:
            amount = 0
        else:
            amount = hi - max(lo, 0)
        if amount:
            created[origin] += amount


def _match_on_tree(rt, sources: list, sinks: list, n: int):
    """Greedy leaf-to-root matching of balanced supply and demand.

    ``sources[v]`` and ``sinks[v]`` are lists of ``(kind, mass)`` items at
    node ``v``. Surplus left in a subtree is handed to the parent and at each
    node pending sources are matched against pending sinks; on a tree every
    such greedy matching has the minimum transport cost. Returns
    ``(source node, source kind, sink node, sink kind, mass)`` tuples.
    """
    pairs = []
    pending: list = [None] * n
    order = rt.order.tolist()
    ptr = rt.child_ptr.tolist()
    kids = rt.child_idx.tolist()
    for v in reversed(order):
        src = [[v, k, m] for k, m in sources[v] if m]
        dst = [[v, k, m] for k, m in sinks[v] if m]
        for i in range(ptr[v], ptr[v + 1]):
            c = kids[i]
            child = pending[c]
            pending[c] = None
            if child is None:
                continue
            side, items = child
            if side > 0:
                if len(items) > len(src):
                    src, items = items, src
                src.extend(items)
            else:
                if len(items) > len(dst):
                    dst, items = items, dst
                dst.extend(items)
        while src and dst:
            s, d = src[-1], dst[-1]
            m = s[2] if s[2] < d[2] else d[2]
            pairs.append((s[0], s[1], d[0], d[1], m))
            s[2] -= m
            d[2] -= m
            if not s[2]:
                src.pop()
            if not d[2]:
                dst.pop()
        if src:
            pending[v] = (1, src)
        elif dst:
            pending[v] = (-1, dst)
    return pairs


def gkr_coupling(
    tree: Tree,
    a,
    b,
    costs: CostParams,
    *,
    root: int = 0,
    mode: str | None = None,
) -> tuple[GkrResult, Coupling]:
    """Distance together with an optimal sub-coupling.

    Every piece of the root function remembers the node it started from;
    the pieces on the destroy side of ``x = 0`` give how much mass is
    destroyed at each node and symmetrically for created mass. One greedy
    tree matching then routes source mass to targets or destruction sites
    and created mass to targets.

    Mass is reported as destroyed at the node it leaves from. When the
    costs satisfy :func:`~treegkr.tree.check_condition2` the plan's
    objective under *costs* equals the distance; otherwise it does under
    :func:`effective_costs` (moving mass to a cheaper site first).

    Raises
    ------
    Infeasible
        If the distance is infinite.
    """
    start = time.perf_counter()
    inst, rt = _prepare(tree, a, b, costs, root, mode)
    n = tree.n
    f, info, (a_l, b_l) = _run_dp(inst, rt, tagged=True)
    dist = f.value_at(0)
    if dist == INF:
        raise Infeasible("no sub-coupling with finite cost exists")
    created, destroyed = _root_amounts(f, n)
    if inst.mode == "float":
        tol = 1e-12 * (1.0 + sum(a_l) + sum(b_l))
        created = [0.0 if abs(x) <= tol else x for x in created]
        destroyed = [0.0 if abs(x) <= tol else x for x in destroyed]
    sources = [[(0, a_l[v]), (1, created[v])] for v in range(n)]
    sinks = [[(0, b_l[v]), (1, destroyed[v])] for v in range(n)]
    flows, gone, made = [], [0] * n, [0] * n
    for x, sk, y, dk, m in _match_on_tree(rt, sources, sinks, n):
        if inst.mode == "float" and m <= 1e-12 * (1.0 + abs(m)):
            continue
        if sk == 0 and dk == 0:
            flows.append((x, y, m))
        elif sk == 0:
            gone[x] += m
        elif dk == 0:
            made[y] += m
        # created mass routed straight to a destruction site cancels out
    coupling = Coupling(
        flows=flows,
        destroyed=[(x, m) for x, m in enumerate(gone) if m],
        created=[(y, m) for y, m in enumerate(made) if m],
    )
    info.update(engine="python", mode=inst.mode, seconds=time.perf_counter() - start)
    return GkrResult(dist, info), coupling


def effective_costs(tree: Tree, costs: CostParams) -> CostParams:
    """Cheapest way to destroy (create) a unit at each node, moving it first.

    ``lambda_d'(x) = min_y d(x, y) + lambda_d(y)`` and likewise for
    ``lambda_c``. The distance is unchanged and the result always passes
    :func:`~treegkr.tree.check_condition2`.
    """
    if len(costs) != tree.n:
        raise DimensionMismatch(f"costs have {len(costs)} entries, tree has {tree.n} nodes")
    adj = tree.adjacency

    def closure(lam):
        dist = list(lam)
        heap = [(d, x) for x, d in enumerate(dist) if d != INF]
        heapq.heapify(heap)
        while heap:
            d, x = heapq.heappop(heap)
            if d > dist[x]:
                continue
            for y, w in adj[x]:
                if d + w < dist[y]:
                    dist[y] = d + w
                    heapq.heappush(heap, (d + w, y))
        return dist

    return CostParams(closure(to_exact_list(costs.lambda_d)), closure(to_exact_list(costs.lambda_c)))


def tree_wasserstein(tree: Tree, a, b, *, root: int = 0):
    """Balanced optimal transport on a tree: ``sum_e w_e |net mass below e|``."""
    n = tree.n
    a = as_measure(a, n, "a")
    b = as_measure(b, n, "b")
    al, bl = to_exact_list(a), to_exact_list(b)
    ta, tb = sum(al), sum(bl)
    exact = all(isinstance(x, Integral) for x in al + bl)
    if (ta != tb) if exact else not math.isclose(ta, tb, rel_tol=1e-12, abs_tol=1e-12):
        raise UnbalancedMeasures(f"total masses differ: {ta} vs {tb}")
    rt = tree.rooted(root)
    w = to_exact_list(rt.parent_weight)
    par = rt.parent.tolist()
    net = [x - y for x, y in zip(al, bl)]
    total = 0
    for v in reversed(rt.order.tolist()[1:]):
        total += w[v] * abs(net[v])
        net[par[v]] += net[v]
    return total


def kr_params(n: int, lam) -> CostParams:
    """Constant creation and destruction cost ``lam`` (Kantorovich-Rubinstein)."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    return CostParams.constant(n, lam)


def boundary_params(tree: Tree, anchors) -> CostParams:
    """Costs equal to the tree distance to the nearest anchor node."""
    anchors = sorted(set(int(s) for s in anchors))
    if not anchors:
        raise EmptyAnchorSet("anchor set must not be empty")
    for s in anchors:
        if not 0 <= s < tree.n:
            from .errors import BadNodeId

            raise BadNodeId(s, tree.n)
    dist: list = [None] * tree.n
    heap = [(0, s) for s in anchors]
    adj = tree.adjacency
    while heap:
        d, x = heapq.heappop(heap)
        if dist[x] is not None:
            continue
        dist[x] = d
        for y, w in adj[x]:
            if dist[y] is None:
                heapq.heappush(heap, (d + w, y))
    return CostParams(dist, dist)


@dataclass
class PartialTransportResult:
    """Optimal partial transport value and how it was recovered.

    ``attained`` is true when the chosen Lagrange multiplier moves exactly
    ``kappa``; otherwise ``mass_bracket`` holds transported masses at
    multipliers on both sides of it.
    """

    value: object
    lam: object
    attained: bool
    transported: object
    mass_bracket: tuple


def _transported(tree, a, b, lam, mode):
    res, plan = gkr_coupling(tree, a, b, kr_params(tree.n, lam), mode=mode)
    return res.distance, sum(m for _, _, m in plan.flows)


def optimal_partial_transport(tree: Tree, a, b, kappa, *, mode: str | None = None) -> PartialTransportResult:
    """Cheapest way to transport exactly ``kappa`` mass from ``a`` to ``b``.

    Solved through its Lagrangian: with constant cost ``lam`` for creating
    and destroying mass, ``KR(lam) - lam * (|a| + |b| - 2 kappa)`` is concave
    in ``lam`` and its maximum is the partial transport cost. In integer mode
    the search runs over half-integer ``lam`` (the only places the
    transported mass can change) and is exact; in float mode 64 bisection
    steps on the transported mass are used.
    """
    n = tree.n
    a_arr = as_measure(a, n, "a")
    b_arr = as_measure(b, n, "b")
    al, bl = to_exact_list(a_arr), to_exact_list(b_arr)
    total_a, total_b = sum(al), sum(bl)
    if not 0 <= kappa <= min(total_a, total_b):
        raise BadKappa(f"kappa={kappa} outside [0, {min(total_a, total_b)}]")
    costs0 = kr_params(n, 0)
    if mode is None:
        mode = "int" if all(is_integral(x) for x in (tree.w, a_arr, b_arr)) and isinstance(kappa, Integral) else "float"
    if kappa == 0:
        return PartialTransportResult(0, 0, True, 0, (0, 0))
    excess = total_a + total_b - 2 * kappa
    weight_sum = sum(to_exact_list(tree.w))

    if mode == "int":
        doubled = validate_tree([(u, v, 2 * w) for u, v, w in tree.edges], n)

        def phi(k):
            # twice the Lagrangian at lam = k / 2
            return gkr_distance(doubled, al, bl, kr_params(n, k), mode="int").distance - k * excess

        lo, hi = 0, 2 * weight_sum + 2
        # smallest k with phi(k + 1) <= phi(k); phi is concave
        while lo < hi:
            mid = (lo + hi) // 2
            if phi(mid + 1) > phi(mid):
                lo = mid + 1
            else:
                hi = mid
        k = lo
        value = Fraction(phi(k), 2)
        value = int(value) if value.denominator == 1 else value
        lam = Fraction(k, 2)
        _, moved = _transported(doubled, al, bl, k, "int")
        # the transported mass is unique strictly between breakpoints, so
        # sample it a quarter step either side of lam = k / 2
        quad = validate_tree([(u, v, 4 * w) for u, v, w in tree.edges], n)
        below = _transported(quad, al, bl, 2 * k - 1, "int")[1] if k > 0 else 0
        above = _transported(quad, al, bl, 2 * k + 1, "int")[1]
        return PartialTransportResult(value, lam, moved == kappa, moved, (below, above))

    lo, hi = 0.0, float(weight_sum) + 1.0
    af, bf = [float(x) for x in al], [float(x) for x in bl]
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        _, moved = _transported(tree, af, bf, mid, "float")
        if moved < kappa:
            lo = mid
        else:
            hi = mid
    kr_lo, moved_lo = _transported(tree, af, bf, lo, "float")
    kr_hi, moved_hi = _transported(tree, af, bf, hi, "float")
    value = max(kr_lo - lo * excess, kr_hi - hi * excess)
    attained = math.isclose(moved_hi, kappa, rel_tol=1e-9, abs_tol=1e-9)
    return PartialTransportResult(value, hi, attained, moved_hi, (moved_lo, moved_hi))
