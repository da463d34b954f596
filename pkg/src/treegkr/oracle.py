"""Reference solvers: min-cost flow on the graph augmented with a sink node.

Creation and destruction are modelled by a virtual node ``omega`` joined
to every point: an arc ``x -> omega`` costs ``lambda_d(x)`` per unit and
``omega -> x`` costs ``lambda_c(x)``. Infinite costs simply drop the arc.
The flow problem is solved by successive shortest paths with node
potentials, which is exact for integer data and plenty fast at the sizes
an oracle is used for.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from numbers import Integral

import numpy as np

from .errors import DimensionMismatch, TooLarge
from .tree import CostParams, Tree, as_measure, as_values, to_exact_list

INF = math.inf


@dataclass
class FlowNetwork:
    """Arcs ``(tail, head, capacity, unit cost)`` and signed node supplies.

    The last node is the virtual node when the network was built by
    :func:`build_augmented_network`.
    """

    n_nodes: int
    arcs: list[tuple[int, int, object, object]]
    supply: list

    @property
    def omega(self) -> int:
        return self.n_nodes - 1


@dataclass
class FlowResult:
    cost: object
    flow: list  # per arc, same order as the network's arcs
    potential: list
    routed: object


def _edge_list(graph):
    if isinstance(graph, Tree):
        return graph.n, graph.edges
    n, edges = graph
    return n, [tuple(e) for e in edges]


def build_augmented_network(graph, a, b, costs: CostParams) -> FlowNetwork:
    """Flow network whose min cost equals the GKR distance.

    *graph* is a :class:`Tree` or a pair ``(n, [(u, v, w), ...])`` for an
    arbitrary undirected graph. Each undirected edge becomes two arcs with
    capacity equal to the total mass.
    """
    n, edges = _edge_list(graph)
    a = to_exact_list(as_measure(a, n, "a"))
    b = to_exact_list(as_measure(b, n, "b"))
    if len(costs) != n:
        raise DimensionMismatch(f"costs have {len(costs)} entries, graph has {n} nodes")
    ld = to_exact_list(costs.lambda_d)
    lc = to_exact_list(costs.lambda_c)
    cap = sum(a) + sum(b)
    omega = n
    arcs = []
    for u, v, w in edges:
        arcs.append((u, v, cap, w))
        arcs.append((v, u, cap, w))
    for x in range(n):
        if ld[x] != INF:
            arcs.append((x, omega, cap, ld[x]))
        if lc[x] != INF:
            arcs.append((omega, x, cap, lc[x]))
    supply = [a[x] - b[x] for x in range(n)]
    supply.append(sum(b) - sum(a))
    return FlowNetwork(n + 1, arcs, supply)


class _Residual:
    """Adjacency-array residual graph."""

    def __init__(self, n):
        self.n = n
        self.head: list[int] = []
        self.cap: list = []
        self.cost: list = []
        self.out: list[list[int]] = [[] for _ in range(n)]

    def add(self, u, v, cap, cost) -> int:
        e = len(self.head)
        self.head += [v, u]
        self.cap += [cap, 0]
        self.cost += [cost, -cost]
        self.out[u].append(e)
        self.out[v].append(e + 1)
        return e


def _successive_shortest_paths(g: _Residual, s: int, t: int, amount, zero):
    """Push up to *amount* units from ``s`` to ``t`` along cheapest paths.

    Returns ``(routed, cost, potential)``. Costs must be non-negative on the initial
    arcs; negative arcs trigger one Bellman-Ford pass.
    """
    n = g.n
    head, cap, cost, out = g.head, g.cap, g.cost, g.out
    pot = [zero] * n
    if any(c < 0 for e, c in enumerate(cost) if e % 2 == 0 and cap[e] > 0):
        dist = [INF] * n
        dist[s] = zero
        for _ in range(n - 1):
            changed = False
            for u in range(n):
                if dist[u] == INF:
                    continue
                for e in out[u]:
                    if cap[e] > 0 and dist[u] + cost[e] < dist[head[e]]:
                        dist[head[e]] = dist[u] + cost[e]
                        changed = True
            if not changed:
                break
        pot = [d if d != INF else zero for d in dist]
    routed = zero
    total = zero
    while routed < amount:
        dist = [INF] * n
        prev = [-1] * n
        done = [False] * n
        dist[s] = zero
        heap = [(zero, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            if u == t:
                break
            pu = pot[u]
            for e in out[u]:
                if cap[e] <= 0:
                    continue
                v = head[e]
                if done[v]:
                    continue
                rc = cost[e] + pu - pot[v]
                if rc < 0:
                    rc = zero  # float round-off only
                nd = d + rc
                if nd < dist[v]:
                    dist[v] = nd
                    prev[v] = e
                    heapq.heappush(heap, (nd, v))
        if not done[t]:
            break
        dt = dist[t]
        for v in range(n):
            pot[v] += dist[v] if done[v] else dt
        push = amount - routed
        v = t
        while v != s:
            e = prev[v]
            if cap[e] < push:
                push = cap[e]
            v = head[e ^ 1]
        v = t
        while v != s:
            e = prev[v]
            cap[e] -= push
            cap[e ^ 1] += push
            total += push * cost[e]
            v = head[e ^ 1]
        routed += push
    return routed, total, pot


def min_cost_flow(network: FlowNetwork) -> FlowResult:
    """Minimum-cost flow meeting every supply exactly, or ``cost=inf``."""
    n = network.n_nodes
    g = _Residual(n + 2)
    s, t = n, n + 1
    exact = all(isinstance(c, Integral) for *_, c in network.arcs) and all(
        isinstance(x, Integral) for x in network.supply
    )
    zero = 0 if exact else 0.0
    arc_ids = [g.add(u, v, c, w) for u, v, c, w in network.arcs]
    need = zero
    for x, sup in enumerate(network.supply):
        if sup > 0:
            g.add(s, x, sup, zero)
            need += sup
        elif sup < 0:
            g.add(x, t, -sup, zero)
    routed, cost, pot = _successive_shortest_paths(g, s, t, need, zero)
    flow = [g.cap[e ^ 1] for e in arc_ids]
    if exact:
        ok = routed == need
    else:
        ok = math.isclose(routed, need, rel_tol=1e-9, abs_tol=1e-9)
    return FlowResult(cost if ok else INF, flow, pot[:n], routed)


def mcmf_gkr(network: FlowNetwork):
    """GKR distance of an augmented network; ``math.inf`` when infeasible."""
    return min_cost_flow(network).cost


def gkr_oracle(graph, a, b, costs: CostParams):
    """Convenience wrapper: build the augmented network and solve it."""
    return mcmf_gkr(build_augmented_network(graph, a, b, costs))


def reduced_cost_certificate(network: FlowNetwork, result: FlowResult, tol=0) -> bool:
    """True when no residual arc has negative reduced cost."""
    pot = result.potential
    for (u, v, cap, w), f in zip(network.arcs, result.flow):
        if f < cap and w + pot[u] - pot[v] < -tol:
            return False
        if f > 0 and -w + pot[v] - pot[u] < -tol:
            return False
    return True


def partial_transport_oracle(graph, a, b, kappa):
    """Cheapest transport of exactly ``kappa`` mass (no creation/destruction).

    Returns ``math.inf`` when ``kappa`` exceeds what can be moved.
    """
    n, edges = _edge_list(graph)
    a = to_exact_list(as_measure(a, n, "a"))
    b = to_exact_list(as_measure(b, n, "b"))
    exact = isinstance(kappa, Integral) and all(isinstance(x, Integral) for x in a + b) and all(
        isinstance(e[2], Integral) for e in edges
    )
    zero = 0 if exact else 0.0
    g = _Residual(n + 2)
    s, t = n, n + 1
    cap = sum(a) + sum(b)
    for u, v, w in edges:
        g.add(u, v, cap, w)
        g.add(v, u, cap, w)
    for x in range(n):
        if a[x] > 0:
            g.add(s, x, a[x], zero)
        if b[x] > 0:
            g.add(x, t, b[x], zero)
    routed, cost, _ = _successive_shortest_paths(g, s, t, kappa, zero)
    if routed < kappa and not (not exact and math.isclose(routed, kappa, rel_tol=1e-9)):
        return INF
    return cost


def _pairwise(pa: np.ndarray, pb: np.ndarray, p: float) -> np.ndarray:
    diff = pa[:, None, :] - pb[None, :, :]
    if p == 2:
        return np.sqrt((diff**2).sum(-1))
    if p == INF:
        return np.abs(diff).max(-1)
    return (np.abs(diff) ** p).sum(-1) ** (1.0 / p)


def euclidean_gkr_exact(
    points_a,
    mass_a,
    points_b,
    mass_b,
    lam,
    p: float = 2,
    max_points: int = 500,
    lam_b=None,
):
    """Exact GKR between two weighted point clouds under the ``L_p`` metric.

    Parameters
    ----------
    points_a, points_b : array_like, shape (n, d)
    mass_a, mass_b : array_like
    lam : float or array_like
        Creation/destruction cost. A scalar applies to every point; an
        array gives one value per point of cloud A (and *lam_b* for cloud
        B, defaulting to *lam*).
    p : float
        Norm exponent of the ground metric.
    max_points : int
        Refuse larger clouds (:class:`TooLarge`); the solver is quadratic.

    Returns
    -------
    float
        ``math.inf`` if the instance is infeasible.
    """
    pa = np.atleast_2d(np.asarray(points_a, dtype=np.float64))
    pb = np.atleast_2d(np.asarray(points_b, dtype=np.float64))
    if len(pa) > max_points or len(pb) > max_points:
        raise TooLarge(f"clouds have {len(pa)} and {len(pb)} points, limit {max_points}")
    if pa.shape[1] != pb.shape[1]:
        raise DimensionMismatch("point clouds have different dimensions")
    ma = [float(x) for x in as_values(mass_a, name="mass_a")]
    mb = [float(x) for x in as_values(mass_b, name="mass_b")]
    na, nb = len(pa), len(pb)
    if len(ma) != na or len(mb) != nb:
        raise DimensionMismatch("masses do not match point counts")
    scalar = np.ndim(lam) == 0 and lam_b is None
    lam_a = np.broadcast_to(np.asarray(lam, dtype=np.float64), (na,))
    lam_bb = np.broadcast_to(np.asarray(lam if lam_b is None else lam_b, dtype=np.float64), (nb,))
    dist = _pairwise(pa, pb, p)
    omega = na + nb
    cap = sum(ma) + sum(mb)
    arcs = []
    for i in range(na):
        for j in range(nb):
            arcs.append((i, na + j, cap, float(dist[i, j])))
    lam_all = np.concatenate([lam_a, lam_bb])
    for x in range(na + nb):
        if lam_all[x] != INF:
            arcs.append((x, omega, cap, float(lam_all[x])))
            arcs.append((omega, x, cap, float(lam_all[x])))
    if not scalar:
        # per-point costs: mass may detour through other points
        daa = _pairwise(pa, pa, p)
        dbb = _pairwise(pb, pb, p)
        dba = dist.T
        for i in range(na):
            for k in range(na):
                if i != k:
                    arcs.append((i, k, cap, float(daa[i, k])))
        for j in range(nb):
            for k in range(nb):
                if j != k:
                    arcs.append((na + j, na + k, cap, float(dbb[j, k])))
            for i in range(na):
                arcs.append((na + j, i, cap, float(dba[j, i])))
    supply = ma + [-x for x in mb] + [sum(mb) - sum(ma)]
    return mcmf_gkr(FlowNetwork(na + nb + 1, arcs, supply))
