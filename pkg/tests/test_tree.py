import heapq
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _gen import random_edges, random_lambda
from treegkr.errors import BadNodeId, CycleDetected, Disconnected, DuplicateEdge, NegativeWeight
from treegkr.gkr import boundary_params, gkr_distance
from treegkr.oracle import gkr_oracle
from treegkr.tree import (
    CostParams,
    check_condition2,
    distance_matrix,
    distances_from,
    preprocess,
    tree_distance,
    validate_tree,
)

INF = math.inf


def test_valid_pair():
    t = validate_tree([(0, 1, 5)], 2)
    assert t.n == 2 and t.edges == [(0, 1, 5)]


def test_cycle_detected():
    with pytest.raises(CycleDetected) as e:
        validate_tree([(0, 1, 1), (1, 2, 1), (2, 0, 1)], 3)
    assert e.value.edge == (2, 0, 1)


def test_disconnected():
    with pytest.raises(Disconnected) as e:
        validate_tree([(0, 1, 1)], 3)
    assert e.value.node == 2


def test_negative_weight():
    with pytest.raises(NegativeWeight) as e:
        validate_tree([(0, 1, -1)], 2)
    assert e.value.edge == (0, 1, -1)


def test_bad_node_id():
    with pytest.raises(BadNodeId):
        validate_tree([(0, 5, 1)], 2)


def test_duplicate_edge():
    with pytest.raises(DuplicateEdge):
        validate_tree([(0, 1, 1), (1, 0, 2)], 3)


def test_array_input_and_single_node():
    t = validate_tree(np.array([[0, 1, 2], [1, 2, 3]]), 3)
    assert tree_distance(t, 0, 2) == 5
    assert validate_tree([], 1).n == 1


def test_path_distance():
    t = validate_tree([(0, 1, 1), (1, 2, 1)], 3)
    assert tree_distance(t, 0, 2) == 2
    assert tree_distance(t, 1, 1) == 0
    with pytest.raises(BadNodeId):
        tree_distance(t, 0, 3)


def _dijkstra(n, edges, s):
    adj = [[] for _ in range(n)]
    for u, v, w in edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    dist = [INF] * n
    dist[s] = 0
    heap = [(0, s)]
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist[x]:
            continue
        for y, w in adj[x]:
            if d + w < dist[y]:
                dist[y] = d + w
                heapq.heappush(heap, (d + w, y))
    return dist


def test_distance_matches_dijkstra():
    rng = random.Random(7)
    for _ in range(30):
        n = rng.randint(1, 40)
        edges = random_edges(n, rng)
        t = validate_tree(edges, n)
        for s in range(0, n, 5):
            assert distances_from(t, s) == _dijkstra(n, edges, s)
            assert [tree_distance(t, s, y) for y in range(n)] == _dijkstra(n, edges, s)


def test_metric_axioms():
    rng = random.Random(8)
    t = validate_tree(random_edges(25, rng), 25)
    D = distance_matrix(t)
    for x in range(25):
        assert D[x][x] == 0
        for y in range(25):
            assert D[x][y] == D[y][x]
            for z in range(0, 25, 3):
                assert D[x][z] <= D[x][y] + D[y][z]


def test_condition2_constant():
    t = validate_tree([(0, 1, 1), (1, 2, 4)], 3)
    rep = check_condition2(t, CostParams.constant(3, 5))
    assert rep.satisfied and str(rep) == "condition2: satisfied"


def test_condition2_violation_witness():
    t = validate_tree([(0, 1, 1)], 2)
    rep = check_condition2(t, CostParams([10, 1], [0, 0]))
    assert not rep.satisfied
    assert rep.witness == (0, 1) and rep.violated == "destroy"


def test_condition2_distance_to_node():
    rng = random.Random(9)
    for _ in range(20):
        n = rng.randint(1, 20)
        t = validate_tree(random_edges(n, rng), n)
        r = rng.randrange(n)
        d = distances_from(t, r)
        assert check_condition2(t, CostParams(d, d)).satisfied


def _check_preprocessed(tree, a, b, costs, root):
    p = preprocess(tree, a, b, costs, root)
    rt = p.tree.rooted(p.root)
    n2 = p.tree.n
    assert n2 <= 3 * tree.n
    leaves = set()
    for v in range(n2):
        kids = rt.children(v).tolist()
        if kids:
            assert len(kids) == 2
            assert p.a[v] == 0 and p.b[v] == 0
            assert p.costs.lambda_d[v] == INF and p.costs.lambda_c[v] == INF
        else:
            leaves.add(v)
    assert set(p.origin) == leaves
    assert sorted(p.origin.values()) == list(range(tree.n))
    for leaf, x in p.origin.items():
        assert tree_distance(p.tree, leaf, x) == 0
        assert p.a[leaf] == a[x] and p.b[leaf] == b[x]
    want = gkr_oracle(tree, a, b, costs)
    assert gkr_oracle(p.tree, p.a, p.b, p.costs) == want
    assert gkr_distance(p.tree, p.a, p.b, p.costs).distance == want
    return p


def test_preprocess_pair():
    t = validate_tree([(0, 1, 4)], 2)
    p = _check_preprocessed(t, [3, 1], [0, 2], CostParams.constant(2, 1), 0)
    leaf = p.leaf_of(0)
    assert leaf != 0 and p.a[leaf] == 3


def test_preprocess_star():
    t = validate_tree([(0, 1, 1), (0, 2, 2), (0, 3, 3)], 4)
    p = _check_preprocessed(t, [0, 1, 2, 0], [0, 0, 1, 2], CostParams.constant(4, 2), 0)
    # edges from a host down to an introduced node (dummy or leaf copy)
    new_edges = [e for e in p.tree.edges if e[1] >= 4]
    assert len(new_edges) == 3
    assert all(w == 0 for _, _, w in new_edges)


def test_preprocess_single_node():
    t = validate_tree([], 1)
    p = preprocess(t, [2], [1], CostParams.constant(1, 3))
    assert p.tree.n == 1 and p.origin == {0: 0}


def test_preprocess_random():
    rng = random.Random(10)
    for _ in range(40):
        n = rng.randint(1, 32)
        t = validate_tree(random_edges(n, rng), n)
        a = [rng.randint(0, 5) for _ in range(n)]
        b = [rng.randint(0, 5) for _ in range(n)]
        _check_preprocessed(t, a, b, random_lambda(n, rng, t), rng.randrange(n))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 10**6))
def test_boundary_params_pass_condition2(n, seed):
    rng = random.Random(seed)
    t = validate_tree(random_edges(n, rng), n)
    anchors = rng.sample(range(n), rng.randint(1, n))
    c = boundary_params(t, anchors)
    assert check_condition2(t, c).satisfied
    for s in anchors:
        assert c.lambda_d[s] == 0
