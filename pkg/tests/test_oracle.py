"""Unit tests for the combinatorial engine and the random-graph scan."""

import random
from fractions import Fraction

import pytest

from tropws import chipfire, oracle, weierstrass as ws
from tropws.errors import DegenerateFamily, SubdivisionLimitExceeded
from tropws.graph_core import Divisor, MetricGraph, Point

from fixtures_graphs import (
    complete_graph,
    dipole_graph,
    three_hexagon_comb,
    three_hexagon_weight_one_edges,
)


def _comb_k4():
    return oracle.CombGraph(
        list(range(4)),
        [(i, j) for i in range(4) for j in range(i + 1, 4)],
    )


def test_discrete_reduce_concentrates_canonical():
    G = _comb_k4()
    res = oracle.discrete_reduce(G, G.canonical_divisor(), 0)
    assert res.divisor == {0: 4, 1: 0, 2: 0, 3: 0}
    assert res.fn[0] == 0


def test_discrete_reduce_is_idempotent_and_degree_preserving():
    G = _comb_k4()
    D = {0: -2, 3: 5}
    res = oracle.discrete_reduce(G, D, 1)
    assert sum(res.divisor.values()) == 3
    assert all(c >= 0 for v, c in res.divisor.items() if v != 1)
    again = oracle.discrete_reduce(G, res.divisor, 1)
    assert again.divisor == res.divisor


def test_bn_rank_values():
    G = _comb_k4()
    K = G.canonical_divisor()
    assert oracle.bn_rank(G, K) == 2
    assert oracle.bn_rank(G, {}) == 0
    assert oracle.bn_rank(G, {0: -1}) == -1
    assert oracle.bn_rank(G, {0: 1}) == 0
    assert oracle.bn_rank(G, {v: 2 for v in G.vertices}) == 8 - 3


def test_bn_rank_riemann_roch():
    G = _comb_k4()
    K = G.canonical_divisor()
    g = G.genus()
    rng = random.Random(7)
    for _ in range(20):
        D = {v: rng.randint(-1, 3) for v in G.vertices}
        KD = {v: K[v] - D.get(v, 0) for v in G.vertices}
        deg = sum(D.values())
        assert oracle.bn_rank(G, D) - oracle.bn_rank(G, KD) == deg - g + 1


def test_unit_subdivision():
    G = MetricGraph(
        [("a", 0), ("b", 0)],
        [
            ("e1", ("a", "b"), Fraction(1, 2)),
            ("e2", ("a", "b"), Fraction(3, 4)),
        ],
    )
    comb, N = oracle.unit_subdivision(G)
    assert N == 4
    assert len(comb.edges) == 2 + 3
    assert comb.genus() == G.genus()


def test_unit_subdivision_keeps_loops_legal():
    G = MetricGraph(
        [("a", 0)],
        [("l", ("a", "a"), Fraction(1))],
    )
    comb, N = oracle.unit_subdivision(G)
    assert N == 2  # a loop may not collapse to a single unit edge
    assert len(comb.edges) == 2


def test_subdivision_cap(monkeypatch):
    monkeypatch.setenv("TROPWS_MAX_SUBDIVISION", "3")
    G = dipole_graph(4)
    with pytest.raises(SubdivisionLimitExceeded):
        oracle.unit_subdivision(G)


def test_cross_engine_rank_agreement():
    G = complete_graph(4)
    comb, N = oracle.unit_subdivision(G)
    K = G.canonical_divisor()
    D = oracle.metric_divisor_to_comb(K, comb, N)
    assert oracle.bn_rank(comb, D) == chipfire.rank(K)


def test_cross_engine_reduce_agreement():
    G = complete_graph(4)
    comb, N = oracle.unit_subdivision(G)
    K = G.canonical_divisor()
    D = oracle.metric_divisor_to_comb(K, comb, N)
    discrete = oracle.discrete_reduce(comb, D, "v1").divisor
    metric = chipfire.reduce(K, Point.at_vertex("v1")).divisor
    for v in G.vertex_ids:
        assert discrete.get(v, 0) == metric[Point.at_vertex(v)]


def test_vertex_weights_match_metric_locus_on_dipole():
    G = dipole_graph(4)
    comb, _N = oracle.unit_subdivision(G)
    assert oracle.is_vertex_weierstrass_free(comb)
    r = oracle.bn_rank(comb, comb.canonical_divisor())
    K = comb.canonical_divisor()
    total = sum(
        oracle.edge_interior_weight(comb, K, r, e) for e in comb.edges
    )
    assert total == ws.locus(G.canonical_divisor()).total()


def test_three_hexagon_graph():
    G = three_hexagon_comb()
    assert len(G.vertices) == 14
    assert len(G.edges) == 16
    assert G.genus() == 3
    assert oracle.is_vertex_weierstrass_free(G)
    K = G.canonical_divisor()
    r = oracle.bn_rank(G, K)
    assert r == 2
    weights = {e: oracle.edge_interior_weight(G, K, r, e) for e in G.edges}
    ones = sorted(e for e, w in weights.items() if w == 1)
    assert ones == sorted(three_hexagon_weight_one_edges())
    assert sum(weights.values()) == G.genus() ** 2 - 1


def test_random_regular_families():
    rng = random.Random(11)
    G = oracle.random_regular(8, 3, rng)
    assert all(G.valence(v) == 3 for v in G.vertices)
    with pytest.raises(DegenerateFamily):
        oracle.random_regular(5, 3, rng)  # odd degree sum


def test_erdos_renyi_family():
    rng = random.Random(11)
    G = oracle.erdos_renyi(7, Fraction(1, 2), rng)
    assert len(G.vertices) == 7
    with pytest.raises(DegenerateFamily):
        oracle.erdos_renyi(6, Fraction(0), rng, tries=5)


def test_scan_is_deterministic_and_order_independent():
    a = oracle.scan_vertex_weierstrass(8, 8, seed=3)
    b = oracle.scan_vertex_weierstrass(8, 8, seed=3)
    assert [r.as_dict() for r in a] == [r.as_dict() for r in b]
    # each index has its own stream: a longer scan extends, not reshuffles
    c = oracle.scan_vertex_weierstrass(4, 8, seed=3)
    assert [r.as_dict() for r in c] == [r.as_dict() for r in a[:4]]
    d = oracle.scan_vertex_weierstrass(4, 8, seed=4)
    assert [r.as_dict() for r in d] != [r.as_dict() for r in c]


def test_scan_records_shape():
    (rec,) = oracle.scan_vertex_weierstrass(1, 6, seed=0)
    out = rec.as_dict()
    assert out["n"] == 6 and out["m"] == 9 and out["genus"] == 4
    assert out["wp_free"] == all(w <= 0 for w in out["vertex_weights"])
