"""Unit tests for loci, weights, measures, and the identity checks."""

from fractions import Fraction

import pytest

from tropws import chipfire, weierstrass as ws
from tropws.errors import NotMeasurable
from tropws.graph_core import ClosedSubset, Divisor, MetricGraph, Point

from fixtures_graphs import (
    barbell_graph,
    complete_graph,
    dipole_graph,
    generalized_barbell,
    tent_graph,
)


def test_complete_graph_locus_is_the_vertices():
    G = complete_graph(4)
    wl = ws.locus(G.canonical_divisor())
    assert wl.total() == 8
    assert len(wl.components) == 4
    for c in wl.components:
        assert c.weight == 2
        assert len(c.region.vertices) == 1 and not c.region.intervals


def test_barbell_locus_components():
    G = barbell_graph()
    wl = ws.locus(G.canonical_divisor())
    assert wl.total() == 3
    assert sorted(c.weight for c in wl.components) == [1, 1, 1]
    assert wl.contains(G.point("l1", Fraction(1, 2)))
    assert wl.contains(G.point("l2", Fraction(1, 2)))
    assert wl.contains(G.point("br", Fraction(1, 2)))
    assert wl.contains(Point.at_vertex("u"))
    assert not wl.contains(G.point("l1", Fraction(1, 3)))


def test_dipole_locus_intervals():
    g = 3
    G = dipole_graph(g + 1)
    wl = ws.locus(G.canonical_divisor())
    assert wl.total() == g * g - 1
    assert len(wl.components) == g + 1
    for c in wl.components:
        assert c.weight == g - 1
        assert not c.region.vertices
        (iv,) = [iv for ivs in c.region.intervals.values() for iv in ivs]
        assert iv == (Fraction(1, g), Fraction(g - 1, g))


def test_locus_metadata():
    G = complete_graph(4)
    K = G.canonical_divisor()
    wl = ws.locus(K)
    assert (wl.degree, wl.rank, wl.genus) == (4, 2, 3)
    assert not wl.is_whole_graph()


def test_membership_predicate():
    G = tent_graph()
    K = G.canonical_divisor()
    r = chipfire.rank(K)
    assert ws.is_weierstrass(K, Point.at_vertex("A"), r)
    assert ws.is_weierstrass(K, G.point("a1", Fraction(2, 3)), r)
    assert not ws.is_weierstrass(K, Point.at_vertex("C"), r)


def test_weight_of_explicit_subsets():
    G = barbell_graph()
    K = G.canonical_divisor()
    mid = ClosedSubset(
        G, [], {"l1": [(Fraction(1, 2), Fraction(1, 2))]}
    )
    assert ws.weight(K, mid) == 1
    bridge = ClosedSubset(G, ["u", "v"], {"br": [(Fraction(0), Fraction(1))]})
    assert ws.weight(K, bridge) == 1


def test_measure_and_not_measurable():
    G = barbell_graph()
    K = G.canonical_divisor()
    wl = ws.locus(K)
    whole = ClosedSubset.whole(G)
    assert ws.measure(K, whole, wloc=wl) == 3
    left = ClosedSubset(
        G,
        ["u"],
        {"l1": [(Fraction(0), Fraction(1))], "br": [(Fraction(0), Fraction(1, 4))]},
    )
    # the loop midpoint is inside, the bridge component straddles
    with pytest.raises(NotMeasurable):
        ws.measure(K, left, wloc=wl)
    loop_only = ClosedSubset(G, [], {"l1": [(Fraction(1, 4), Fraction(3, 4))]})
    assert ws.measure(K, loop_only, wloc=wl) == 1


def test_verify_identities_report():
    G = complete_graph(4)
    report = ws.verify_identities(G.canonical_divisor())
    assert report.all_ok()
    assert report.total_ok and report.positivity_ok and report.measure_ok
    assert report.forest_ok is True


def test_complement_is_forest():
    G = complete_graph(4)
    wl = ws.locus(G.canonical_divisor())
    assert ws.complement_is_forest(G, wl)


def test_b_parameter_values():
    # generic interior points of K5 keep three chips away from the base
    # point, so min_x K_x(x) = 10 - 3 = 7; on K6 the analogue gives 14
    assert ws.b_parameter(complete_graph(5).canonical_divisor()) == 7
    assert ws.b_parameter(complete_graph(6).canonical_divisor()) == 14


def test_b_modified_locus_total():
    for n in (5, 6):
        G = complete_graph(n)
        K = G.canonical_divisor()
        assert ws.locus(K).is_whole_graph()
        b = ws.b_parameter(K)
        wl = ws.b_modified_locus(K)
        assert wl.total() == K.degree() - b + b * G.genus()
        assert b > chipfire.rank(K)


def test_generalized_barbell_whole_graph():
    G, D = generalized_barbell(3)
    wl = ws.locus(D)
    assert wl.is_whole_graph()
    b = ws.b_parameter(D)
    assert ws.b_modified_locus(D).total() == D.degree() - b + b * G.genus()


def test_locus_respects_scaling():
    G = barbell_graph()
    H = G.scaled(Fraction(5, 3))
    wl = ws.locus(H.canonical_divisor())
    assert wl.total() == 3
    assert wl.contains(H.point("l1", Fraction(5, 6)))
