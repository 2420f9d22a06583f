"""Unit tests for slope structures and their Weierstrass divisors."""

from fractions import Fraction

import pytest

from tropws import clls, weierstrass as ws
from tropws.errors import (
    BreakpointMismatch,
    InvalidStructure,
    PairingViolation,
    SlopeCountMismatch,
)
from tropws.graph_core import Divisor, Point

from fixtures_graphs import (
    barbell_clls,
    dipole_clls,
    dipole_graph,
    three_cycle_clls,
)


def test_barbell_weierstrass_divisor():
    G, S, D = barbell_clls()
    W, prof = clls.clls_divisor(S, D)
    expected = Divisor(
        G,
        {
            Point.at_vertex("u1"): 1,
            Point.at_vertex("u2"): 1,
            Point.at_vertex("v1"): 2,
            Point.at_vertex("v2"): 2,
        },
    )
    assert W.divisor == expected
    assert W.degree() == 6
    assert W.is_effective()


def test_barbell_passes_both_obstructions():
    G, S, D = barbell_clls()
    report = clls.realizability_obstructions(S, D)
    assert report.effective and report.principal
    assert report.realizable_candidate()
    assert report.obstructions() == []


def test_barbell_divisor_refines_the_locus_weights():
    # restricted degrees of the slope-structure divisor are (r+1) times the
    # locus weights of the underlying complete series
    G, S, D = barbell_clls()
    W, _ = clls.clls_divisor(S, D)
    wl = ws.locus(D)
    assert W.degree() == (S.rank + 1) * wl.total()


def test_dipole_parametrized_divisors():
    for ts in (
        (Fraction(1, 6), Fraction(0), Fraction(1, 12), Fraction(1, 8)),
        (Fraction(0),) * 4,
        (Fraction(1, 7), Fraction(1, 9), Fraction(1, 11), Fraction(1, 13)),
    ):
        G, S, D = dipole_clls(ts)
        W, _ = clls.clls_divisor(S, D)
        expected = {}
        for i, t in enumerate(ts):
            for pos in (Fraction(1, 2) - t, Fraction(1, 2) + t):
                p = G.point(f"e{i}", pos)
                expected[p] = expected.get(p, 0) + 3
        assert W.divisor == Divisor(G, expected)
        assert W.degree() == 24
        assert clls.is_g_effective(S, D)


def test_three_cycle_negative_weight_at_center():
    G, S, D = three_cycle_clls()
    W, _ = clls.clls_divisor(S, D)
    assert W.weight(Point.at_vertex("c")) == -3
    positives = {p: c for p, c in W.divisor.coeffs.items() if c > 0}
    assert len(positives) == 9
    assert all(c == 3 for c in positives.values())
    report = clls.realizability_obstructions(S, D)
    assert not report.effective
    assert report.principal
    assert report.obstructions() == ["weierstrass divisor is not effective"]


def test_ramification_sequences():
    G, S, D = barbell_clls()
    _, prof = clls.clls_divisor(S, D)
    # alpha_j = s_j - s_0 - j; the bridge slopes (-1, 1) give (0, 1)
    u1 = Point.at_vertex("u1")
    assert (0, 1) in prof.sequences[u1]
    assert prof.total_at(u1) >= 0


def test_slopes_at_interior_point():
    G, S, _ = barbell_clls()
    # both outgoing directions; the reverse direction is negated-and-reversed
    vecs = S.slopes_at(G.point("br", Fraction(1, 2)))
    assert len(vecs) == 2
    assert sorted(vecs) == [(-1, 1), (-1, 1)]


def test_wrong_slope_count_rejected():
    G, _, _ = barbell_clls()
    with pytest.raises(SlopeCountMismatch):
        clls.SlopeStructure(
            G,
            1,
            {
                "br": [(Fraction(2), (-1, 0, 1))],
                "c1a": [(Fraction(1), (0, 1))],
                "c1b": [(Fraction(1), (0, 1))],
                "c2a": [(Fraction(1), (0, 1))],
                "c2b": [(Fraction(1), (0, 1))],
            },
        )


def test_non_increasing_slopes_rejected():
    G = dipole_graph(2)
    with pytest.raises(InvalidStructure):
        clls.SlopeStructure(
            G,
            1,
            {
                "e0": [(Fraction(1), (1, 1))],
                "e1": [(Fraction(1), (0, 1))],
            },
        )


def test_breakpoints_must_cover_the_edge():
    G = dipole_graph(2)
    with pytest.raises(BreakpointMismatch):
        clls.SlopeStructure(
            G,
            0,
            {
                "e0": [(Fraction(1, 2), (0,))],
                "e1": [(Fraction(1), (0,))],
            },
        )


def test_pairing_check_rejects_inconsistent_reverse_data():
    G, S, _ = barbell_clls()
    bad = {"br": [(Fraction(2), (0, 2))]}
    with pytest.raises(PairingViolation):
        S.check_pairing(bad)


def test_missing_edge_rejected():
    G = dipole_graph(2)
    with pytest.raises(InvalidStructure):
        clls.SlopeStructure(G, 0, {"e0": [(Fraction(1), (0,))]})


def test_degree_formula():
    # deg W = (r+1)(d - r + r g) comes out of the pairing automatically
    G, S, D = dipole_clls((Fraction(1, 10),) * 4)
    W, _ = clls.clls_divisor(S, D)
    r, d, g = S.rank, D.degree(), G.genus()
    assert W.degree() == (r + 1) * (d - r + r * g)
