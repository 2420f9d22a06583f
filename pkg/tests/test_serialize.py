"""Round-trip tests for the JSON encodings: parse(emit(x)) == x, bit-exact."""

import json
from fractions import Fraction

from tropws import serialize, weierstrass as ws
from tropws.graph_core import ClosedSubset, Divisor, Point
from tropws.rationals import format_rational, parse_rational

from fixtures_graphs import barbell_clls, barbell_graph, tent_graph


def _through_json(obj):
    return json.loads(json.dumps(obj))


def test_rational_round_trip():
    for q in (Fraction(3), Fraction(-7, 3), Fraction(0), Fraction(10**12, 7)):
        assert parse_rational(format_rational(q)) == q
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(Fraction(-1, 3)) == "-1/3"


def test_graph_round_trip():
    G = barbell_graph()
    H = serialize.graph_from_dict(_through_json(serialize.graph_to_dict(G)))
    assert list(H.vertex_ids) == list(G.vertex_ids)
    assert set(H.edges) == set(G.edges)
    for eid in G.edges:
        assert H.edges[eid].length == G.edges[eid].length
        assert H.edges[eid].ends == G.edges[eid].ends
    assert H.genus_map == G.genus_map


def test_point_round_trip():
    G = barbell_graph()
    for p in (Point.at_vertex("u"), G.point("br", Fraction(2, 7))):
        q = serialize.point_from_dict(G, _through_json(serialize.point_to_dict(p)))
        assert q == p


def test_divisor_round_trip():
    G = tent_graph()
    D = Divisor(
        G,
        {
            Point.at_vertex("A"): 2,
            G.point("a1", Fraction(1, 3)): -1,
            G.point("base", Fraction(5, 7)): 4,
        },
    )
    E = serialize.divisor_from_list(G, _through_json(serialize.divisor_to_list(D)))
    assert E == D


def test_subset_round_trip():
    G = barbell_graph()
    A = ClosedSubset(
        G,
        ["v"],
        {"l1": [(Fraction(1, 4), Fraction(3, 4))], "br": [(Fraction(0), Fraction(1, 2))]},
    )
    B = serialize.subset_from_dict(G, _through_json(serialize.subset_to_dict(A)))
    assert B == A


def test_slope_structure_round_trip():
    G, S, _D = barbell_clls()
    T = serialize.slopes_from_dict(G, _through_json(serialize.slopes_to_dict(S)))
    assert T.rank == S.rank
    assert T.segments == S.segments


def test_slopes_with_both_orientations_validated():
    G, S, _D = barbell_clls()
    data = serialize.slopes_to_dict(S)
    # add the explicit reverse orientation of the bridge: must still load
    data["edges"].append(
        {
            "edge": "br",
            "from_vertex": "u2",
            "segments": [{"upto": "2", "slopes": [-1, 1]}],
        }
    )
    T = serialize.slopes_from_dict(G, data)
    assert T.segments["br"] == S.segments["br"]


def test_locus_round_trip():
    G = barbell_graph()
    wl = ws.locus(G.canonical_divisor())
    back = serialize.locus_from_dict(G, _through_json(serialize.locus_to_dict(wl)))
    assert back.total() == wl.total()
    assert (back.degree, back.rank, back.genus) == (wl.degree, wl.rank, wl.genus)
    assert [c.region for c in back.components] == [c.region for c in wl.components]
    assert [c.weight for c in back.components] == [c.weight for c in wl.components]
