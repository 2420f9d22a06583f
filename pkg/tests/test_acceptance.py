"""Acceptance checks: one test (and one printed pass line) per criterion.

All arithmetic assertions are exact (tolerance 0); each criterion also
checks its wall-clock budget.
"""

import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

from tropws import augmented as aug, chipfire, oracle, weierstrass as ws
from tropws.graph_core import Divisor, MetricGraph, Point

from fixtures_graphs import (
    augmented_cycle,
    barbell_graph,
    complete_graph,
    cube_graph,
    cycle_point,
    dipole_graph,
    generalized_barbell,
    tent_graph,
    three_hexagon_comb,
    three_hexagon_weight_one_edges,
    two_bridge_graph,
    two_point_cycle,
    two_point_cycle_point,
)
from fixtures_graphs import barbell_clls, dipole_clls, three_cycle_clls
from tropws import clls


class _Budget:
    def __init__(self, number: int, description: str, seconds: float):
        self.number = number
        self.description = description
        self.seconds = seconds

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.start
        if exc_type is not None:
            print(f"criterion {self.number:02d}: FAIL - {self.description}")
            return False
        assert elapsed < self.seconds, (
            f"criterion {self.number} took {elapsed:.2f}s "
            f"(budget {self.seconds}s)"
        )
        print(
            f"criterion {self.number:02d}: PASS - {self.description} "
            f"({elapsed:.2f}s)"
        )
        return False


def _component_of(wl, p):
    for c in wl.components:
        if c.region.contains(p):
            return c
    raise AssertionError(f"{p!r} not in locus")


def test_c01_complete_graph_k4():
    with _Budget(1, "K4: four weight-2 vertices, total 8", 1):
        G = complete_graph(4)
        wl = ws.locus(G.canonical_divisor())
        assert wl.total() == 8 == G.genus() ** 2 - 1
        assert len(wl.components) == 4
        for c in wl.components:
            assert c.weight == 2
            assert len(c.region.vertices) == 1 and not c.region.intervals


def test_c02_barbell():
    with _Budget(2, "barbell: two loop midpoints and the bridge, weight 1 each", 1):
        G = barbell_graph()
        wl = ws.locus(G.canonical_divisor())
        assert sorted(c.weight for c in wl.components) == [1, 1, 1]
        assert _component_of(wl, G.point("l1", Fraction(1, 2))).weight == 1
        assert _component_of(wl, G.point("l2", Fraction(1, 2))).weight == 1
        bridge = _component_of(wl, G.point("br", Fraction(1, 2)))
        assert bridge.region.intervals["br"] == ((Fraction(0), Fraction(1)),)


def test_c03_dipoles():
    with _Budget(3, "dipole genus 2..6: g+1 components [1/g,(g-1)/g] of weight g-1", 5):
        for g in range(2, 7):
            G = dipole_graph(g + 1)
            wl = ws.locus(G.canonical_divisor())
            assert wl.total() == g * g - 1
            assert len(wl.components) == g + 1
            for c in wl.components:
                assert c.weight == g - 1
                assert not c.region.vertices
                (iv,) = [
                    iv for ivs in c.region.intervals.values() for iv in ivs
                ]
                assert iv == (Fraction(1, g), Fraction(g - 1, g))


def test_c04_tent():
    with _Budget(4, "tent: K, K+(apex), K+(base corner)", 2):
        G = tent_graph()
        K = G.canonical_divisor()
        wl = ws.locus(K)
        assert sorted(c.weight for c in wl.components) == [1, 1, 1, 1, 2, 2]
        assert _component_of(wl, Point.at_vertex("A")).weight == 2
        assert _component_of(wl, Point.at_vertex("B")).weight == 2
        # the four weight-1 points sit 1/3 away from the apex C
        for eid in ("a1", "a2", "b1", "b2"):
            p = G.point(eid, Fraction(2, 3))
            assert _component_of(wl, p).weight == 1

        wl = ws.locus(K + Divisor(G, {Point.at_vertex("C"): 1}))
        assert len(wl.components) == 1 and wl.total() == 9

        wl = ws.locus(K + Divisor(G, {Point.at_vertex("A"): 1}))
        assert sorted(c.weight for c in wl.components) == [1, 1, 7]


def test_c05_cube():
    with _Budget(5, "cube: twelve [2/5,3/5] components of weight 2", 2):
        G = cube_graph()
        wl = ws.locus(G.canonical_divisor())
        assert wl.total() == 24
        assert len(wl.components) == 12
        for c in wl.components:
            assert c.weight == 2
            assert not c.region.vertices
            (iv,) = [iv for ivs in c.region.intervals.values() for iv in ivs]
            assert iv == (Fraction(2, 5), Fraction(3, 5))


def test_c06_two_bridge():
    with _Budget(6, "two-bridge graph: bridges inside the locus, total 24", 2):
        G = two_bridge_graph()
        wl = ws.locus(G.canonical_divisor())
        assert wl.total() == 24
        assert sorted(c.weight for c in wl.components) == [2] * 6 + [12]
        big = _component_of(wl, G.point("br1", Fraction(1, 2)))
        assert big.weight == 12
        assert big.region.contains(G.point("br2", Fraction(1, 2)))


def test_c07_whole_graph_cases():
    with _Budget(7, "K5, K6, generalized barbell: locus = whole graph, b-modified totals", 5):
        for n in (5, 6):
            G = complete_graph(n)
            K = G.canonical_divisor()
            assert ws.locus(K).is_whole_graph()
            b = ws.b_parameter(K)
            assert b > chipfire.rank(K)
            assert ws.b_modified_locus(K).total() == (
                K.degree() - b + b * G.genus()
            )
        G, D = generalized_barbell(3)
        assert ws.locus(D).is_whole_graph()
        b = ws.b_parameter(D)
        assert ws.b_modified_locus(D).total() == D.degree() - b + b * G.genus()


def test_c08_augmented_cycle():
    with _Budget(8, "augmented cycle a=1..4: canonical and generic weights", 2):
        for a in (1, 2, 3, 4):
            G = augmented_cycle(a)
            g = G.genus()
            wl = aug.canonical_locus(graph=G)
            assert wl.total() == g * g - 1
            assert _component_of(wl, Point.at_vertex("v")).weight == a * a + a
            for k in range(1, a + 1):
                p = cycle_point(G, Fraction(k, a + 1))
                assert _component_of(wl, p).weight == 1

            _D0, _r, wlg = aug.generic_view(G.canonical_divisor())
            assert wlg.total() == a * a + a
            assert _component_of(wlg, Point.at_vertex("v")).weight == a * a + 1
            for k in range(1, a):
                p = cycle_point(G, Fraction(k, a))
                assert _component_of(wlg, p).weight == 1


def test_c09_two_point_augmented_cycle():
    with _Budget(9, "two-point augmented cycle: exact torsion positions", 2):
        g1, g2 = 4, 3
        alpha, beta = Fraction(1), Fraction(11, 7)
        G = two_point_cycle(g1, g2, alpha, beta)
        g = g1 + g2 + 1
        wl = aug.canonical_locus(graph=G)
        assert wl.total() == g * g - 1
        assert _component_of(wl, Point.at_vertex("u")).weight == g1 * g
        assert _component_of(wl, Point.at_vertex("v")).weight == g2 * g
        singles = [c for c in wl.components if c.weight == 1]
        assert len(singles) == g1 + g2
        for i in range(1, g1 + 1):
            pos = alpha + Fraction(i, g) * beta - Fraction(g1 + 1 - i, g) * alpha
            p = two_point_cycle_point(G, pos, alpha, beta)
            assert _component_of(wl, p).weight == 1
        for j in range(1, g2 + 1):
            pos = Fraction(j, g) * alpha - Fraction(g2 + 1 - j, g) * beta
            p = two_point_cycle_point(G, pos, alpha, beta)
            assert _component_of(wl, p).weight == 1


def test_c10_augmented_dipoles():
    with _Budget(10, "augmented dipoles: unit genera h=2..4 and genera 3/5", 3):
        for h in (2, 3, 4):
            G = dipole_graph(h + 1, genus_u=1, genus_v=1)
            g = G.genus()
            wl = aug.canonical_locus(graph=G)
            assert wl.total() == g * g - 1
            for c in wl.components:
                if c.region.vertices:
                    assert len(c.region.vertices) == 1
                    assert c.weight == 2 * h + 2
                else:
                    (iv,) = [
                        iv for ivs in c.region.intervals.values() for iv in ivs
                    ]
                    assert iv == (Fraction(2, h + 2), Fraction(h, h + 2))
                    assert c.weight == h - 1

        G = dipole_graph(3, genus_u=3, genus_v=5)
        wl = aug.canonical_locus(graph=G)
        assert wl.total() == 99 == G.genus() ** 2 - 1
        assert _component_of(wl, Point.at_vertex("v")).weight == 50
        u_comp = _component_of(wl, Point.at_vertex("u"))
        assert u_comp.weight == 34
        for eid in ("e0", "e1", "e2"):
            assert u_comp.region.intervals[eid] == (
                (Fraction(0), Fraction(1, 10)),
            )
            c = _component_of(wl, G.point(eid, Fraction(7, 20)))
            assert c.weight == 2
            assert c.region.intervals[eid] == (
                (Fraction(3, 10), Fraction(4, 10)),
            )
            assert _component_of(wl, G.point(eid, Fraction(6, 10))).weight == 1
            c = _component_of(wl, G.point(eid, Fraction(17, 20)))
            assert c.weight == 2
            assert c.region.intervals[eid] == (
                (Fraction(8, 10), Fraction(9, 10)),
            )


def test_c11_slope_structure_fixtures():
    with _Budget(11, "slope structures: barbell, dipole family, three-cycle", 1):
        G, S, D = barbell_clls()
        W, _ = clls.clls_divisor(S, D)
        assert W.divisor == Divisor(
            G,
            {
                Point.at_vertex("u1"): 1,
                Point.at_vertex("u2"): 1,
                Point.at_vertex("v1"): 2,
                Point.at_vertex("v2"): 2,
            },
        )
        report = clls.realizability_obstructions(S, D)
        assert report.effective and report.principal

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

        G, S, D = three_cycle_clls()
        W, _ = clls.clls_divisor(S, D)
        assert W.weight(Point.at_vertex("c")) == -3
        assert not clls.is_g_effective(S, D)


def test_c12_property_suite():
    with _Budget(12, "property suite: >= 200 random instances per invariant", 300):
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "pytest",
                str(Path(__file__).parent / "test_properties.py"),
                "-q",
                "-p",
                "no:cacheprovider",
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr


def test_c13_reflexive_edges():
    with _Budget(13, "reflexive edges: even genus in locus(K), odd genus in locus(2K)", 5):
        # even genus: the barbell bridge is reflexive and its midpoint is
        # in the canonical locus
        G = barbell_graph()
        assert G.genus() % 2 == 0
        wl = ws.locus(G.canonical_divisor())
        assert wl.contains(G.point("br", Fraction(1, 2)))

        # odd genus: every K4 edge is reflexive; midpoints avoid locus(K)
        # but lie in locus(2K)
        G = complete_graph(4)
        assert G.genus() % 2 == 1
        K = G.canonical_divisor()
        mid = G.point("e0_1", Fraction(1, 2))
        assert not ws.locus(K).contains(mid)
        assert ws.locus(K * 2).contains(mid)


def _gap_instance(rng):
    """Random graph whose deletion of u, v leaves a tree, with the special
    edge e = uv of unit length; val(u) = a + 2, val(v) = b + 2."""
    a = rng.randint(0, 3)
    b = rng.randint(max(0, 1 - a), 3)
    n = rng.randint(1, 4)
    vs = [(f"t{i}", 0) for i in range(n)] + [("u", 0), ("v", 0)]
    es = [("e", ("u", "v"), Fraction(1))]

    def rand_len():
        return Fraction(rng.randint(1, 3), rng.randint(1, 3))

    for i in range(1, n):
        es.append((f"tr{i}", (f"t{rng.randrange(i)}", f"t{i}"), rand_len()))
    for k in range(a + 1):
        es.append((f"ua{k}", ("u", f"t{rng.randrange(n)}"), rand_len()))
    for k in range(b + 1):
        es.append((f"vb{k}", ("v", f"t{rng.randrange(n)}"), rand_len()))
    return MetricGraph(vs, es), a, b


def test_c14_edge_gap():
    with _Budget(14, "edge gap: locus avoids [b/(a+b+1),(b+1)/(a+b+1)] on e", 60):
        rng = random.Random(1405)
        for _ in range(50):
            G, a, b = _gap_instance(rng)
            g = a + b + 1
            assert G.genus() == g
            wl = ws.locus(G.canonical_divisor())
            lo, hi = Fraction(b, g), Fraction(b + 1, g)
            for c in wl.components:
                if lo == 0:
                    assert "u" not in c.region.vertices
                if hi == 1:
                    assert "v" not in c.region.vertices
                for x0, x1 in c.region.intervals.get("e", ()):
                    assert x1 < lo or x0 > hi


def test_c15_scan():
    with _Budget(15, "three-hexagon weights and a deterministic 1000-graph scan", 120):
        G = three_hexagon_comb()
        assert oracle.is_vertex_weierstrass_free(G)
        K = G.canonical_divisor()
        r = oracle.bn_rank(G, K)
        weights = {
            e: oracle.edge_interior_weight(G, K, r, e) for e in G.edges
        }
        ones = sorted(e for e, w in weights.items() if w == 1)
        assert ones == sorted(three_hexagon_weight_one_edges())
        assert all(w in (0, 1) for w in weights.values())
        assert sum(weights.values()) == G.genus() ** 2 - 1

        first = oracle.scan_vertex_weierstrass(1000, 12, seed=2024)
        second = oracle.scan_vertex_weierstrass(1000, 12, seed=2024)
        assert [x.as_dict() for x in first] == [x.as_dict() for x in second]
        assert len(first) == 1000
        assert all(rec.n == 12 for rec in first)
