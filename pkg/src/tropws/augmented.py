"""Weierstrass theory relative to semimodules on augmented metric graphs.

An augmented metric graph carries a genus function on its vertices.  Two
distinguished semimodules of rational functions refine the complete linear
series of the canonical divisor:

* the *generic* semimodule of a divisor D, consisting of functions f with
  D + div(f) >= g at every point, which coincides with the complete series
  of the shifted divisor D0 = D - g; and

* the *canonical* semimodule, consisting of functions f with
  K + div(f) >= g - 1 everywhere and K + div(f) >= g at every point that
  is not an isolated local minimum of f.

Both give rise to a Weierstrass locus with integer component weights whose
total equals d - r + r*g for the appropriate rank r and augmented genus g.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from . import chipfire
from .errors import NegativeRank
from .graph_core import ClosedSubset, Divisor, MetricGraph, Point
from .plfunction import PLFunction
from .weierstrass import Probe, WLocus, compute_locus


def _genus_divisor(graph: MetricGraph, g: Optional[Divisor]) -> Divisor:
    if g is None:
        return graph.genus_divisor()
    if any(c < 0 for c in g.coeffs.values()):
        raise ValueError("genus divisor must be effective")
    return g


# ----------------------------------------------------------------------
# generic semimodule


class GenericEngine:
    """Probe engine for the generic semimodule of D on an augmented graph.

    Probes reduce the shifted divisor D0 = D - g; membership and weights
    account for the genus function, so that every point carrying positive
    genus belongs to the locus and component weights gain (r + 1) per unit
    of genus inside the component.
    """

    def __init__(self, D: Divisor, g: Optional[Divisor] = None):
        self.graph = D.graph
        self.gdiv = _genus_divisor(self.graph, g)
        self.D = D
        self.D0 = D - self.gdiv
        r = chipfire.rank(self.D0)
        if r < 0:
            raise NegativeRank("shifted divisor has negative rank")
        self.rank = r
        self.genus_total = self.graph.betti() + self.gdiv.degree()
        self.degree = D.degree()

    def probe(self, x: Point) -> Probe:
        res = chipfire.reduce(self.D0, x)
        return Probe(res.divisor[x], dict(res.slopes.slopes))

    def excess(self, probe: Probe, x: Point) -> int:
        gx = self.gdiv[x]
        return probe.coeff + gx + (gx - 1) * self.rank

    def component_genus(self, C: ClosedSubset) -> int:
        return C.betti() + sum(
            c for p, c in self.gdiv.coeffs.items() if C.contains(p)
        )

    def expected_total(self) -> int:
        return self.degree - self.rank + self.rank * self.genus_total


def generic_view(
    D: Divisor, g: Optional[Divisor] = None
) -> Tuple[Divisor, int, WLocus]:
    """Locus and weights of D relative to its generic semimodule.

    Returns the shifted divisor D0 = D - g, the rank r(D0), and the locus,
    which is the ordinary locus of D0 together with every point of
    positive genus, with weights increased by (r + 1) per unit of genus.
    """
    engine = GenericEngine(D, g)
    wl = compute_locus(engine, mode="generic")
    return engine.D0, engine.rank, wl


# ----------------------------------------------------------------------
# canonical semimodule


def canonical_membership(f: PLFunction, g: Optional[Divisor] = None) -> bool:
    """Test membership of f in the canonical semimodule.

    Requires K + div(f) >= g - 1 everywhere, with equality to g - 1
    permitted only at isolated local minima of f (all outgoing slopes
    at least one).
    """
    graph = f.graph
    gdiv = _genus_divisor(graph, g)
    K = graph.canonical_divisor()
    E = K + f.divisor()
    points = set(E.support()) | set(gdiv.support())
    points.update(Point.at_vertex(v) for v in graph.vertex_ids)
    for p in points:
        slack = E[p] - gdiv[p]
        if slack >= 0:
            continue
        if slack < -1:
            return False
        if any(f.slope(d) <= 0 for d in graph.tangent_directions(p)):
            return False
    return True


class CanonicalEngine:
    """Probe engine for the canonical semimodule K-Rat(g).

    A probe at x maximises (K + div f)(x) over members f whose divisor
    K + div f is bounded below by g - 1_S on a subset S of the support of
    g and by g elsewhere.  For each S the optimum is the reduced divisor
    of K - g + 1_S at x; the choice is valid when its witness function is
    an isolated local minimum at every point of S where the bound g - 1
    is attained.  The probe records the best coefficient over valid
    choices and, per tangent direction, the least witness slope.
    """

    def __init__(self, g: Optional[Divisor] = None, graph: Optional[MetricGraph] = None):
        if graph is None:
            if g is None:
                raise ValueError("need a genus divisor or a graph")
            graph = g.graph
        self.graph = graph
        self.gdiv = _genus_divisor(graph, g)
        if self.gdiv.degree() == 0:
            raise ValueError("canonical semimodule requires positive genus")
        self.D = graph.canonical_divisor()
        self.genus_total = graph.betti() + self.gdiv.degree()
        if self.genus_total < 2:
            raise NegativeRank("total genus must be at least two")
        self.rank = self.genus_total - 1
        self.degree = self.D.degree()
        self._gsupp = sorted(self.gdiv.support(), key=lambda p: (p.vertex or "",))

    def probe(self, x: Point) -> Probe:
        x = Divisor._normalize(self.graph, x)
        gx = self.gdiv[x]
        best: Optional[int] = None
        slopes: Dict = {}
        for size in range(len(self._gsupp) + 1):
            for S in combinations(self._gsupp, size):
                ones = Divisor(self.graph, {p: 1 for p in S})
                res = chipfire.reduce(self.D - self.gdiv + ones, x)
                if not self._valid(res, S, x):
                    continue
                coeff = res.divisor[x] + gx - ones[x]
                if best is None or coeff > best:
                    best = coeff
                for d, s in res.slopes.slopes.items():
                    if d not in slopes or s < slopes[d]:
                        slopes[d] = s
        assert best is not None, "empty choice S=() is always valid"
        return Probe(best, slopes)

    def _valid(self, res, S, x: Point) -> bool:
        for p in S:
            if res.divisor[p] != 0:
                continue
            if p == x:
                dirs = res.slopes.slopes.items()
                if any(s <= 0 for _d, s in dirs):
                    return False
            elif any(
                res.fn.slope(d) <= 0
                for d in self.graph.tangent_directions(p)
            ):
                return False
        return True

    def excess(self, probe: Probe, x: Point) -> int:
        return probe.coeff + (self.gdiv[x] - 1) * self.rank

    def component_genus(self, C: ClosedSubset) -> int:
        return C.genus()

    def expected_total(self) -> int:
        return self.degree - self.rank + self.rank * self.genus_total


def canonical_reduced_coeff(g: Divisor, x: Point) -> int:
    """Largest coefficient at x of K + div(f) over members f of the
    canonical semimodule whose divisor is effective away from the
    permitted genus slack."""
    return CanonicalEngine(g).probe(x).coeff


def canonical_locus(g: Optional[Divisor] = None, graph: Optional[MetricGraph] = None) -> WLocus:
    """Weierstrass locus of the canonical semimodule, with exact
    components and weights totalling g^2 - 1."""
    return compute_locus(CanonicalEngine(g, graph), mode="canonical")
