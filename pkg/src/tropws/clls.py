"""Slope-structure arithmetic: the pointwise Weierstrass divisor attached to
prescribed edge slopes, tangential ramification, effectivity, and the two
realizability obstructions.

A slope structure of rank r assigns to every oriented edge segment a strictly
increasing vector of r + 1 integer slopes, with opposite orientations paired
by s_j + s'_{r-j} = 0.  From this data alone (no function space is ever
synthesized) the module computes the weight

    mu(x) = (r+1) D(x) + r(r+1)/2 (val(x) + 2 g(x) - 2)
            - sum over tangent directions nu at x of sum_j s_j^nu,

which vanishes at edge-interior points away from breakpoints and the supports
of D and the genus function, so the resulting divisor has finite support.
Its degree is always (r+1)(d - r + rg).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import chipfire
from .errors import (
    BreakpointMismatch,
    InvalidStructure,
    PairingViolation,
    SlopeCountMismatch,
)
from .graph_core import Divisor, EdgeId, MetricGraph, Point
from .rationals import parse_rational

# a segment is (t0, t1, slopes) in intrinsic edge coordinates, slopes taken
# in the direction of increasing offset
_Segment = Tuple[Fraction, Fraction, Tuple[int, ...]]


def _reversed_slopes(slopes: Sequence[int]) -> Tuple[int, ...]:
    """Slopes of the same functions read along the opposite orientation."""
    return tuple(-s for s in reversed(slopes))


class SlopeStructure:
    """Rank-r slope data on every edge of a metric graph.

    ``data`` maps each edge id to a list of ``(upto, slopes)`` pairs read
    from the ``from_vertex`` end: ``upto`` is the cumulative breakpoint
    position and ``slopes`` the r + 1 slopes on the segment ending there.
    When only one orientation of an edge is supplied, the opposite one is
    derived from the pairing rule; supplying both makes the pairing a
    validated constraint.
    """

    def __init__(
        self,
        graph: MetricGraph,
        rank: int,
        data: Dict[EdgeId, List[Tuple[object, Sequence[int]]]],
        from_vertex: Optional[Dict[EdgeId, object]] = None,
    ):
        if rank < 0:
            raise InvalidStructure("rank must be non-negative")
        self.graph = graph
        self.rank = int(rank)
        self.segments: Dict[EdgeId, List[_Segment]] = {}
        from_vertex = from_vertex or {}
        for eid, edge in graph.edges.items():
            if eid not in data:
                raise InvalidStructure(f"no slope data for edge {eid!r}")
            start = from_vertex.get(eid, edge.ends[0])
            if start not in edge.ends:
                raise InvalidStructure(
                    f"orientation vertex {start!r} is not an end of {eid!r}"
                )
            segs: List[_Segment] = []
            prev = Fraction(0)
            for upto, slopes in data[eid]:
                upto = parse_rational(upto)
                if not prev < upto <= edge.length:
                    raise BreakpointMismatch(
                        f"breakpoint {upto} out of order on edge {eid!r}"
                    )
                segs.append((prev, upto, tuple(int(s) for s in slopes)))
                prev = upto
            if prev != edge.length:
                raise BreakpointMismatch(
                    f"segments of edge {eid!r} end at {prev}, "
                    f"expected length {edge.length}"
                )
            if start == edge.ends[1] and not edge.is_loop:
                # re-express in intrinsic coordinates (from ends[0])
                segs = [
                    (edge.length - t1, edge.length - t0, _reversed_slopes(sl))
                    for t0, t1, sl in reversed(segs)
                ]
            self.segments[eid] = segs
        self._validate_segments()

    def _validate_segments(self) -> None:
        for eid, segs in self.segments.items():
            for _t0, _t1, slopes in segs:
                if len(slopes) != self.rank + 1:
                    raise SlopeCountMismatch(
                        f"edge {eid!r} carries {len(slopes)} slopes, "
                        f"expected {self.rank + 1}"
                    )
                if any(a >= b for a, b in zip(slopes, slopes[1:])):
                    raise InvalidStructure(
                        f"slopes on edge {eid!r} are not strictly increasing"
                    )

    def check_pairing(
        self, reverse_data: Dict[EdgeId, List[Tuple[object, Sequence[int]]]]
    ) -> None:
        """Validate explicitly supplied opposite-orientation data against the
        stored segments: mirrored breakpoints must agree and slope vectors
        must satisfy s_j + s'_{r-j} = 0."""
        for eid, pairs in reverse_data.items():
            edge = self.graph.edges[eid]
            segs = self.segments[eid]
            rev: List[_Segment] = []
            prev = Fraction(0)
            for upto, slopes in pairs:
                upto = parse_rational(upto)
                rev.append((prev, upto, tuple(int(s) for s in slopes)))
                prev = upto
            if prev != edge.length or len(rev) != len(segs):
                raise BreakpointMismatch(
                    f"opposite orientations of edge {eid!r} disagree on "
                    "breakpoints"
                )
            for (t0, t1, sl), (r0, r1, rsl) in zip(segs, reversed(rev)):
                if (t0, t1) != (edge.length - r1, edge.length - r0):
                    raise BreakpointMismatch(
                        f"opposite orientations of edge {eid!r} disagree on "
                        "breakpoints"
                    )
                if len(rsl) != self.rank + 1:
                    raise SlopeCountMismatch(
                        f"edge {eid!r} carries {len(rsl)} slopes, "
                        f"expected {self.rank + 1}"
                    )
                if _reversed_slopes(rsl) != sl:
                    raise PairingViolation(
                        f"slopes on edge {eid!r} violate s_j + s'_(r-j) = 0"
                    )

    # ------------------------------------------------------------------
    # slope lookup

    def slopes_at(self, x: Point) -> List[Tuple[int, ...]]:
        """One outgoing slope vector per tangent direction at x."""
        out: List[Tuple[int, ...]] = []
        if x.is_vertex:
            for eid, end in self.graph.incident(x.vertex):
                segs = self.segments[eid]
                if end == 0:
                    out.append(segs[0][2])
                else:
                    out.append(_reversed_slopes(segs[-1][2]))
            return out
        segs = self.segments[x.edge]
        for t0, t1, sl in segs:
            if t0 <= x.offset < t1:
                out.append(sl)  # direction of increasing offset
                break
        for t0, t1, sl in segs:
            if t0 < x.offset <= t1:
                out.append(_reversed_slopes(sl))
                break
        if len(out) != 2:  # pragma: no cover - guarded by constructor
            raise InvalidStructure(f"no segment covers {x!r}")
        return out

    def breakpoints(self) -> List[Point]:
        pts = []
        for eid, segs in self.segments.items():
            for _t0, t1, _sl in segs[:-1]:
                pts.append(Point.on_edge(eid, t1))
        return pts


def validate_slope_structure(S: SlopeStructure, D: Divisor) -> None:
    """Re-run the structural checks of S against the graph of D.

    Raises SlopeCountMismatch, BreakpointMismatch, PairingViolation or
    InvalidStructure; returns None when the structure is well-formed.
    """
    if S.graph is not D.graph:
        raise InvalidStructure("slope structure and divisor live on "
                               "different graphs")
    S._validate_segments()
    for eid, segs in S.segments.items():
        rev = [
            (S.graph.edges[eid].length - t0, _reversed_slopes(sl))
            for t0, _t1, sl in reversed(segs)
        ]
        S.check_pairing({eid: rev})


@dataclass
class CllsDivisor:
    """Pointwise Weierstrass weights of a slope structure (possibly
    negative), together with the rank they were computed from."""

    divisor: Divisor
    rank: int

    def weight(self, x: Point) -> int:
        return self.divisor[x]

    def degree(self) -> int:
        return self.divisor.degree()

    def is_effective(self) -> bool:
        return self.divisor.is_effective()


@dataclass
class RamificationProfile:
    """Tangential ramification sequences alpha_j = s_j - s_0 - j, one
    non-decreasing (r+1)-vector per (point, outgoing direction)."""

    sequences: Dict[Point, List[Tuple[int, ...]]]

    def total_at(self, x: Point) -> int:
        return sum(sum(seq) for seq in self.sequences.get(x, []))


def _ramification(slopes: Tuple[int, ...]) -> Tuple[int, ...]:
    s0 = slopes[0]
    return tuple(s - s0 - j for j, s in enumerate(slopes))


def clls_divisor(
    S: SlopeStructure, D: Divisor, g: Optional[Divisor] = None
) -> Tuple[CllsDivisor, RamificationProfile]:
    """The Weierstrass divisor of the slope structure and its ramification
    profile.

    The weight is evaluated at every vertex, breakpoint, and point of the
    supports of D and the genus divisor; everywhere else it vanishes.  The
    resulting degree equals (r+1)(d - r + rg).
    """
    graph = S.graph
    validate_slope_structure(S, D)
    r = S.rank
    gdiv = g if g is not None else graph.genus_divisor()
    points = {Point.at_vertex(v) for v in graph.vertex_ids}
    points.update(S.breakpoints())
    points.update(D.support())
    points.update(gdiv.support())

    coeffs: Dict[Point, int] = {}
    sequences: Dict[Point, List[Tuple[int, ...]]] = {}
    for x in sorted(points, key=repr):
        vectors = S.slopes_at(x)
        val = graph.valence_at(x)
        mu = (
            (r + 1) * D[x]
            + r * (r + 1) * (val + 2 * gdiv[x] - 2) // 2
            - sum(sum(v) for v in vectors)
        )
        if mu != 0:
            coeffs[x] = mu
        sequences[x] = [_ramification(v) for v in vectors]

    W = CllsDivisor(Divisor(graph, coeffs), r)
    d = D.degree()
    gtot = graph.betti() + gdiv.degree()
    assert W.degree() == (r + 1) * (d - r + r * gtot)
    return W, RamificationProfile(sequences)


def is_g_effective(
    S: SlopeStructure, D: Divisor, g: Optional[Divisor] = None
) -> bool:
    """Whether the Weierstrass divisor of the slope structure is effective
    (equivalently, the pointwise ramification inequality holds)."""
    W, _prof = clls_divisor(S, D, g)
    return W.is_effective()


@dataclass
class ObstructionReport:
    """Outcome of the two necessary conditions for a slope structure to
    arise from a degenerating linear series."""

    effective: bool
    principal: bool

    def realizable_candidate(self) -> bool:
        return self.effective and self.principal

    def obstructions(self) -> List[str]:
        out = []
        if not self.effective:
            out.append("weierstrass divisor is not effective")
        if not self.principal:
            out.append("slope-sum divisor is not principal")
        return out


def realizability_obstructions(
    S: SlopeStructure, D: Divisor, g: Optional[Divisor] = None
) -> ObstructionReport:
    """Evaluate both realizability obstructions: effectivity of the
    Weierstrass divisor, and principality of W - (r+1)D - r(r+1)/2 K."""
    graph = S.graph
    W, _prof = clls_divisor(S, D, g)
    r = S.rank
    gdiv = g if g is not None else graph.genus_divisor()
    K = Divisor(
        graph,
        {
            Point.at_vertex(v): graph.valence(v) - 2 + 2 * gdiv[Point.at_vertex(v)]
            for v in graph.vertex_ids
        },
    )
    obstruction = W.divisor - (r + 1) * D - (r * (r + 1) // 2) * K
    return ObstructionReport(
        effective=W.is_effective(),
        principal=chipfire.is_principal(obstruction),
    )
