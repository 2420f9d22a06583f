"""Continuous piecewise-linear functions with integer slopes on a metric graph.

The divisor of a function follows the convention

    div(f)(x) = - sum over outgoing directions of slope_nu f(x),

so an isolated local minimum of f (all outgoing slopes >= 1) has
div(f)(x) <= -val(x), and the reduction function f_x of a divisor has a
local maximum at the base point x.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple

from .graph_core import (
    Divisor,
    EdgeId,
    MetricGraph,
    Model,
    Point,
    TangentDirection,
    VertexId,
)


class PLFunction:
    """Per edge: a breakpoint list (offset, value) from 0 to the edge length,
    affine in between, with endpoint values matching the vertex values."""

    def __init__(
        self,
        graph: MetricGraph,
        vertex_values: Dict[VertexId, Fraction],
        edge_breaks: Dict[EdgeId, List[Tuple[Fraction, Fraction]]],
        check: bool = True,
    ):
        self.graph = graph
        self.vertex_values: Dict[VertexId, Fraction] = {
            v: Fraction(vertex_values.get(v, 0)) for v in graph.vertex_ids
        }
        self.edge_breaks: Dict[EdgeId, List[Tuple[Fraction, Fraction]]] = {}
        for e in graph.edges.values():
            raw = list(edge_breaks.get(e.id, []))
            pts = {Fraction(t): Fraction(val) for t, val in raw}
            v0 = self.vertex_values[e.ends[0]]
            v1 = self.vertex_values[e.ends[1]]
            if 0 in pts and pts[Fraction(0)] != v0:
                raise ValueError(f"edge {e.id!r}: value at 0 inconsistent with vertex")
            if e.length in pts and pts[e.length] != v1:
                raise ValueError(f"edge {e.id!r}: value at end inconsistent with vertex")
            pts[Fraction(0)] = v0
            pts[e.length] = v1
            breaks = sorted(pts.items())
            self.edge_breaks[e.id] = self._simplify(breaks)
        if check:
            self._check_integer_slopes()

    @staticmethod
    def _simplify(breaks):
        out = [breaks[0]]
        for i in range(1, len(breaks) - 1):
            (t0, v0), (t1, v1), (t2, v2) = out[-1], breaks[i], breaks[i + 1]
            if (v1 - v0) * (t2 - t1) == (v2 - v1) * (t1 - t0):
                continue
            out.append(breaks[i])
        if len(breaks) > 1:
            out.append(breaks[-1])
        return out

    def _check_integer_slopes(self) -> None:
        for eid, breaks in self.edge_breaks.items():
            for (t0, v0), (t1, v1) in zip(breaks, breaks[1:]):
                s = (v1 - v0) / (t1 - t0)
                if s.denominator != 1:
                    raise ValueError(
                        f"edge {eid!r}: non-integer slope {s} on [{t0},{t1}]"
                    )

    # ------------------------------------------------------------------

    @staticmethod
    def zero(graph: MetricGraph) -> "PLFunction":
        return PLFunction(graph, {}, {}, check=False)

    @staticmethod
    def from_node_values(model: Model, values: Dict[tuple, Fraction]) -> "PLFunction":
        """Build from values at all nodes of a loopless model (affine on arcs)."""
        graph = model.graph
        vertex_values = {
            v: Fraction(values.get(("v", v), 0)) for v in graph.vertex_ids
        }
        edge_breaks: Dict[EdgeId, List[Tuple[Fraction, Fraction]]] = {}
        for a, b, _length, eid, t0, t1 in model.arcs:
            lst = edge_breaks.setdefault(eid, [])
            lst.append((t0, Fraction(values.get(a, 0))))
            lst.append((t1, Fraction(values.get(b, 0))))
        dedup = {
            eid: sorted(set(pairs)) for eid, pairs in edge_breaks.items()
        }
        for eid, pairs in dedup.items():
            offs = [t for t, _ in pairs]
            if len(set(offs)) != len(offs):
                raise ValueError(f"edge {eid!r}: conflicting node values")
        return PLFunction(graph, vertex_values, dedup)

    # ------------------------------------------------------------------

    def value(self, p: Point) -> Fraction:
        if p.is_vertex:
            return self.vertex_values[p.vertex]
        breaks = self.edge_breaks[p.edge]
        for (t0, v0), (t1, v1) in zip(breaks, breaks[1:]):
            if t0 <= p.offset <= t1:
                return v0 + (v1 - v0) * (p.offset - t0) / (t1 - t0)
        raise ValueError(f"offset {p.offset} outside edge {p.edge!r}")

    def slope(self, d: TangentDirection) -> int:
        """Outgoing slope at the base point of d along d (an integer)."""
        breaks = self.edge_breaks[d.edge]
        t = d.anchor
        if d.sign > 0:
            for (t0, v0), (t1, v1) in zip(breaks, breaks[1:]):
                if t0 <= t < t1:
                    s = (v1 - v0) / (t1 - t0)
                    break
            else:
                raise ValueError(f"no segment after offset {t} on {d.edge!r}")
        else:
            for (t0, v0), (t1, v1) in zip(breaks, breaks[1:]):
                if t0 < t <= t1:
                    s = (v0 - v1) / (t1 - t0)
                    break
            else:
                raise ValueError(f"no segment before offset {t} on {d.edge!r}")
        assert s.denominator == 1, f"non-integer slope {s}"
        return int(s)

    def divisor(self) -> Divisor:
        """div(f), with div(f)(x) = - sum of outgoing slopes at x."""
        coeffs: Dict[Point, int] = {}
        for v in self.graph.vertex_ids:
            p = Point.at_vertex(v)
            total = sum(self.slope(d) for d in self.graph.tangent_directions(p))
            if total:
                coeffs[p] = -total
        for eid, breaks in self.edge_breaks.items():
            for i in range(1, len(breaks) - 1):
                t, _v = breaks[i]
                p = Point.on_edge(eid, t)
                total = self.slope(TangentDirection(p, eid, t, +1)) + self.slope(
                    TangentDirection(p, eid, t, -1)
                )
                if total:
                    coeffs[p] = -total
        return Divisor(self.graph, coeffs)

    def breakpoints(self) -> List[Point]:
        pts: List[Point] = []
        for eid, breaks in self.edge_breaks.items():
            for t, _v in breaks[1:-1]:
                pts.append(Point.on_edge(eid, t))
        return pts

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.vertex_values.values()) and all(
            v == 0 for breaks in self.edge_breaks.values() for _t, v in breaks
        )

    # ------------------------------------------------------------------

    def shifted(self, c: Fraction) -> "PLFunction":
        return PLFunction(
            self.graph,
            {v: val + c for v, val in self.vertex_values.items()},
            {
                eid: [(t, val + c) for t, val in breaks]
                for eid, breaks in self.edge_breaks.items()
            },
            check=False,
        )

    def __add__(self, other: "PLFunction") -> "PLFunction":
        assert self.graph is other.graph
        vertex_values = {
            v: self.vertex_values[v] + other.vertex_values[v]
            for v in self.graph.vertex_ids
        }
        edge_breaks = {}
        for e in self.graph.edges.values():
            offs = {t for t, _ in self.edge_breaks[e.id]} | {
                t for t, _ in other.edge_breaks[e.id]
            }
            pairs = []
            for t in sorted(offs):
                if t == 0 or t == e.length:
                    continue
                p = Point.on_edge(e.id, t)
                pairs.append((t, self.value(p) + other.value(p)))
            edge_breaks[e.id] = pairs
        return PLFunction(self.graph, vertex_values, edge_breaks, check=False)

    def __neg__(self) -> "PLFunction":
        return PLFunction(
            self.graph,
            {v: -val for v, val in self.vertex_values.items()},
            {
                eid: [(t, -val) for t, val in breaks]
                for eid, breaks in self.edge_breaks.items()
            },
            check=False,
        )
