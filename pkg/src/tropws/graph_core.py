"""Exact representation of (augmented) metric graphs.

A metric graph is given by a model: vertices (with an optional non-negative
integer genus) and edges with exact rational lengths.  Loops and multi-edges
are allowed in the input; algorithms work on loopless refinements produced by
:meth:`MetricGraph.model`, which splits every loop at a midpoint node.

All lengths and offsets are :class:`fractions.Fraction`; no floating point is
used anywhere in core computations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import (
    DisconnectedGraph,
    DuplicateId,
    EmptySubset,
    NonPositiveLength,
)

VertexId = str
EdgeId = str


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class Point:
    """A point of a metric graph: a vertex or an edge-interior point.

    Edge offsets are measured from the edge's first endpoint and lie in the
    open interval (0, length); offsets 0 and length normalize to the endpoint
    vertices (see :meth:`MetricGraph.point`).
    """

    vertex: Optional[VertexId] = None
    edge: Optional[EdgeId] = None
    offset: Optional[Fraction] = None

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    @staticmethod
    def at_vertex(v: VertexId) -> "Point":
        return Point(vertex=v)

    @staticmethod
    def on_edge(e: EdgeId, offset: Fraction) -> "Point":
        return Point(edge=e, offset=Fraction(offset))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if self.is_vertex:
            return f"Point({self.vertex!r})"
        return f"Point({self.edge!r}@{self.offset})"


@dataclass(frozen=True)
class TangentDirection:
    """A tangent direction at a point.

    ``anchor`` is the offset of the base point in the coordinates of
    ``edge`` (0 or the length for a vertex; needed to tell apart the two
    directions a loop contributes at its vertex), and ``sign`` is +1 for the
    direction of increasing offset, -1 for decreasing.
    """

    base: Point
    edge: EdgeId
    anchor: Fraction
    sign: int

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        arrow = "+" if self.sign > 0 else "-"
        return f"Dir({self.base!r},{self.edge!r}@{self.anchor}{arrow})"


@dataclass(frozen=True)
class Edge:
    id: EdgeId
    ends: Tuple[VertexId, VertexId]
    length: Fraction

    @property
    def is_loop(self) -> bool:
        return self.ends[0] == self.ends[1]


class MetricGraph:
    """Immutable (augmented) metric graph."""

    def __init__(
        self,
        vertices: Sequence[Tuple[VertexId, int]],
        edges: Sequence[Tuple[EdgeId, Tuple[VertexId, VertexId], Fraction]],
    ):
        self.genus_map: Dict[VertexId, int] = {}
        order: List[VertexId] = []
        for vid, gv in vertices:
            if vid in self.genus_map:
                raise DuplicateId(f"duplicate vertex id {vid!r}")
            if gv < 0:
                raise ValueError(f"negative genus at vertex {vid!r}")
            self.genus_map[vid] = int(gv)
            order.append(vid)
        self.vertex_ids: Tuple[VertexId, ...] = tuple(order)

        self.edges: Dict[EdgeId, Edge] = {}
        for eid, ends, length in edges:
            if eid in self.edges:
                raise DuplicateId(f"duplicate edge id {eid!r}")
            length = _frac(length)
            if length <= 0:
                raise NonPositiveLength(f"edge {eid!r} has length {length}")
            u, v = ends
            for w in (u, v):
                if w not in self.genus_map:
                    raise DuplicateId(f"edge {eid!r} references unknown vertex {w!r}")
            self.edges[eid] = Edge(eid, (u, v), length)

        self._incidence: Dict[VertexId, List[Tuple[EdgeId, int]]] = {
            v: [] for v in self.vertex_ids
        }
        for e in self.edges.values():
            self._incidence[e.ends[0]].append((e.id, 0))
            self._incidence[e.ends[1]].append((e.id, 1))

        self._check_connected()

    # ------------------------------------------------------------------
    # basic topology

    def _check_connected(self) -> None:
        if not self.vertex_ids:
            raise DisconnectedGraph("graph has no vertices")
        seen = {self.vertex_ids[0]}
        stack = [self.vertex_ids[0]]
        while stack:
            v = stack.pop()
            for eid, end in self._incidence[v]:
                w = self.edges[eid].ends[1 - end]
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(self.vertex_ids):
            raise DisconnectedGraph("graph is not connected")

    def valence(self, v: VertexId) -> int:
        """Number of incident edge ends (loops count twice)."""
        return len(self._incidence[v])

    def incident(self, v: VertexId) -> List[Tuple[EdgeId, int]]:
        return list(self._incidence[v])

    def betti(self) -> int:
        return len(self.edges) - len(self.vertex_ids) + 1

    def genus(self) -> int:
        """Total genus: first Betti number plus the vertex genera."""
        return self.betti() + sum(self.genus_map.values())

    def genus_at(self, x: Point) -> int:
        if x.is_vertex:
            return self.genus_map[x.vertex]
        return 0

    def valence_at(self, x: Point) -> int:
        if x.is_vertex:
            return self.valence(x.vertex)
        return 2

    # ------------------------------------------------------------------
    # points and directions

    def point(self, edge: EdgeId, offset) -> Point:
        """Normalized point on an edge: offsets 0/length become vertices."""
        e = self.edges[edge]
        offset = _frac(offset)
        if offset < 0 or offset > e.length:
            raise ValueError(f"offset {offset} outside [0, {e.length}] on edge {edge!r}")
        if offset == 0:
            return Point.at_vertex(e.ends[0])
        if offset == e.length:
            return Point.at_vertex(e.ends[1])
        return Point.on_edge(edge, offset)

    def vertex_point(self, v: VertexId) -> Point:
        if v not in self.genus_map:
            raise KeyError(v)
        return Point.at_vertex(v)

    def tangent_directions(self, x: Point) -> List[TangentDirection]:
        if x.is_vertex:
            dirs = []
            for eid, end in self._incidence[x.vertex]:
                e = self.edges[eid]
                if end == 0:
                    dirs.append(TangentDirection(x, eid, Fraction(0), +1))
                else:
                    dirs.append(TangentDirection(x, eid, e.length, -1))
            return dirs
        return [
            TangentDirection(x, x.edge, x.offset, +1),
            TangentDirection(x, x.edge, x.offset, -1),
        ]

    def opposite(self, d: TangentDirection) -> TangentDirection:
        """The opposite direction across the same edge.

        For an edge-interior base point, the other direction at the same
        point; for a vertex, the inward direction at the opposite endpoint.
        """
        if not d.base.is_vertex:
            return TangentDirection(d.base, d.edge, d.anchor, -d.sign)
        e = self.edges[d.edge]
        if d.sign > 0:
            return TangentDirection(
                Point.at_vertex(e.ends[1]), d.edge, e.length, -1
            )
        return TangentDirection(Point.at_vertex(e.ends[0]), d.edge, Fraction(0), +1)

    # ------------------------------------------------------------------
    # derived divisors

    def canonical_divisor(self) -> "Divisor":
        coeffs = {}
        for v in self.vertex_ids:
            k = self.valence(v) - 2 + 2 * self.genus_map[v]
            if k != 0:
                coeffs[Point.at_vertex(v)] = k
        return Divisor(self, coeffs)

    def genus_divisor(self) -> "Divisor":
        coeffs = {
            Point.at_vertex(v): g for v, g in self.genus_map.items() if g > 0
        }
        return Divisor(self, coeffs)

    # ------------------------------------------------------------------
    # refinement

    def model(self, marks: Iterable[Point] = ()) -> "Model":
        return Model(self, marks)

    # ------------------------------------------------------------------
    # transformed copies (used by invariance tests)

    def scaled(self, factor: Fraction) -> "MetricGraph":
        factor = _frac(factor)
        if factor <= 0:
            raise NonPositiveLength("scale factor must be positive")
        return MetricGraph(
            [(v, self.genus_map[v]) for v in self.vertex_ids],
            [(e.id, e.ends, e.length * factor) for e in self.edges.values()],
        )

    def subdivided(self, edge: EdgeId, offset) -> Tuple["MetricGraph", VertexId]:
        """Insert a valence-2, genus-0 vertex at an interior edge point."""
        e = self.edges[edge]
        offset = _frac(offset)
        if not (0 < offset < e.length):
            raise ValueError("subdivision offset must be interior")
        new_v = f"__sub_{edge}_{offset.numerator}_{offset.denominator}"
        verts = [(v, self.genus_map[v]) for v in self.vertex_ids] + [(new_v, 0)]
        edges = []
        for f in self.edges.values():
            if f.id != edge:
                edges.append((f.id, f.ends, f.length))
        edges.append((f"{edge}__a", (e.ends[0], new_v), offset))
        edges.append((f"{edge}__b", (new_v, e.ends[1]), e.length - offset))
        return MetricGraph(verts, edges), new_v


# ----------------------------------------------------------------------
# divisors


class Divisor:
    """Finite integer-valued map on points of a metric graph."""

    def __init__(self, graph: MetricGraph, coeffs: Dict[Point, int]):
        self.graph = graph
        clean: Dict[Point, int] = {}
        for p, c in coeffs.items():
            c = int(c)
            if c == 0:
                continue
            p = self._normalize(graph, p)
            clean[p] = clean.get(p, 0) + c
            if clean[p] == 0:
                del clean[p]
        self.coeffs: Dict[Point, int] = clean

    @staticmethod
    def _normalize(graph: MetricGraph, p: Point) -> Point:
        if p.is_vertex:
            if p.vertex not in graph.genus_map:
                raise KeyError(p.vertex)
            return p
        return graph.point(p.edge, p.offset)

    def __getitem__(self, p: Point) -> int:
        return self.coeffs.get(p, 0)

    def degree(self) -> int:
        return sum(self.coeffs.values())

    def support(self) -> List[Point]:
        return list(self.coeffs.keys())

    def is_effective(self) -> bool:
        return all(c >= 0 for c in self.coeffs.values())

    def __add__(self, other: "Divisor") -> "Divisor":
        coeffs = dict(self.coeffs)
        for p, c in other.coeffs.items():
            coeffs[p] = coeffs.get(p, 0) + c
        return Divisor(self.graph, coeffs)

    def __sub__(self, other: "Divisor") -> "Divisor":
        coeffs = dict(self.coeffs)
        for p, c in other.coeffs.items():
            coeffs[p] = coeffs.get(p, 0) - c
        return Divisor(self.graph, coeffs)

    def __neg__(self) -> "Divisor":
        return Divisor(self.graph, {p: -c for p, c in self.coeffs.items()})

    def __mul__(self, n: int) -> "Divisor":
        return Divisor(self.graph, {p: n * c for p, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Divisor) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        terms = " + ".join(f"{c}*{p!r}" for p, c in sorted(
            self.coeffs.items(), key=lambda kv: repr(kv[0])))
        return f"Divisor({terms or '0'})"

    def restricted_degree(self, A: "ClosedSubset") -> int:
        return sum(c for p, c in self.coeffs.items() if A.contains(p))


def degree_restricted(D: Divisor, A: "ClosedSubset") -> int:
    """Sum of the coefficients of D at points of A."""
    return D.restricted_degree(A)


# ----------------------------------------------------------------------
# loopless refined model


_NodeKey = tuple


class Model:
    """A loopless combinatorial refinement of a metric graph.

    Nodes are original vertices plus edge-interior split points (the given
    marks, and the midpoint of every loop that received no interior mark).
    Arcs join consecutive nodes along each edge and remember the original
    edge coordinates they cover.
    """

    def __init__(self, graph: MetricGraph, marks: Iterable[Point] = ()):
        self.graph = graph
        per_edge: Dict[EdgeId, set] = {e: set() for e in graph.edges}
        for p in marks:
            if p.is_vertex:
                continue
            per_edge[p.edge].add(p.offset)
        self.nodes: set = set()
        self.arcs: List[Tuple[_NodeKey, _NodeKey, Fraction, EdgeId, Fraction, Fraction]] = []
        self.adj: Dict[_NodeKey, List[int]] = {}
        for v in graph.vertex_ids:
            self._add_node(("v", v))
        for e in graph.edges.values():
            offsets = set(per_edge[e.id])
            if e.is_loop and not offsets:
                offsets.add(e.length / 2)
            bounds = sorted(offsets | {Fraction(0), e.length})
            for a, b in zip(bounds, bounds[1:]):
                na = self._node_for(e, a)
                nb = self._node_for(e, b)
                self._add_node(na)
                self._add_node(nb)
                idx = len(self.arcs)
                self.arcs.append((na, nb, b - a, e.id, a, b))
                self.adj[na].append(idx)
                self.adj[nb].append(idx)

    def _add_node(self, key: _NodeKey) -> None:
        if key not in self.nodes:
            self.nodes.add(key)
            self.adj[key] = []

    def _node_for(self, e: Edge, offset: Fraction) -> _NodeKey:
        if offset == 0:
            return ("v", e.ends[0])
        if offset == e.length:
            return ("v", e.ends[1])
        return ("p", e.id, offset)

    def node_of(self, p: Point) -> _NodeKey:
        if p.is_vertex:
            return ("v", p.vertex)
        key = ("p", p.edge, p.offset)
        if key not in self.nodes:
            raise KeyError(f"{p!r} is not a node of this model")
        return key

    def point_of(self, key: _NodeKey) -> Point:
        if key[0] == "v":
            return Point.at_vertex(key[1])
        return Point.on_edge(key[1], key[2])

    def neighbors(self, key: _NodeKey) -> List[Tuple[_NodeKey, int]]:
        """(other endpoint, arc index) for each incident arc."""
        out = []
        for idx in self.adj[key]:
            a, b, _, _, _, _ = self.arcs[idx]
            out.append((b if a == key else a, idx))
        return out

    def arc_other(self, idx: int, key: _NodeKey) -> _NodeKey:
        a, b = self.arcs[idx][0], self.arcs[idx][1]
        return b if a == key else a


# ----------------------------------------------------------------------
# closed subsets


class ClosedSubset:
    """A closed subset: vertices plus closed edge intervals, canonicalized.

    Canonical form: intervals on each edge are disjoint and sorted, touching
    or overlapping intervals are merged, an interval reaching offset 0 or
    the edge length absorbs the endpoint vertex into the vertex set, and
    degenerate intervals at an endpoint become the vertex alone.
    """

    def __init__(
        self,
        graph: MetricGraph,
        vertices: Iterable[VertexId] = (),
        intervals: Dict[EdgeId, Iterable[Tuple[Fraction, Fraction]]] = None,
    ):
        self.graph = graph
        vset = set(vertices)
        for v in vset:
            if v not in graph.genus_map:
                raise KeyError(v)
        ivals: Dict[EdgeId, List[Tuple[Fraction, Fraction]]] = {}
        for eid, pairs in (intervals or {}).items():
            e = graph.edges[eid]
            raw = []
            for a, b in pairs:
                a, b = _frac(a), _frac(b)
                if a > b:
                    a, b = b, a
                if a < 0 or b > e.length:
                    raise ValueError(f"interval [{a},{b}] outside edge {eid!r}")
                raw.append((a, b))
            raw.sort()
            merged: List[Tuple[Fraction, Fraction]] = []
            for a, b in raw:
                if merged and a <= merged[-1][1]:
                    merged[-1] = (merged[-1][0], max(merged[-1][1], b))
                else:
                    merged.append((a, b))
            final = []
            for a, b in merged:
                if a == 0:
                    vset.add(e.ends[0])
                if b == e.length:
                    vset.add(e.ends[1])
                if a == b and (a == 0 or a == e.length):
                    continue
                final.append((a, b))
            if final:
                ivals[eid] = final
        self.vertices: frozenset = frozenset(vset)
        self.intervals: Dict[EdgeId, Tuple[Tuple[Fraction, Fraction], ...]] = {
            eid: tuple(v) for eid, v in sorted(ivals.items())
        }

    # -- constructors ---------------------------------------------------

    @staticmethod
    def whole(graph: MetricGraph) -> "ClosedSubset":
        return ClosedSubset(
            graph,
            graph.vertex_ids,
            {e.id: [(Fraction(0), e.length)] for e in graph.edges.values()},
        )

    @staticmethod
    def from_point(graph: MetricGraph, p: Point) -> "ClosedSubset":
        if p.is_vertex:
            return ClosedSubset(graph, [p.vertex])
        return ClosedSubset(graph, [], {p.edge: [(p.offset, p.offset)]})

    # -- queries ---------------------------------------------------------

    def is_empty(self) -> bool:
        return not self.vertices and not self.intervals

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ClosedSubset)
            and self.vertices == other.vertices
            and self.intervals == other.intervals
        )

    def __hash__(self):
        return hash((self.vertices, tuple(sorted(self.intervals.items()))))

    def contains(self, p: Point) -> bool:
        if p.is_vertex:
            return p.vertex in self.vertices
        for a, b in self.intervals.get(p.edge, ()):
            if a <= p.offset <= b:
                return True
        return False

    def contains_whole_edge(self, eid: EdgeId) -> bool:
        e = self.graph.edges[eid]
        return (Fraction(0), e.length) in self.intervals.get(eid, ())

    def points_summary(self) -> List[Point]:
        """Representative boundary/vertex points (for iteration in tests)."""
        pts = [Point.at_vertex(v) for v in sorted(self.vertices)]
        for eid, ivals in self.intervals.items():
            for a, b in ivals:
                for t in {a, b}:
                    p = self.graph.point(eid, t)
                    if not p.is_vertex:
                        pts.append(p)
        return pts

    # -- structure -------------------------------------------------------

    def _skeleton(self):
        """Multigraph over canonical points: each interval is one edge."""
        nodes = {Point.at_vertex(v) for v in self.vertices}
        links: List[Tuple[Point, Point]] = []
        for eid, ivals in self.intervals.items():
            for a, b in ivals:
                pa = self.graph.point(eid, a)
                pb = self.graph.point(eid, b)
                nodes.add(pa)
                nodes.add(pb)
                if a != b:
                    links.append((pa, pb))
        return nodes, links

    def components(self) -> List["ClosedSubset"]:
        nodes, links = self._skeleton()
        parent = {n: n for n in nodes}

        def find(n):
            while parent[n] != n:
                parent[n] = parent[parent[n]]
                n = parent[n]
            return n

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        for a, b in links:
            union(a, b)
        groups: Dict[Point, Tuple[List[VertexId], Dict[EdgeId, list]]] = {}
        for n in nodes:
            groups.setdefault(find(n), ([], {}))
        for v in self.vertices:
            root = find(Point.at_vertex(v))
            groups[root][0].append(v)
        for eid, ivals in self.intervals.items():
            for a, b in ivals:
                root = find(self.graph.point(eid, a))
                groups[root][1].setdefault(eid, []).append((a, b))
        # isolated degenerate interval points (a == b interior) also appear
        return [
            ClosedSubset(self.graph, vs, iv) for vs, iv in groups.values()
        ]

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def betti(self) -> int:
        """First Betti number of the subset (sum over its components)."""
        nodes, links = self._skeleton()
        comps = len(self.components()) if nodes else 0
        return len(links) - len(nodes) + comps

    def genus(self) -> int:
        """Augmented genus: first Betti number plus vertex genera inside."""
        return self.betti() + sum(self.graph.genus_map[v] for v in self.vertices)

    # -- boundary ---------------------------------------------------------

    def _covers_end(self, eid: EdgeId, end: int) -> bool:
        """Does the subset contain an initial segment of edge eid at the
        given end (0 = offset 0, 1 = offset length)?"""
        e = self.graph.edges[eid]
        for a, b in self.intervals.get(eid, ()):
            if end == 0 and a == 0 and b > 0:
                return True
            if end == 1 and b == e.length and a < e.length:
                return True
        return False

    def boundary_directions(self) -> List[TangentDirection]:
        """Outgoing tangent directions at the boundary of the subset."""
        if self.is_empty():
            raise EmptySubset("boundary of empty subset")
        out: List[TangentDirection] = []
        for v in sorted(self.vertices):
            p = Point.at_vertex(v)
            for eid, end in self.graph.incident(v):
                if not self._covers_end(eid, end):
                    e = self.graph.edges[eid]
                    if end == 0:
                        out.append(TangentDirection(p, eid, Fraction(0), +1))
                    else:
                        out.append(TangentDirection(p, eid, e.length, -1))
        for eid, ivals in self.intervals.items():
            e = self.graph.edges[eid]
            for a, b in ivals:
                if a > 0:
                    p = self.graph.point(eid, a)
                    if not p.is_vertex:
                        out.append(TangentDirection(p, eid, a, -1))
                if b < e.length:
                    p = self.graph.point(eid, b)
                    if not p.is_vertex:
                        out.append(TangentDirection(p, eid, b, +1))
        return out

    def out_valence(self) -> int:
        return len(self.boundary_directions())


def genus(graph: MetricGraph, A: Optional[ClosedSubset] = None) -> Tuple[int, int]:
    """(first Betti number, augmented genus) of A, or of the whole graph."""
    if A is None:
        return graph.betti(), graph.genus()
    return A.betti(), A.genus()


def build_graph(spec) -> MetricGraph:
    """Build a validated metric graph from a plain description.

    ``spec`` is a mapping with keys ``vertices`` (list of ids or
    ``{id, genus}`` mappings) and ``edges`` (list of ``{id, ends, length}``).
    """
    vertices = []
    for v in spec["vertices"]:
        if isinstance(v, dict):
            vertices.append((str(v["id"]), int(v.get("genus", 0))))
        else:
            vertices.append((str(v), 0))
    edges = []
    for e in spec.get("edges", []):
        ends = e["ends"]
        edges.append((str(e["id"]), (str(ends[0]), str(ends[1])), _frac(e["length"])))
    return MetricGraph(vertices, edges)
