"""JSON-friendly encodings of graphs, divisors, subsets, slope structures,
and loci.

All rationals are emitted as strings "p/q" (or "n" for integers) and parsed
back exactly, so every encode/decode round-trip is bit-exact.
"""

from __future__ import annotations

from typing import Dict, List

from .clls import SlopeStructure
from .graph_core import ClosedSubset, Divisor, MetricGraph, Point
from .rationals import format_rational, parse_rational
from .weierstrass import WComponent, WLocus


# ----------------------------------------------------------------------
# graphs


def graph_to_dict(graph: MetricGraph) -> Dict:
    return {
        "vertices": [
            {"id": v, "genus": graph.genus_map[v]} for v in graph.vertex_ids
        ],
        "edges": [
            {
                "id": e.id,
                "ends": [e.ends[0], e.ends[1]],
                "length": format_rational(e.length),
            }
            for e in graph.edges.values()
        ],
    }


def graph_from_dict(data: Dict) -> MetricGraph:
    vertices = []
    for v in data["vertices"]:
        if isinstance(v, dict):
            vertices.append((v["id"], int(v.get("genus", 0))))
        else:
            vertices.append((v, 0))
    edges = [
        (e["id"], (e["ends"][0], e["ends"][1]), parse_rational(e["length"]))
        for e in data.get("edges", [])
    ]
    return MetricGraph(vertices, edges)


# ----------------------------------------------------------------------
# points and divisors


def point_to_dict(p: Point) -> Dict:
    if p.is_vertex:
        return {"vertex": p.vertex}
    return {"edge": p.edge, "offset": format_rational(p.offset)}


def point_from_dict(graph: MetricGraph, data: Dict) -> Point:
    if "vertex" in data:
        return graph.vertex_point(data["vertex"])
    return graph.point(data["edge"], parse_rational(data["offset"]))


def divisor_to_list(D: Divisor) -> List[Dict]:
    return [
        {"at": point_to_dict(p), "coeff": c}
        for p, c in sorted(D.coeffs.items(), key=lambda kv: repr(kv[0]))
    ]


def divisor_from_list(graph: MetricGraph, data: List[Dict]) -> Divisor:
    coeffs: Dict[Point, int] = {}
    for item in data:
        p = point_from_dict(graph, item["at"])
        coeffs[p] = coeffs.get(p, 0) + int(item["coeff"])
    return Divisor(graph, coeffs)


# ----------------------------------------------------------------------
# closed subsets


def subset_to_dict(A: ClosedSubset) -> Dict:
    return {
        "vertices": sorted(A.vertices),
        "intervals": [
            {"edge": eid, "from": format_rational(a), "to": format_rational(b)}
            for eid, ivals in A.intervals.items()
            for a, b in ivals
        ],
    }


def subset_from_dict(graph: MetricGraph, data: Dict) -> ClosedSubset:
    intervals: Dict[str, List] = {}
    for item in data.get("intervals", []):
        intervals.setdefault(item["edge"], []).append(
            (parse_rational(item["from"]), parse_rational(item["to"]))
        )
    return ClosedSubset(graph, data.get("vertices", []), intervals)


# ----------------------------------------------------------------------
# slope structures


def slopes_from_dict(graph: MetricGraph, data: Dict) -> SlopeStructure:
    """Build a slope structure from ``{"rank": r, "edges": [...]}`` where
    each entry is ``{edge, from_vertex, segments: [{upto, slopes}]}``.

    An edge may appear once (the opposite orientation is derived) or twice
    (the second orientation is checked against the first).
    """
    rank = int(data["rank"])
    primary: Dict = {}
    from_vertex: Dict = {}
    reverse: Dict = {}
    for entry in data["edges"]:
        eid = entry["edge"]
        segs = [
            (parse_rational(s["upto"]), [int(x) for x in s["slopes"]])
            for s in entry["segments"]
        ]
        if eid not in primary:
            primary[eid] = segs
            if "from_vertex" in entry:
                from_vertex[eid] = entry["from_vertex"]
        else:
            reverse[eid] = segs
    S = SlopeStructure(graph, rank, primary, from_vertex)
    if reverse:
        S.check_pairing(reverse)
    return S


def slopes_to_dict(S: SlopeStructure) -> Dict:
    return {
        "rank": S.rank,
        "edges": [
            {
                "edge": eid,
                "from_vertex": S.graph.edges[eid].ends[0],
                "segments": [
                    {
                        "upto": format_rational(t1),
                        "slopes": list(slopes),
                    }
                    for _t0, t1, slopes in segs
                ],
            }
            for eid, segs in S.segments.items()
        ],
    }


# ----------------------------------------------------------------------
# loci


def locus_to_dict(wl: WLocus) -> Dict:
    return {
        "components": [
            {
                **subset_to_dict(c.region),
                "weight": c.weight,
            }
            for c in wl.components
        ],
        "total": wl.total(),
        "rank": wl.rank,
        "degree": wl.degree,
        "genus": wl.genus,
    }


def locus_from_dict(graph: MetricGraph, data: Dict) -> WLocus:
    components = [
        WComponent(subset_from_dict(graph, c), int(c["weight"]))
        for c in data["components"]
    ]
    return WLocus(
        components,
        degree=int(data["degree"]),
        rank=int(data["rank"]),
        genus=int(data["genus"]),
    )
