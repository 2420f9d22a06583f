"""Command-line front end.

Subcommands: rank, reduce, locus, weights, measure, verify, clls, obstruct,
scan, export-plot.  All reports are JSON on standard output with exact
rational strings; ``--float`` adds decimal companions for human reading.

Exit codes: 0 success, 1 domain failure (non-measurable set, certificate
failure, failed verification, obstruction under ``--strict``), 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Dict, List, Optional

from . import augmented, chipfire, clls, oracle, serialize, weierstrass
from .errors import TropwsError
from .graph_core import ClosedSubset, Divisor, MetricGraph, Point
from .rationals import format_rational, parse_rational


class InputError(Exception):
    """Bad file, flag, or document structure (exit code 2)."""


# ----------------------------------------------------------------------
# input loading


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _load_graph(path: str) -> MetricGraph:
    try:
        return serialize.graph_from_dict(_load_json(path))
    except (KeyError, TypeError, ValueError, TropwsError) as exc:
        raise InputError(f"invalid graph file {path}: {exc}") from exc


def _load_divisor(graph: MetricGraph, spec: str, pluricanonical: int) -> Divisor:
    if spec == "canonical":
        D = graph.canonical_divisor()
    else:
        try:
            D = serialize.divisor_from_list(graph, _load_json(spec))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"invalid divisor file {spec}: {exc}") from exc
    if pluricanonical > 1:
        if spec != "canonical":
            raise InputError("--pluricanonical applies to --divisor canonical")
        D = pluricanonical * D
    return D


def _parse_point(graph: MetricGraph, text: str) -> Point:
    """A point given as a vertex id or as "edge:offset"."""
    if ":" in text:
        eid, _, off = text.partition(":")
        try:
            return graph.point(eid, parse_rational(off))
        except (KeyError, ValueError) as exc:
            raise InputError(f"bad point {text!r}: {exc}") from exc
    try:
        return graph.vertex_point(text)
    except KeyError as exc:
        raise InputError(f"unknown vertex {text!r}") from exc


# ----------------------------------------------------------------------
# output


def _add_floats(obj):
    """Recursively add ``<key>_float`` companions next to rational strings."""
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            out[k] = _add_floats(v)
            if isinstance(v, str):
                try:
                    out[f"{k}_float"] = float(Fraction(v))
                except ValueError:
                    pass
        return out
    if isinstance(obj, list):
        return [_add_floats(v) for v in obj]
    return obj


def _emit(report: Dict, args) -> None:
    if getattr(args, "float", False):
        report = _add_floats(report)
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")


# ----------------------------------------------------------------------
# locus helpers


def _compute_locus(graph: MetricGraph, args) -> weierstrass.WLocus:
    series = getattr(args, "series", "complete")
    if series == "complete":
        D = _load_divisor(graph, args.divisor, args.pluricanonical)
        if getattr(args, "b_modified", False):
            return weierstrass.b_modified_locus(D)
        return weierstrass.locus(D)
    if getattr(args, "b_modified", False):
        raise InputError("--b-modified applies to --series complete")
    if series == "generic":
        D = _load_divisor(graph, args.divisor, args.pluricanonical)
        _D0, _r, wl = augmented.generic_view(D)
        return wl
    if series == "canonical":
        if args.divisor != "canonical" or args.pluricanonical != 1:
            raise InputError(
                "--series canonical uses the canonical divisor only"
            )
        return augmented.canonical_locus(graph=graph)
    raise InputError(f"unknown series {series!r}")


# ----------------------------------------------------------------------
# subcommands


def _cmd_rank(args) -> int:
    graph = _load_graph(args.graph)
    D = _load_divisor(graph, args.divisor, args.pluricanonical)
    _emit({"degree": D.degree(), "rank": chipfire.rank(D)}, args)
    return 0


def _cmd_reduce(args) -> int:
    graph = _load_graph(args.graph)
    D = _load_divisor(graph, args.divisor, args.pluricanonical)
    x = _parse_point(graph, args.at)
    res = chipfire.reduce(D, x)
    _emit(
        {
            "base": serialize.point_to_dict(x),
            "reduced": serialize.divisor_to_list(res.divisor),
            "min_slopes": [
                {
                    "edge": d.edge,
                    "anchor": format_rational(d.anchor),
                    "sign": d.sign,
                    "slope": s,
                }
                for d, s in res.slopes.slopes.items()
            ],
        },
        args,
    )
    return 0


def _cmd_locus(args) -> int:
    graph = _load_graph(args.graph)
    wl = _compute_locus(graph, args)
    _emit(serialize.locus_to_dict(wl), args)
    return 0


def _cmd_weights(args) -> int:
    graph = _load_graph(args.graph)
    wl = _compute_locus(graph, args)
    _emit(
        {
            "weights": [
                {**serialize.subset_to_dict(c.region), "weight": c.weight}
                for c in wl.components
            ],
            "total": wl.total(),
            "expected_total": wl.degree - wl.rank + wl.rank * wl.genus,
        },
        args,
    )
    return 0


def _cmd_measure(args) -> int:
    graph = _load_graph(args.graph)
    D = _load_divisor(graph, args.divisor, args.pluricanonical)
    try:
        A = serialize.subset_from_dict(graph, _load_json(args.set))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid subset file {args.set}: {exc}") from exc
    value = weierstrass.measure(D, A)
    _emit({"measure": value}, args)
    return 0


def _cmd_verify(args) -> int:
    graph = _load_graph(args.graph)
    D = _load_divisor(graph, args.divisor, args.pluricanonical)
    try:
        report = weierstrass.verify_identities(D)
    except AssertionError as exc:
        _emit({"ok": False, "error": str(exc)}, args)
        return 1
    _emit(
        {
            "ok": report.all_ok(),
            "total": report.locus.total(),
            "total_identity": report.total_ok,
            "positivity": report.positivity_ok,
            "forest_complement": report.forest_ok,
            "measure_additivity": report.measure_ok,
        },
        args,
    )
    return 0


def _load_slopes(graph: MetricGraph, path: str) -> clls.SlopeStructure:
    try:
        return serialize.slopes_from_dict(graph, _load_json(path))
    except (KeyError, TypeError, ValueError, TropwsError) as exc:
        raise InputError(f"invalid slope file {path}: {exc}") from exc


def _cmd_clls(args) -> int:
    graph = _load_graph(args.graph)
    D = _load_divisor(graph, args.divisor, args.pluricanonical)
    S = _load_slopes(graph, args.slopes)
    W, prof = clls.clls_divisor(S, D)
    _emit(
        {
            "rank": S.rank,
            "weierstrass_divisor": serialize.divisor_to_list(W.divisor),
            "degree": W.degree(),
            "effective": W.is_effective(),
            "ramification": [
                {
                    "at": serialize.point_to_dict(p),
                    "sequences": [list(seq) for seq in seqs],
                }
                for p, seqs in sorted(
                    prof.sequences.items(), key=lambda kv: repr(kv[0])
                )
                if any(any(seq) for seq in seqs)
            ],
        },
        args,
    )
    return 0


def _cmd_obstruct(args) -> int:
    graph = _load_graph(args.graph)
    D = _load_divisor(graph, args.divisor, args.pluricanonical)
    S = _load_slopes(graph, args.slopes)
    report = clls.realizability_obstructions(S, D)
    _emit(
        {
            "effective": report.effective,
            "principal": report.principal,
            "obstructions": report.obstructions(),
        },
        args,
    )
    if args.strict and report.obstructions():
        return 1
    return 0


def _scan_chunk(payload) -> List[Dict]:
    kwargs, indices = payload
    return [_scan_one(kwargs, i) for i in indices]


def _scan_one(kwargs, index: int) -> Dict:
    rng = oracle._instance_rng(kwargs["seed"], index)
    if kwargs["family"] == "regular":
        G = oracle.random_regular(kwargs["n"], kwargs["degree"], rng)
    else:
        G = oracle.erdos_renyi(kwargs["n"], kwargs["p"], rng)
    weights = oracle.vertex_weights(G)
    ordered = [weights[v] for v in G.vertices]
    return {
        "seed_index": index,
        "n": len(G.vertices),
        "m": len(G.edges),
        "genus": G.genus(),
        "wp_free": all(w <= 0 for w in ordered),
        "vertex_weights": ordered,
    }


def _cmd_scan(args) -> int:
    if args.family == "erdos_renyi" and args.p is None:
        raise InputError("--family erdos_renyi requires --p")
    kwargs = {
        "seed": args.seed,
        "n": args.size,
        "family": args.family,
        "degree": args.degree,
        "p": parse_rational(args.p) if args.p is not None else None,
    }
    indices = list(range(args.count))
    if args.jobs > 1:
        chunks = [
            (kwargs, indices[k :: args.jobs]) for k in range(args.jobs)
        ]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = [r for chunk in pool.map(_scan_chunk, chunks) for r in chunk]
        results.sort(key=lambda r: r["seed_index"])
    else:
        results = [_scan_one(kwargs, i) for i in indices]
    for rec in results:
        sys.stdout.write(json.dumps(rec) + "\n")
    return 0


def _cmd_export_plot(args) -> int:
    graph = _load_graph(args.graph)
    wl = _compute_locus(graph, args)
    svg = render_svg(graph, wl)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(svg)
    else:
        sys.stdout.write(svg)
    return 0


# ----------------------------------------------------------------------
# SVG rendering


def _layout(graph: MetricGraph) -> Dict[object, tuple]:
    """Deterministic circular layout."""
    import math

    vs = sorted(graph.vertex_ids, key=repr)
    n = len(vs)
    R = 160.0
    return {
        v: (
            250.0 + R * math.cos(2 * math.pi * i / n - math.pi / 2),
            250.0 + R * math.sin(2 * math.pi * i / n - math.pi / 2),
        )
        for i, v in enumerate(vs)
    }


def _edge_curve(graph: MetricGraph, positions, eid) -> tuple:
    """Cubic bezier control points (p0, c1, c2, p1) of the drawn edge."""
    e = graph.edges[eid]
    (x0, y0), (x1, y1) = positions[e.ends[0]], positions[e.ends[1]]
    siblings = sorted(
        f.id for f in graph.edges.values() if set(f.ends) == set(e.ends)
    )
    k = siblings.index(eid)
    if e.is_loop:
        reach = 90.0 + 55.0 * k
        return (
            (x0, y0),
            (x0 - reach * 0.7, y0 - reach),
            (x0 + reach * 0.7, y0 - reach),
            (x1, y1),
        )
    bend = (k - (len(siblings) - 1) / 2) * 55.0
    dx, dy = x1 - x0, y1 - y0
    norm = (dx * dx + dy * dy) ** 0.5 or 1.0
    ox, oy = -dy / norm * bend, dx / norm * bend
    return (
        (x0, y0),
        (x0 + dx / 3 + ox, y0 + dy / 3 + oy),
        (x0 + 2 * dx / 3 + ox, y0 + 2 * dy / 3 + oy),
        (x1, y1),
    )


def _bezier_point(curve, t: float) -> tuple:
    p0, c1, c2, p1 = curve
    s = 1.0 - t
    return (
        s**3 * p0[0] + 3 * s * s * t * c1[0] + 3 * s * t * t * c2[0]
        + t**3 * p1[0],
        s**3 * p0[1] + 3 * s * s * t * c1[1] + 3 * s * t * t * c2[1]
        + t**3 * p1[1],
    )


def _blossom(curve, t1: float, t2: float, t3: float) -> tuple:
    p0, c1, c2, p1 = curve

    def axis(i):
        e1 = (t1 + t2 + t3) / 3
        e2 = (t1 * t2 + t1 * t3 + t2 * t3) / 3
        e3 = t1 * t2 * t3
        return (
            p0[i] * (1 - 3 * e1 + 3 * e2 - e3)
            + 3 * c1[i] * (e1 - 2 * e2 + e3)
            + 3 * c2[i] * (e2 - e3)
            + p1[i] * e3
        )

    return (axis(0), axis(1))


def _bezier_split(curve, t0: float, t1: float) -> tuple:
    """Control points of the sub-arc [t0, t1] of a cubic bezier (via the
    polar form: the sub-curve controls are blossom values)."""
    return (
        _blossom(curve, t0, t0, t0),
        _blossom(curve, t0, t0, t1),
        _blossom(curve, t0, t1, t1),
        _blossom(curve, t1, t1, t1),
    )


def render_svg(graph: MetricGraph, wl: Optional[weierstrass.WLocus] = None) -> str:
    """A static drawing of the graph with locus components highlighted."""
    positions = _layout(graph)
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="500" height="500" '
        'viewBox="0 0 500 500">',
        '<rect width="500" height="500" fill="white"/>',
    ]
    for eid in sorted(graph.edges, key=repr):
        p0, c1, c2, p1 = _edge_curve(graph, positions, eid)
        parts.append(
            f'<path d="M {p0[0]:.2f} {p0[1]:.2f} C {c1[0]:.2f} {c1[1]:.2f} '
            f'{c2[0]:.2f} {c2[1]:.2f} {p1[0]:.2f} {p1[1]:.2f}" '
            'stroke="black" fill="none" stroke-width="1.5"/>'
        )
    locus_vertices = set()
    if wl is not None:
        for comp in wl.components:
            locus_vertices |= set(comp.region.vertices)
            for eid, ivals in comp.region.intervals.items():
                e = graph.edges[eid]
                curve = _edge_curve(graph, positions, eid)
                for a, b in ivals:
                    t0, t1 = float(a / e.length), float(b / e.length)
                    if t0 == t1:
                        x, y = _bezier_point(curve, t0)
                        parts.append(
                            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="5" '
                            'fill="red"/>'
                        )
                        continue
                    q0, q1, q2, q3 = _bezier_split(curve, t0, t1)
                    parts.append(
                        f'<path d="M {q0[0]:.2f} {q0[1]:.2f} C {q1[0]:.2f} '
                        f'{q1[1]:.2f} {q2[0]:.2f} {q2[1]:.2f} {q3[0]:.2f} '
                        f'{q3[1]:.2f}" stroke="red" fill="none" '
                        'stroke-width="5" stroke-opacity="0.55" '
                        'stroke-linecap="round"/>'
                    )
    for v in sorted(graph.vertex_ids, key=repr):
        x, y = positions[v]
        color = "red" if v in locus_vertices else "black"
        parts.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="5" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{x + 8:.2f}" y="{y - 8:.2f}" font-size="13" '
            f'font-family="sans-serif">{v}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


# ----------------------------------------------------------------------
# argument parsing


def _add_divisor_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--divisor",
        default="canonical",
        help="divisor file, or 'canonical' (default)",
    )
    p.add_argument(
        "--pluricanonical",
        type=int,
        default=1,
        metavar="N",
        help="use N*K instead of K (with --divisor canonical)",
    )


def _add_series_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--series",
        choices=["complete", "generic", "canonical"],
        default="complete",
        help="linear series variant (augmented graphs)",
    )
    p.add_argument(
        "--b-modified",
        action="store_true",
        dest="b_modified",
        help="use the b-modified weights (complete series only)",
    )


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="tropws",
        description="Exact tropical Weierstrass loci on metric graphs.",
    )
    top.add_argument("--float", action="store_true",
                     help="add decimal companions to rational outputs")
    sub = top.add_subparsers(dest="command", required=True)

    def cmd(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--float", action="store_true")
        return p

    p = cmd("rank", _cmd_rank, help="rank of a divisor")
    p.add_argument("graph")
    _add_divisor_flags(p)

    p = cmd("reduce", _cmd_reduce, help="reduced divisor at a base point")
    p.add_argument("graph")
    _add_divisor_flags(p)
    p.add_argument("--at", required=True, metavar="POINT",
                   help="vertex id, or edge:offset")

    for name, fn in (("locus", _cmd_locus), ("weights", _cmd_weights)):
        p = cmd(name, fn, help=f"weierstrass {name}")
        p.add_argument("graph")
        _add_divisor_flags(p)
        _add_series_flags(p)
        p.add_argument("--jobs", type=int, default=1)

    p = cmd("measure", _cmd_measure, help="weierstrass measure of a subset")
    p.add_argument("graph")
    _add_divisor_flags(p)
    p.add_argument("--set", required=True, help="subset file")

    p = cmd("verify", _cmd_verify, help="check the weight identities")
    p.add_argument("graph")
    _add_divisor_flags(p)

    for name, fn in (("clls", _cmd_clls), ("obstruct", _cmd_obstruct)):
        p = cmd(name, fn, help=f"slope-structure {name}")
        p.add_argument("graph")
        _add_divisor_flags(p)
        p.add_argument("--slopes", required=True, help="slope-structure file")
        p.add_argument("--strict", action="store_true")

    p = cmd("scan", _cmd_scan, help="random-graph vertex-Weierstrass scan")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--size", type=int, required=True, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family", choices=["regular", "erdos_renyi"],
                   default="regular")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--p", default=None, help="edge probability (rational)")
    p.add_argument("--jobs", type=int, default=1)

    p = cmd("export-plot", _cmd_export_plot, help="render locus as SVG")
    p.add_argument("graph")
    _add_divisor_flags(p)
    _add_series_flags(p)
    p.add_argument("--output", "-o", default=None)

    return top


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TropwsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
