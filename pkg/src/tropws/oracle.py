"""Independent chip-firing engine on finite unit-length graphs.

This module re-implements divisor reduction and rank on combinatorial
(multi)graphs from scratch — integer chip counts on vertices, discrete Dhar
burning, Baker-Norine rank by recursion — so that the metric engine in
``chipfire`` can be cross-validated on unit subdivisions.  It also drives the
random-graph scan that counts graphs whose vertices are all
non-Weierstrass.

Conventions match the metric side: div(f)(v) = sum over neighbours u of
f(v) - f(u) (the graph Laplacian), so the reduction function has a local
maximum at the base vertex.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from math import gcd
from typing import Dict, List, Sequence, Tuple

from .errors import DegenerateFamily, SubdivisionLimitExceeded
from .graph_core import Divisor, MetricGraph

_MAX_ROUNDS = 1_000_000
_DEFAULT_SUBDIVISION_CAP = 100_000


def subdivision_cap() -> int:
    raw = os.environ.get("TROPWS_MAX_SUBDIVISION")
    return int(raw) if raw else _DEFAULT_SUBDIVISION_CAP


class CombGraph:
    """A connected loopless multigraph, all edges of unit length."""

    def __init__(self, vertices: Sequence, edges: Sequence[Tuple]):
        self.vertices = list(vertices)
        self.edges = [(u, v) for u, v in edges]
        index = {v: i for i, v in enumerate(self.vertices)}
        if len(index) != len(self.vertices):
            raise ValueError("duplicate vertex id")
        self.adj: Dict[object, List[object]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            if u == v:
                raise ValueError(
                    "loop edges are not supported; subdivide them first"
                )
            self.adj[u].append(v)
            self.adj[v].append(u)
        if not self._connected():
            raise ValueError("graph is not connected")

    def _connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for u in self.adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(self.vertices)

    def valence(self, v) -> int:
        return len(self.adj[v])

    def genus(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def canonical_divisor(self) -> Dict[object, int]:
        return {v: self.valence(v) - 2 for v in self.vertices}

    def to_metric(self) -> MetricGraph:
        return MetricGraph(
            [(v, 0) for v in self.vertices],
            [(f"e{i}", ends, 1) for i, ends in enumerate(self.edges)],
        )


def unit_subdivision(graph: MetricGraph) -> Tuple[CombGraph, int]:
    """The combinatorial graph obtained by cutting every edge into unit
    pieces of length 1/N, for N the lcm of the length denominators (doubled
    when needed to keep loops subdivided).  Returns (graph, N); original
    vertices keep their ids, interior nodes are named (edge id, k)."""
    N = 1
    for e in graph.edges.values():
        den = e.length.denominator
        N = N * den // gcd(N, den)
    if any(e.is_loop and e.length * N == 1 for e in graph.edges.values()):
        N *= 2
    total = sum(int(e.length * N) for e in graph.edges.values())
    if total > subdivision_cap():
        raise SubdivisionLimitExceeded(
            f"unit subdivision needs {total} edges, cap is {subdivision_cap()}"
        )
    vertices: List[object] = list(graph.vertex_ids)
    edges: List[Tuple] = []
    for e in graph.edges.values():
        pieces = int(e.length * N)
        chain: List[object] = [e.ends[0]]
        for k in range(1, pieces):
            node = (e.id, k)
            vertices.append(node)
            chain.append(node)
        chain.append(e.ends[1])
        edges.extend(zip(chain, chain[1:]))
    return CombGraph(vertices, edges), N


@dataclass
class DiscreteReduceResult:
    divisor: Dict[object, int]
    fn: Dict[object, int]  # integer values, fn[base] = 0


def discrete_reduce(G: CombGraph, D: Dict[object, int], q) -> DiscreteReduceResult:
    """The q-reduced divisor equivalent to D, with the witnessing function."""
    d = {v: 0 for v in G.vertices}
    for v, c in D.items():
        d[v] += c
    f = {v: 0 for v in G.vertices}

    # phase 1: clear negative coefficients away from q by firing nested sets
    # of the breadth-first order.
    order = [q]
    seen = {q}
    qi = 0
    while qi < len(order):
        v = order[qi]
        qi += 1
        for u in G.adj[v]:
            if u not in seen:
                seen.add(u)
                order.append(u)
    pos = {v: i for i, v in enumerate(order)}
    for i in range(len(order) - 1, 0, -1):
        target = order[i]
        if d[target] >= 0:
            continue
        inside = set(order[:i])
        gain = sum(1 for u in G.adj[target] if u in inside)
        times = (-d[target] + gain - 1) // gain
        for v in inside:
            out = sum(1 for u in G.adj[v] if u not in inside)
            d[v] -= times * out
            f[v] -= times
        for v in order[i:]:
            into = sum(1 for u in G.adj[v] if u in inside)
            d[v] += times * into
        assert d[target] >= 0

    # phase 2: discrete Dhar with multi-firing.
    for _round in range(_MAX_ROUNDS):
        burnt = {q}
        stack = [q]
        incoming = {v: 0 for v in G.vertices}
        while stack:
            v = stack.pop()
            for u in G.adj[v]:
                if u in burnt:
                    continue
                incoming[u] += 1
                if incoming[u] > d[u]:
                    burnt.add(u)
                    stack.append(u)
        if len(burnt) == len(G.vertices):
            break
        unburnt = [v for v in G.vertices if v not in burnt]
        outdeg = {
            v: sum(1 for u in G.adj[v] if u in burnt) for v in unburnt
        }
        k = min(d[v] // outdeg[v] for v in unburnt if outdeg[v] > 0)
        assert k >= 1, "Dhar invariant violated"
        for v in unburnt:
            d[v] -= k * outdeg[v]
            f[v] -= k
            for u in G.adj[v]:
                if u in burnt:
                    d[u] += k
    else:  # pragma: no cover - safety net
        raise RuntimeError("discrete Dhar did not terminate")

    shift = f[q]
    return DiscreteReduceResult(d, {v: x - shift for v, x in f.items()})


def _reduced_key(G: CombGraph, D: Dict[object, int], q) -> Tuple:
    red = discrete_reduce(G, D, q).divisor
    return tuple(red[v] for v in G.vertices)


def bn_rank(G: CombGraph, D: Dict[object, int]) -> int:
    """Baker-Norine rank of a vertex-supported divisor (>= -1).

    Degrees above 2g - 2 use r = d - g; degrees above g - 1 flip through
    Riemann-Roch; the rest recurse on r(D) = 1 + min_v r(D - (v)), memoized
    on the reduced form.
    """
    g = G.genus()
    q = G.vertices[0]
    K = G.canonical_divisor()
    cache: Dict[Tuple, int] = {}

    def rank_of(d: Dict[object, int]) -> int:
        deg = sum(d.values())
        if deg < 0:
            return -1
        if deg > 2 * g - 2:
            return deg - g
        if deg > g - 1:
            flipped = {v: K.get(v, 0) - d.get(v, 0) for v in G.vertices}
            return deg - g + 1 + rank_of(flipped)
        key = _reduced_key(G, d, q)
        if key in cache:
            return cache[key]
        red = dict(zip(G.vertices, key))
        if red[q] < 0:
            r = -1
        else:
            r = 1 + min(
                rank_of({**red, v: red[v] - 1}) for v in G.vertices
            )
        cache[key] = r
        return r

    return rank_of(dict(D))


def edge_interior_weight(
    G: CombGraph, D: Dict[object, int], r: int, e: Tuple
) -> int:
    """Weierstrass weight carried by the open interior of the edge e = (u, v)
    in the unit-length metric realization: r minus the slope at v toward u
    of any f with div(f) = D_u - D_v."""
    u, v = e
    fu = discrete_reduce(G, D, u).fn
    fv = discrete_reduce(G, D, v).fn
    slope = (fu[u] - fv[u]) - (fu[v] - fv[v])
    return r - slope


def vertex_weights(G: CombGraph) -> Dict[object, int]:
    """K_v(v) - (g - 1) for every vertex; positive exactly at the
    Weierstrass vertices of the canonical divisor."""
    g = G.genus()
    K = G.canonical_divisor()
    return {
        v: discrete_reduce(G, K, v).divisor[v] - (g - 1) for v in G.vertices
    }


def is_vertex_weierstrass_free(G: CombGraph) -> bool:
    return all(w <= 0 for w in vertex_weights(G).values())


# ----------------------------------------------------------------------
# random families and the scan


def random_regular(n: int, degree: int, rng: random.Random,
                   tries: int = 1000) -> CombGraph:
    """Simple connected regular graph via the configuration model with
    rejection of loops, parallel edges, and disconnected samples."""
    if n * degree % 2 != 0 or degree >= n or degree < 1:
        raise DegenerateFamily(
            f"no simple {degree}-regular graph on {n} vertices"
        )
    for _ in range(tries):
        stubs = [v for v in range(n) for _ in range(degree)]
        rng.shuffle(stubs)
        pairs = list(zip(stubs[::2], stubs[1::2]))
        if any(u == v for u, v in pairs):
            continue
        if len({frozenset(p) for p in pairs}) != len(pairs):
            continue
        try:
            return CombGraph(list(range(n)), pairs)
        except ValueError:
            continue
    raise DegenerateFamily(
        f"configuration model produced no valid sample in {tries} tries"
    )


def erdos_renyi(n: int, p, rng: random.Random,
                tries: int = 1000) -> CombGraph:
    for _ in range(tries):
        edges = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < p
        ]
        try:
            return CombGraph(list(range(n)), edges)
        except ValueError:
            continue
    raise DegenerateFamily(
        f"no connected Erdos-Renyi sample in {tries} tries"
    )


def _instance_rng(seed: int, index: int) -> random.Random:
    # string seeding hashes the text, so streams for different indices are
    # independent and reproducible regardless of evaluation order
    return random.Random(f"{seed}:{index}")


@dataclass
class ScanRecord:
    seed_index: int
    n: int
    m: int
    genus: int
    wp_free: bool
    vertex_weights: List[int]

    def as_dict(self) -> Dict:
        return {
            "seed_index": self.seed_index,
            "n": self.n,
            "m": self.m,
            "genus": self.genus,
            "wp_free": self.wp_free,
            "vertex_weights": self.vertex_weights,
        }


def scan_vertex_weierstrass(
    count: int,
    n: int,
    seed: int,
    family: str = "regular",
    degree: int = 3,
    p=None,
) -> List[ScanRecord]:
    """Sample ``count`` random graphs and report, per graph, whether no
    vertex is a Weierstrass point of the canonical divisor.  Records are a
    pure function of (parameters, seed)."""
    records = []
    for i in range(count):
        rng = _instance_rng(seed, i)
        if family == "regular":
            G = random_regular(n, degree, rng)
        elif family == "erdos_renyi":
            if p is None:
                raise ValueError("erdos_renyi family needs p")
            G = erdos_renyi(n, p, rng)
        else:
            raise ValueError(f"unknown family {family!r}")
        weights = vertex_weights(G)
        ordered = [weights[v] for v in G.vertices]
        records.append(
            ScanRecord(
                seed_index=i,
                n=len(G.vertices),
                m=len(G.edges),
                genus=G.genus(),
                wp_free=all(w <= 0 for w in ordered),
                vertex_weights=ordered,
            )
        )
    return records


# ----------------------------------------------------------------------
# cross-engine helpers


def metric_divisor_to_comb(
    D: Divisor, comb: CombGraph, N: int
) -> Dict[object, int]:
    """Transport a vertex-supported divisor to the unit subdivision."""
    out: Dict[object, int] = {}
    for p, c in D.coeffs.items():
        if p.is_vertex:
            out[p.vertex] = out.get(p.vertex, 0) + c
        else:
            k = p.offset * N
            if k.denominator != 1:
                raise ValueError(f"{p!r} is not a subdivision node")
            out[(p.edge, int(k))] = out.get((p.edge, int(k)), 0) + c
    return out
