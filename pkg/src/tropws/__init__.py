"""Exact-arithmetic chip-firing and tropical Weierstrass loci on (augmented)
metric graphs."""

from .errors import TropwsError
from .graph_core import ClosedSubset, Divisor, MetricGraph, Point
from .chipfire import rank, reduce
from .weierstrass import (
    b_modified_locus,
    b_parameter,
    is_weierstrass,
    locus,
    measure,
    verify_identities,
    weight,
)
from .augmented import canonical_locus, generic_view

__version__ = "0.1.0"

__all__ = [
    "TropwsError",
    "ClosedSubset",
    "Divisor",
    "MetricGraph",
    "Point",
    "rank",
    "reduce",
    "locus",
    "weight",
    "measure",
    "b_parameter",
    "b_modified_locus",
    "is_weierstrass",
    "verify_identities",
    "canonical_locus",
    "generic_view",
    "__version__",
]
