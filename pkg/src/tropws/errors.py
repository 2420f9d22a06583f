"""Exception types shared across the library."""


class TropwsError(Exception):
    """Base class for all domain errors raised by this library."""


class DisconnectedGraph(TropwsError):
    """The input graph is not connected."""


class NonPositiveLength(TropwsError):
    """An edge was given a length that is not strictly positive."""


class DuplicateId(TropwsError):
    """A vertex or edge identifier occurs more than once."""


class EmptySubset(TropwsError):
    """An operation requiring a nonempty subset received an empty one."""


class NegativeRank(TropwsError):
    """An operation requiring a divisor of non-negative rank received one of rank -1."""


class CertificateFailure(TropwsError):
    """Locus refinement exhausted its resolution budget without the
    total-weight certificate passing exactly."""


class BoundaryInsideLocus(TropwsError):
    """A weight was requested for a subset whose boundary meets the
    interior of a locus component."""


class NotMeasurable(TropwsError):
    """A locus component straddles the boundary of the queried subset."""


class SlopeCountMismatch(TropwsError):
    """A slope-structure segment does not carry exactly r + 1 slopes."""


class PairingViolation(TropwsError):
    """Opposite orientations of a slope-structure segment do not satisfy
    s_j + s'_{r-j} = 0."""


class BreakpointMismatch(TropwsError):
    """Slope-structure breakpoints are inconsistent with the edge length
    or between the two orientations."""


class InvalidStructure(TropwsError):
    """A slope structure is malformed beyond the specific errors above."""


class DegenerateFamily(TropwsError):
    """A random-graph family cannot produce valid (connected) samples."""


class SubdivisionLimitExceeded(TropwsError):
    """Unit subdivision of a metric graph would exceed the configured cap
    (environment variable TROPWS_MAX_SUBDIVISION)."""
