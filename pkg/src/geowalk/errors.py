"""Exception types raised by the library.

Plain ``ValueError`` is used for generic input mistakes (mismatched base
points, non-unit directions, malformed parameters).  The classes below mark
conditions with a specific geometric or statistical meaning that callers may
want to catch individually.
"""


class GeowalkError(Exception):
    """Base class for all library-specific errors."""


class AmbiguousCutLocusError(GeowalkError):
    """The target point is (numerically) on the cut locus of the base point,
    so the minimizing displacement is not unique."""


class ChartDomainError(GeowalkError):
    """Chart coordinates fall outside the domain of the sphere chart."""


class DegenerateAimError(GeowalkError):
    """An aiming direction is undefined because the anchor coincides with a
    trajectory breakpoint."""


class NotCriticalError(GeowalkError):
    """A fold certificate was requested at a configuration that is not a
    critical point of the endpoint map."""


class UnsupportedGeometryError(GeowalkError):
    """The requested operation needs linear structure the space lacks."""


class HypothesisViolatedError(GeowalkError):
    """A claim was queried outside the hypotheses under which it holds."""
