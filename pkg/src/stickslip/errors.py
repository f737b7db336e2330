"""Exception types shared across the package."""


class StickslipError(Exception):
    """Base class for all package errors."""


class PreconditionError(StickslipError, ValueError):
    """An operation was called on a system in the wrong dynamical regime."""


class NotSliding(PreconditionError):
    """The two one-sided fields do not form an attracting sliding region."""


class NotCrossing(PreconditionError):
    """Escape-time analysis needs a crossing configuration (both outer
    drifts of the same sign)."""


class NotNormalizable(PreconditionError):
    """The stationary density does not exist (the region is not attracting
    sliding, so probability leaks to infinity on at least one side)."""


class BadScales(PreconditionError):
    """The scale separation smoothing-width < escape-radius is violated."""


class DegenerateWell(StickslipError):
    """The two turning points bounding the potential well have (nearly)
    coalesced; the Laplace prefactor 1/sqrt(-A'(y1) A'(y2)) diverges."""


class QuadratureFailure(StickslipError):
    """Panel refinement did not converge to the requested tolerance."""
