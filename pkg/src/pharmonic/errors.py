"""Exception hierarchy shared by all analysis modules."""


class PharmonicError(Exception):
    """Base class for all library errors."""


class InvalidConfig(PharmonicError):
    """A config file or parameter block failed validation."""


class NonPositiveWeight(PharmonicError):
    """A weight evaluated to a negative value, or to zero at an
    undeclared point."""


class ToleranceNotMet(PharmonicError):
    """Adaptive refinement exhausted its budget before reaching the
    requested tolerance, or a tail heuristic could not decide."""


class DegenerateInterval(PharmonicError):
    """An interval with zero or negative length was supplied."""


class EmptyFamily(PharmonicError):
    """An operation over a family of intervals or balls received none."""


class DomainMismatch(PharmonicError):
    """A function was queried outside its stated domain."""


class UnknownVertex(PharmonicError):
    """A vertex index or name is not part of the graph."""


class UnknownCenter(PharmonicError):
    """A ball center is neither a vertex nor a valid edge point."""


class NoBoundary(PharmonicError):
    """A connected component has no boundary vertex and was not flagged
    free."""


class NonConvergence(PharmonicError):
    """The solver exhausted its sweep budget."""


class InsufficientRadii(PharmonicError):
    """Too few radii for a growth fit."""


class EmptyAnnulus(PharmonicError):
    """The requested annulus contains no sample points of the space."""


class DegenerateSupport(PharmonicError):
    """A perturbation support has no boundary in its component."""


class ZeroRadius(PharmonicError):
    """A ball of nonpositive radius was supplied."""


class InternalInvariantViolation(PharmonicError):
    """A self-check failed; indicates a bug, reported with exit code 3."""
