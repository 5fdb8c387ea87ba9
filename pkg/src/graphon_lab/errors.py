"""Semantic exception hierarchy for graphon_lab."""


class GraphonLabError(Exception):
    """Base class for all graphon_lab errors."""


class DomainError(GraphonLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class OutOfDomain(GraphonLabError):
    """Assembled parameters left the admissible box [0,1] (or c left (0,1))."""


class NoRootInBracket(GraphonLabError):
    """The constraint equation for the pode size c has no admissible root."""


class DegeneratePode(GraphonLabError):
    """Discretization collapsed a pode to zero rows."""


class NotNegativeDefinite(GraphonLabError):
    """A model curvature matrix failed its negative-definiteness check."""


class MaxIterExceeded(GraphonLabError):
    """Iteration budget exhausted before reaching the gradient tolerance."""


class RegionViolation(GraphonLabError):
    """An iterate left the configured trust region around the expected optimum."""


class ConstraintInfeasible(GraphonLabError):
    """The grid optimizer could not meet the density constraints to tolerance."""
