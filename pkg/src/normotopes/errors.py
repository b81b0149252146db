"""Exception types shared across the toolkit."""


class NormotopeError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(NormotopeError, ValueError):
    """Operands have incompatible shapes."""


class CornerBudgetExceeded(NormotopeError, RuntimeError):
    """Enumerating interval-matrix corners would exceed the configured cap.

    The caller must coarsen the instance or reject it; corners are never
    dropped silently.
    """


class SingularShape(NormotopeError, RuntimeError):
    """Shape matrix is singular or too ill-conditioned to invert."""


class UnsupportedKind(NormotopeError, ValueError):
    """Operation is not defined for this norm kind."""


class DimensionTooLarge(NormotopeError, ValueError):
    """Operation would blow up combinatorially at this dimension."""


class AnchorOutsideBox(NormotopeError, ValueError):
    """Expansion anchor must lie inside the enclosing box."""


class BackwardPassDiverged(NormotopeError, RuntimeError):
    """Riccati sweep produced non-finite values."""
