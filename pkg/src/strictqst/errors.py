"""Exception types shared across the package."""


class StrictQstError(Exception):
    """Base class for all package errors."""


class NotHermitian(StrictQstError):
    """Input matrix is not Hermitian within the configured tolerance."""


class NotPure(StrictQstError):
    """A pure state was required but the input has rank > 1."""


class BadRank(StrictQstError):
    """Requested rank is outside 1..dim."""


class DimensionMismatch(StrictQstError):
    """Operands live in different Hilbert-space dimensions."""


class Infeasible(StrictQstError):
    """No PSD matrix satisfies the data constraint within tolerance."""
