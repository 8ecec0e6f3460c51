"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors -> 1, :class:`DataError`
-> 2, :class:`NumericalError` (and subclasses) -> 3.
"""


class TsindepError(Exception):
    """Base class for all package errors."""


class DataError(TsindepError):
    """Malformed, inconsistent or non-finite input data."""


class NumericalError(TsindepError):
    """A numerical procedure failed (singularity, non-convergence, ...)."""


class SingularityError(NumericalError):
    """A matrix that must be inverted is (numerically) singular."""


class FitError(NumericalError):
    """Model estimation did not produce a usable parameter vector."""


class BoundaryError(FitError):
    """The optimizer returned a boundary solution (e.g. alpha + beta ~ 1)."""


class BootstrapError(NumericalError):
    """Too many bootstrap replicates failed to complete."""
