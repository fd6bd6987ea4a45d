"""Exception types shared across the package."""


class HankelPathError(Exception):
    """Base class for all package errors."""


class StructureError(HankelPathError, ValueError):
    """Input has a shape the symmetric Hankel map cannot handle."""


class ValidationError(HankelPathError, ValueError):
    """A value violates a documented precondition."""


class NumericalError(HankelPathError, ArithmeticError):
    """An iterative routine diverged or produced non-finite values."""


class OracleError(HankelPathError):
    """The brute-force oracle failed to certify its own answer."""


class PathError(HankelPathError):
    """The gridding loop could not complete.

    ``partial`` carries whatever :class:`~hankelpath.path.PathResult` was
    assembled before the failure.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
