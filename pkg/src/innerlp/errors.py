"""Exception types raised across the package."""


class InnerLPError(Exception):
    """Base class for all package errors."""


class DimensionError(InnerLPError, ValueError):
    """Operands have incompatible shapes."""


class InfeasibleError(InnerLPError):
    """The problem is infeasible by inspection (bounds or zero rows)."""


class MpsParseError(InnerLPError):
    """Malformed MPS input; ``lineno`` is 1-based, or None for end-of-file errors."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class IndefiniteMatrixError(InnerLPError, ValueError):
    """A pivot below ``-drop_tol`` was met during LDLT factorization."""


class InteriorError(InnerLPError, ValueError):
    """An iterate that must be strictly positive is not."""
