"""Exception hierarchy shared by every cartier_lab module.

The CLI maps these onto process exit codes: ValidationError -> 2,
NonStabilized -> 3, InvariantViolation -> 4.
"""


class CartierLabError(Exception):
    """Base class for all package errors."""


class ValidationError(CartierLabError):
    """Input data violates a documented precondition or consistency law."""


class ParseError(ValidationError):
    """Malformed polynomial / element string.  Carries a position."""

    def __init__(self, message, text=None, pos=None):
        self.text = text
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos}: {text!r})"
        super().__init__(message)


class ContextMismatchError(ValidationError):
    """Operands built over different FrobeniusContexts or rings."""


class UnsupportedRingError(ValidationError):
    """Operation requested over a ring shape the package does not support."""


class CapExceeded(ValidationError):
    """A documented size cap (variables, degree, rank) was exceeded."""


class NonStabilized(CartierLabError):
    """An iterative chain hit its iteration cap before stabilizing.

    ``partial`` holds whatever prefix of the chain was computed, so callers
    can report it.
    """

    def __init__(self, message, partial=None, cap=None):
        super().__init__(message)
        self.partial = partial
        self.cap = cap


class InvariantViolation(CartierLabError):
    """An internal cross-check failed: indicates a bug, not bad input."""


class CertificateFailed(CartierLabError):
    """A post-hoc certificate check on a computed object did not hold."""
