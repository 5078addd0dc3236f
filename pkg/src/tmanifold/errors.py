"""Exception hierarchy.

Validation errors map to CLI exit code 2, numerical failures to exit code 3.
"""


class TManifoldError(Exception):
    """Base class for all package errors."""


class ValidationError(TManifoldError, ValueError):
    """Bad input detected before (or instead of) any numerical work."""


class NumericalError(TManifoldError, ArithmeticError):
    """A numerical precondition or algorithm failed."""


class ShapeMismatch(ValidationError):
    pass


class LabelMismatch(ValidationError):
    pass


class BadK(ValidationError):
    pass


class BadMagic(ValidationError):
    pass


class Truncated(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class SymmetryViolation(NumericalError):
    """A transform-domain tensor is not conjugate-symmetric.

    This points at an upstream bug rather than noisy data.
    """


class NotFSymmetric(NumericalError):
    pass


class SliceEigFailure(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class InsufficientNonzero(NumericalError):
    pass


class NotFOrthogonal(NumericalError):
    pass


class DegenerateDenominator(NumericalError):
    pass


class IllPosed(NumericalError):
    pass


class SingularDegree(NumericalError):
    pass


class SingularGram(NumericalError):
    pass


class NotConverged(NumericalError):
    """Newton iteration hit ``max_iter``; ``trace`` holds the partial history."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class EmptyNeighborhood(UserWarning):
    """Some vertex ended up without neighbours (epsilon rule)."""
