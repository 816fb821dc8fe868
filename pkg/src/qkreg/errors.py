"""Exception hierarchy shared by every module."""


class QKernelError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QKernelError, ValueError):
    """An argument lies outside the domain of the function."""


class ParameterError(QKernelError, ValueError):
    """A tuning constant violates a documented constraint."""


class DivergentSeries(QKernelError, ArithmeticError):
    """The requested series does not converge at this argument."""


class TruncationIncomplete(QKernelError, ArithmeticError):
    """A series or Jackson sum hit ``max_terms`` before reaching ``tol``.

    The partial value and the number of terms used are kept on the
    exception so callers can decide whether the result is still usable.
    """

    def __init__(self, message, value=float("nan"), terms_used=0):
        super().__init__(message)
        self.value = value
        self.terms_used = terms_used


class NonFiniteEvaluation(QKernelError, ArithmeticError):
    """The integrand returned inf or nan on the Jackson grid."""


class PositivityViolation(QKernelError):
    """A kernel took a negative value on its validation grid."""


class DegenerateVariance(QKernelError, ArithmeticError):
    """A variance in a denominator is zero or underflowed."""


class InvalidDensity(QKernelError, ValueError):
    """A density does not carry unit Jackson mass or is negative."""
