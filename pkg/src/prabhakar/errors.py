"""Exception and warning types shared by the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class EnvelopeError(DomainError):
    """The Mittag-Leffler argument leaves the range where the series is reliable."""


class SingularStepError(ArithmeticError):
    """The implicit diagonal coefficient of a Volterra step vanished."""


class ConvergenceWarning(RuntimeWarning):
    """A truncated series hit its term cap before meeting its stopping rule."""


class GridWarning(UserWarning):
    """A quadrature grid is too coarse for the requested evaluation."""
