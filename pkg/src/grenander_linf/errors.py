"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConsistencyError(RuntimeError):
    """An internal identity that must hold by construction was violated."""


class PrecisionError(ValueError):
    """Not enough Monte Carlo data for the requested estimate."""


class FitError(ValueError):
    """A least-squares fit is ill-conditioned.

    Attributes
    ----------
    report : dict
        Diagnostics describing why the fit was rejected.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class DegenerateBandError(ValueError):
    """Derivative estimates make the band half-width undefined."""


class ConfigurationError(ValueError):
    """An experiment configuration is invalid or incomplete."""
