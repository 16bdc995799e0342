"""Exception taxonomy shared by every module.

The command-line layer maps these onto process exit codes: validation
problems exit with 2, numerical failures with 3, and file-system
problems with 4.
"""


class TrialDesignError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TrialDesignError):
    """Invalid parameters, specs, or input data."""


class InvalidParameterError(ValidationError):
    """A scalar argument lies outside its documented domain."""


class HypothesisOrderingError(ValidationError):
    """hr1 >= hr0, but the alternative must name the smaller hazard ratio."""


class InfeasibleGrayZoneError(ValidationError):
    """alpha + eta > 1 or beta + pi > 1 gives the gray zone negative mass."""


class DataError(ValidationError):
    """Patient-level data cannot support the requested statistic."""


class DataFormatError(DataError):
    """A delimited input file is malformed; messages carry line numbers."""


class UndefinedStatisticError(DataError):
    """An analysis window holds no events, so the statistic is undefined."""


class DegenerateRiskSetError(DataError):
    """Every event has a single-arm risk set, so the variance term is zero."""


class InfeasibleScenarioError(ValidationError):
    """A simulation scenario can never accumulate the requested events."""


class NumericalError(TrialDesignError):
    """A numerical procedure failed to deliver the requested accuracy."""


class ConvergenceError(NumericalError):
    """Quadrature exhausted its subdivision budget before the tolerance.

    The best available estimate is kept on the exception so callers can
    inspect how far the integrator got.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class BracketingError(NumericalError):
    """Root finding was handed a bracket without a sign change."""


class InfeasibilityError(NumericalError):
    """No solution exists within the searched range."""
