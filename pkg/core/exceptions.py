"""
Custom exceptions for levysim
"""


class LevySimError(Exception):
    """Base exception for levysim errors"""
    pass


class ValidationError(LevySimError, ValueError):
    """Raised when an argument fails validation"""
    pass


class ConfigurationError(LevySimError):
    """Raised when configuration is invalid or missing"""
    pass


class MeasureError(LevySimError):
    """Base exception for Lévy measure errors"""
    pass


class InfiniteMoment(MeasureError, ValueError):
    """Raised when a requested untruncated moment diverges"""
    pass


class DegenerateSmallJumps(MeasureError, ValueError):
    """Raised when there is no small-jump mass below the truncation level"""
    pass


class EmptyTail(MeasureError, ValueError):
    """Raised when sampling from a tail with zero mass"""
    pass


class IncrementError(LevySimError):
    """Base exception for increment generation errors"""
    pass


class InfiniteActivity(IncrementError, ValueError):
    """Raised when exact increments are requested for an infinite-activity measure"""
    pass


class NeedsFiniteSmallActivity(IncrementError, ValueError):
    """Raised when the small-jump sum cannot be simulated exactly"""
    pass


class SchemeError(LevySimError):
    """Base exception for Euler scheme errors"""
    pass


class InsufficientIncrements(SchemeError, ValueError):
    """Raised when fewer increments than grid steps are supplied"""
    pass


class GridMismatch(SchemeError, ValueError):
    """Raised when two paths live on different grids"""
    pass


class StreamExhausted(SchemeError):
    """Raised when a coupled increment stream runs out before the horizon"""
    pass


class CouplingError(LevySimError):
    """Base exception for coupling errors"""
    pass


class EmptyCdf(CouplingError, ValueError):
    """Raised when a CDF is built from no samples"""
    pass


class WassersteinError(LevySimError):
    """Base exception for Wasserstein estimation errors"""
    pass


class EmptyInput(WassersteinError, ValueError):
    """Raised when an empty sample array is supplied"""
    pass


class ExperimentError(LevySimError):
    """Base exception for experiment errors"""
    pass


class ExperimentNotFoundError(ExperimentError):
    """Raised when an experiment plugin cannot be found"""
    pass


class ExperimentLoadError(ExperimentError):
    """Raised when an experiment plugin fails to load"""
    pass


class HypothesisViolation(ExperimentError, ValueError):
    """Raised when a measure violates an experiment's hypothesis"""
    pass


class InsufficientGridPoints(ExperimentError, ValueError):
    """Raised when a slope fit is requested on too few grid points"""
    pass
