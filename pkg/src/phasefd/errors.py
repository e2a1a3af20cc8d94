"""Exception types shared across the solver engine."""


class PhasefdError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(PhasefdError):
    """Two fields or matrices that must share a shape do not."""


class UnsupportedBoundaryError(PhasefdError):
    """A boundary condition is not supported by the requested operation."""


class ScheduleRangeError(PhasefdError):
    """A parameter schedule was evaluated outside its time coverage."""


class DegenerateParameterError(PhasefdError):
    """A parameter value (T = 0) makes the splitting condition degenerate."""


class UnsupportedConfigurationError(PhasefdError):
    """A mode/parameter combination the solver cannot honor."""


class SingularCoefficientError(PhasefdError):
    """A spectral divisor or dense system matrix is (numerically) singular."""


class ConfigError(PhasefdError):
    """A run configuration failed validation; the message names the key."""
