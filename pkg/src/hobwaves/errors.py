"""Exception types shared across the package.

ValueError subclasses mean the caller handed us something inconsistent
(configuration problems, CLI exit code 2).  RuntimeError subclasses mean
the mathematics failed at runtime (CLI exit code 3).
"""


class ConfigError(ValueError):
    """Invalid configuration value or file."""


class GridMismatchError(ValueError):
    """Profile and configuration disagree on the spatial grid."""


class SingularDispersionError(RuntimeError):
    """det of the dispersion matrix vanishes at some mode."""


class DegenerateStateError(RuntimeError):
    """A stabilizing-factor denominator is zero (e.g. zero profile)."""


class SingularJacobianError(RuntimeError):
    """Newton linear system is singular to working precision."""


class StabilityConfigurationError(RuntimeError):
    """Theta-scheme denominator vanishes at some mode for the given dt, theta."""


class BlowUpError(RuntimeError):
    """Propagation produced non-finite fields."""


class UnsupportedFunctionalError(RuntimeError):
    """The nonlinearity does not define the requested variational quantity."""
