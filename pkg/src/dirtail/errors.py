"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid distribution, parameter or configuration."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its stated accuracy."""


class QuadratureError(NumericError):
    """Adaptive quadrature did not converge."""


class BracketError(NumericError):
    """Root bracketing failed."""


class TruncationError(NumericError):
    """Monte Carlo truncation bias is not controlled by the requested settings."""
