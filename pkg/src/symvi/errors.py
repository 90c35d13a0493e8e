"""Exception and warning types."""


class SymviError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatch(SymviError, ValueError):
    pass


class NonConvergence(SymviError, ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance."""


class NonFiniteIntegrand(SymviError, ArithmeticError):
    """The integrand returned inf or nan at a quadrature node."""


class UnsupportedSpec(SymviError, ValueError):
    """The requested operation is not defined for this divergence."""


class InvalidAlpha(SymviError, ValueError):
    """Alpha-divergences need alpha > 0 and alpha != 1."""


class ConfigError(SymviError, ValueError):
    """Malformed or inconsistent experiment configuration."""


class Diverged(SymviError, RuntimeError):
    pass


class InfiniteDivergence(UserWarning):
    """Emitted when a divergence is infinite because the supports are incompatible."""
