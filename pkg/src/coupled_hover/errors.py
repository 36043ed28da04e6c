"""Exception types shared across the package."""


class CoupledHoverError(Exception):
    """Base class for all package-specific errors."""


class NotSkew(CoupledHoverError):
    """Matrix handed to vee() is not skew-symmetric within tolerance."""


class RankDeficientC(CoupledHoverError):
    """Moment allocation matrix does not have full row rank."""


class NotD1Minimal(CoupledHoverError):
    """Operation requires the single-force-input platform class (n_f = 1)."""


class ZeroColumn(CoupledHoverError):
    """Force allocation column is numerically zero."""


class NonFiniteState(CoupledHoverError):
    """Integrator produced NaN/Inf entries."""

    def __init__(self, message, t=None, batch_index=None):
        super().__init__(message)
        self.t = t
        self.batch_index = batch_index


class ThrustDegenerate(CoupledHoverError):
    """Reference force too small to define a thrust direction."""


class HeadingSingular(CoupledHoverError):
    """Thrust direction too close to the heading axis to build the frame."""


class IllConditionedC(CoupledHoverError):
    """Moment allocation matrix is numerically ill conditioned."""


class InfeasibleDomain(CoupledHoverError):
    """Domain bounds leave no positive lower bound on the reference force."""


class NotCertified(CoupledHoverError):
    """Operation requires a feasible certificate."""


class ConfigError(CoupledHoverError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    """Config file could not be parsed at all."""


class ValidationError(ConfigError):
    """Config parsed but violates an invariant; carries the field path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
