"""Exception types raised across the package."""


class ZetaspanError(Exception):
    """Base class for all package-specific errors."""


class ZeroArgument(ZetaspanError):
    """An argument that must be nonzero was zero (e.g. p-adic valuation of 0)."""


class NonPositiveArgument(ZetaspanError):
    """An argument that must be strictly positive was not."""


class ArgumentTooSmall(ZetaspanError):
    """An integer argument below the supported range (e.g. zeta at i < 2)."""


class NonPositiveDenominator(ZetaspanError):
    """The denominator of the dimension constant is not certifiably positive."""


class DivergentIntegral(ZetaspanError):
    """The step function is positive arbitrarily close to 0, so the
    digamma-weighted integral diverges."""


class InvalidParams(ZetaspanError):
    """A parameter set failed validation where a valid one is required."""


class PreconditionViolation(ZetaspanError):
    """A stated precondition (such as n > s**2) does not hold."""


class SymmetryViolation(ZetaspanError):
    """An exact identity that must hold (vanishing of even-index or
    first-order coefficients) failed, signalling an upstream bug."""


class NoSignChange(ZetaspanError):
    """The bisection bracket shows no sign change; the saddle-point
    polynomial has no root there (bad parameters)."""


class NonConvergence(ZetaspanError):
    """An iterative optimisation exhausted its budget without converging."""


class SignPrecondition(ZetaspanError):
    """A criterion requires alpha < 0 < beta (interval-strict) and the
    supplied enclosures do not certify it."""
