"""Exception hierarchy.

Every error raised by the library derives from :class:`VolwingError`; the
value-type errors also derive from :class:`ValueError` so that callers who
only care about bad input can catch the builtin.
"""

from __future__ import annotations


class VolwingError(Exception):
    """Base class for all library errors."""


class DomainError(VolwingError, ValueError):
    """An argument lies outside the domain of the formula."""


class BandError(DomainError):
    """A call/put price lies outside the static no-arbitrage band."""


class WingError(DomainError):
    """A wing formula was evaluated where the price does not decay enough."""


class RegimeError(VolwingError):
    """A substitute pricing function is too far from the true one."""


class InsufficientGridError(DomainError):
    """A strike or abscissa grid is too short to support an estimate."""


class NonPositivePriceError(DomainError):
    """A curve returned a non-positive value where a log was required."""


class ParityError(VolwingError):
    """Call and put inputs violate put-call parity."""


class MisalignedGridError(DomainError):
    """Two price grids do not share the same shape."""


class NegativeWeightError(VolwingError):
    """A discrete risk-neutral measure has a negative atom (convexity violation)."""

    def __init__(self, message: str, *, expiry_index: int, strike: float, weight: float):
        super().__init__(message)
        self.expiry_index = expiry_index
        self.strike = strike
        self.weight = weight


class QuadratureError(VolwingError, RuntimeError):
    """Adaptive quadrature failed to reach its tolerance."""

    def __init__(self, message: str, *, achieved: float):
        super().__init__(f"{message} (achieved relative error {achieved:.3g})")
        self.achieved = achieved


class NonIntegrableTailError(QuadratureError):
    """The integrand tail is too heavy for the requested integral to exist."""


class InstabilityError(VolwingError, RuntimeError):
    """A Monte Carlo path overflowed."""


class ConfigError(VolwingError, ValueError):
    """An experiment configuration is invalid."""


class DegenerateRegressionError(VolwingError, ArithmeticError):
    """A regression has a constant regressor and no defined slope."""
