"""Black-Scholes pricing, parity and implied-volatility inversion.

Everything that can underflow is computed in log coordinates.  Out-of-the-money
prices are evaluated through the scaled complementary error function, which
keeps full relative precision at strikes like ``K = e^100`` where the call
price is ``exp(-1e5)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erfcx, log_ndtr, ndtr

from .errors import BandError, DomainError

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# prices within this many ulps of a band edge carry no volatility information
_BAND_ULPS = 64.0 * 2.220446049250313e-16


@dataclass(frozen=True)
class MarketFrame:
    """Spot ``x0``, continuously compounded rate ``r`` and expiry ``T``."""

    x0: float = 1.0
    r: float = 0.0
    T: float = 1.0

    def __post_init__(self) -> None:
        if not (self.x0 > 0.0 and math.isfinite(self.x0)):
            raise DomainError(f"spot must be positive, got {self.x0}")
        if not (self.r >= 0.0 and math.isfinite(self.r)):
            raise DomainError(f"rate must be non-negative, got {self.r}")
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise DomainError(f"expiry must be positive, got {self.T}")

    @property
    def forward(self) -> float:
        """``x0 * exp(r T)``."""
        return self.x0 * math.exp(self.r * self.T)

    @property
    def discount(self) -> float:
        return math.exp(-self.r * self.T)


def _check_strike(K: float) -> None:
    if not K > 0.0:
        raise DomainError(f"strike must be positive, got {K}")


def _check_sigma(sigma: float) -> None:
    if not sigma > 0.0:
        raise DomainError(f"volatility must be positive, got {sigma}")


def norm_cdf(z: float) -> float:
    """Standard normal distribution function."""
    return float(ndtr(z))


def log_norm_cdf(z: float) -> float:
    return float(log_ndtr(z))


def _d12(frame: MarketFrame, K: float, sigma: float) -> tuple[float, float]:
    v = sigma * math.sqrt(frame.T)
    k = math.log(K / frame.forward)
    d1 = -k / v + 0.5 * v
    return d1, d1 - v


def _log_otm(frame: MarketFrame, K: float, d1: float, d2: float, call: bool) -> float:
    # uses x0 * phi(d1) = K e^{-rT} phi(d2); the erfcx difference is positive
    if call:
        diff = erfcx(-d1 / _SQRT2) - erfcx(-d2 / _SQRT2)
    else:
        diff = erfcx(d2 / _SQRT2) - erfcx(d1 / _SQRT2)
    if diff <= 0.0:
        return -math.inf
    return math.log(K) - frame.r * frame.T - 0.5 * d2 * d2 + math.log(0.5 * diff)


def log_call_price(frame: MarketFrame, K: float, sigma: float) -> float:
    """``log C_BS(T, K, sigma)``, accurate far into the right wing."""
    _check_strike(K)
    _check_sigma(sigma)
    d1, d2 = _d12(frame, K, sigma)
    if d1 <= 0.0:
        return _log_otm(frame, K, d1, d2, call=True)
    c = frame.x0 * ndtr(d1) - K * frame.discount * ndtr(d2)
    if c <= 0.0:
        return -math.inf
    return math.log(c)


def log_put_price(frame: MarketFrame, K: float, sigma: float) -> float:
    """``log P_BS(T, K, sigma)``, accurate far into the left wing."""
    _check_strike(K)
    _check_sigma(sigma)
    d1, d2 = _d12(frame, K, sigma)
    if d2 >= 0.0:
        return _log_otm(frame, K, d1, d2, call=False)
    p = K * frame.discount * ndtr(-d2) - frame.x0 * ndtr(-d1)
    if p <= 0.0:
        return -math.inf
    return math.log(p)


def bs_call_price(frame: MarketFrame, K: float, sigma: float) -> float:
    """Black-Scholes call price ``x0 N(d1) - K e^{-rT} N(d2)``."""
    return math.exp(log_call_price(frame, K, sigma))


def bs_put_price(frame: MarketFrame, K: float, sigma: float) -> float:
    """Black-Scholes put price, consistent with put-call parity."""
    return math.exp(log_put_price(frame, K, sigma))


def log_vega(frame: MarketFrame, K: float, sigma: float) -> float:
    d1, _ = _d12(frame, K, sigma)
    return math.log(frame.x0) - 0.5 * d1 * d1 - _LOG_SQRT_2PI + 0.5 * math.log(frame.T)


def call_band(frame: MarketFrame, K: float) -> tuple[float, float]:
    """Open interval of arbitrage-free call prices at strike ``K``."""
    return max(frame.x0 - K * frame.discount, 0.0), frame.x0


def _to_otm(frame: MarketFrame, K: float, price: float | None, log_price: float | None, kind: str) -> tuple[float, str]:
    """Map a quote to (log price, kind) of the out-of-the-money option."""
    if kind not in ("call", "put"):
        raise DomainError(f"kind must be 'call' or 'put', got {kind!r}")
    if (price is None) == (log_price is None):
        raise DomainError("give exactly one of price or log_price")
    fwd_disc = K * frame.discount
    x0 = frame.x0
    otm_kind = "call" if K >= frame.forward else "put"

    if log_price is not None:
        if math.isnan(log_price) or log_price == math.inf:
            raise BandError(f"log price {log_price} is not admissible")
        if kind == otm_kind:
            upper = math.log(x0) if kind == "call" else math.log(fwd_disc)
            if log_price >= upper + math.log1p(-_BAND_ULPS):
                raise BandError(f"{kind} price at or above the upper band edge")
            if log_price == -math.inf:
                raise BandError(f"{kind} price is zero")
            return log_price, kind
        price = math.exp(log_price)

    assert price is not None
    if kind == "call":
        lo, hi = call_band(frame, K)
    else:
        lo, hi = max(fwd_disc - x0, 0.0), fwd_disc
    if not (price - lo > _BAND_ULPS * lo and price > lo and hi - price > _BAND_ULPS * hi):
        raise BandError(
            f"{kind} price {price!r} outside the admissible band ({lo!r}, {hi!r}) at K={K!r}; "
            "the quote is statically arbitrageable"
        )
    if kind == otm_kind:
        return math.log(price), kind
    # parity onto the out-of-the-money side
    other = price - x0 + fwd_disc if kind == "call" else price + x0 - fwd_disc
    if other <= 0.0:
        raise BandError(f"{kind} price carries no time value at K={K!r}")
    return math.log(other), otm_kind


def implied_vol(
    frame: MarketFrame,
    K: float,
    price: float | None = None,
    *,
    log_price: float | None = None,
    kind: str = "call",
    tol: float = 1e-14,
    max_iter: int = 200,
) -> float:
    """Black-Scholes implied volatility.

    The quote may be given as a plain ``price`` or, for prices below the
    float range, as ``log_price``.  In-the-money quotes are moved to the
    out-of-the-money side by parity, then ``log C_BS(sigma) = log price`` is
    solved by Newton steps on the log price, safeguarded by a bisection
    bracket so convergence is guaranteed anywhere inside the band.

    Raises:
        BandError: the quote is outside the open no-arbitrage band or so close
            to an edge that it carries no volatility information.
    """
    _check_strike(K)
    target, otm = _to_otm(frame, K, price, log_price, kind)
    log_price_fn = log_call_price if otm == "call" else log_put_price

    def g(s: float) -> float:
        return log_price_fn(frame, K, s) - target

    lo, hi = 1e-3, 1.0
    while g(lo) > 0.0:
        hi = lo
        lo *= 0.1
        if lo < 1e-300:
            raise BandError("price too small to invert")
    while g(hi) < 0.0:
        lo = hi
        hi *= 2.0
        if hi > 1e8:
            raise BandError("price too close to the upper band edge to invert")

    s = math.sqrt(lo * hi)
    for _ in range(max_iter):
        gs = g(s)
        if gs == 0.0:
            return s
        if gs < 0.0:
            lo = s
        else:
            hi = s
        # d log C / d sigma = vega / C, same for puts
        slope = math.exp(log_vega(frame, K, s) - (gs + target))
        step_ok = slope > 0.0 and math.isfinite(slope)
        s_new = s - gs / slope if step_ok else math.nan
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi) if hi / lo < 4.0 else math.sqrt(lo * hi)
        if abs(s_new - s) <= tol * s or (hi - lo) <= tol * s:
            return s_new
        s = s_new
    return s
