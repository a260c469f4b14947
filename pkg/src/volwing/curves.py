"""Strike -> price maps at a fixed expiry."""

from __future__ import annotations

import math
from typing import Callable

from . import bs_core
from .bs_core import MarketFrame
from .errors import NonPositivePriceError

Evaluable = Callable[[float], float]


class PriceCurve:
    """A call or put pricing curve ``K -> price`` at fixed expiry.

    A curve can be built from a plain price function or from a log-price
    function; the wing formulas only ever need ``log_price``, so curves whose
    prices underflow (Black-Scholes at ``K = e^80``) should be given in log
    form.
    """

    def __init__(
        self,
        fn: Evaluable | None = None,
        *,
        log_fn: Evaluable | None = None,
        kind: str = "call",
        name: str = "",
    ):
        if (fn is None) == (log_fn is None):
            raise ValueError("give exactly one of fn or log_fn")
        if kind not in ("call", "put"):
            raise ValueError(f"kind must be 'call' or 'put', got {kind!r}")
        self._fn = fn
        self._log_fn = log_fn
        self.kind = kind
        self.name = name

    def __repr__(self) -> str:
        return f"PriceCurve(kind={self.kind!r}, name={self.name!r})"

    def __call__(self, K: float) -> float:
        if self._fn is not None:
            return float(self._fn(K))
        return math.exp(self._log_fn(K))

    def log_price(self, K: float) -> float:
        """``log price(K)``; raises if the price is not positive."""
        if self._log_fn is not None:
            v = float(self._log_fn(K))
            if v == -math.inf or math.isnan(v):
                raise NonPositivePriceError(f"{self.kind} curve {self.name!r} has no positive price at K={K!r}")
            return v
        p = float(self._fn(K))
        if not p > 0.0:
            raise NonPositivePriceError(f"{self.kind} curve {self.name!r} returned {p!r} at K={K!r}")
        return math.log(p)

    def scaled(self, factor: float) -> "PriceCurve":
        """The curve multiplied by a positive constant."""
        log_factor = math.log(factor)
        return PriceCurve(log_fn=lambda K: self.log_price(K) + log_factor, kind=self.kind, name=f"{factor}*{self.name}")


def bs_curve(frame: MarketFrame, sigma: float, kind: str = "call") -> PriceCurve:
    """Black-Scholes call or put curve in log form."""
    if kind == "call":
        return PriceCurve(log_fn=lambda K: bs_core.log_call_price(frame, K, sigma), kind="call", name=f"bs({sigma})")
    return PriceCurve(log_fn=lambda K: bs_core.log_put_price(frame, K, sigma), kind="put", name=f"bs({sigma})")
