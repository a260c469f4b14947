"""Put-call duality under strike inversion about the squared forward.

With ``F = x0 e^{rT}`` the map ``K -> F^2 / K`` turns a put pricing function
into a call pricing function ``G(K) = (K / F) P(F^2 / K)``, and the implied
volatility of ``C`` at ``K`` equals that of ``G`` at ``F^2 / K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bs_core import MarketFrame, implied_vol
from .curves import Evaluable, PriceCurve
from .errors import DomainError, ParityError
from .tail_index import DistributionSpec

PARITY_GATE = 1e-9


@dataclass(frozen=True)
class DualFrame:
    """A market frame together with the pivot ``F^2`` of the strike inversion."""

    frame: MarketFrame

    @property
    def pivot(self) -> float:
        return self.frame.forward**2

    def dual_strike(self, K: float) -> float:
        if not K > 0.0:
            raise DomainError(f"strike must be positive, got {K}")
        return self.pivot / K


def dual_call_G(frame: MarketFrame, P: PriceCurve, K: float) -> float:
    """``G(K) = (K / F) P(F^2 / K)``; zero where ``P`` vanishes."""
    return K / frame.forward * P(DualFrame(frame).dual_strike(K))


def _log_dual(frame: MarketFrame, curve: PriceCurve, K: float) -> float:
    F = frame.forward
    Kd = DualFrame(frame).dual_strike(K)
    return math.log(K / F) + curve.log_price(Kd)


def dual_call_curve(frame: MarketFrame, P: PriceCurve) -> PriceCurve:
    """The call pricing curve ``G`` built from a put curve."""
    if P.kind != "put":
        raise DomainError("dual_call_curve expects a put curve")
    return PriceCurve(log_fn=lambda K: _log_dual(frame, P, K), kind="call", name=f"G[{P.name}]")


def dual_put_curve(frame: MarketFrame, C: PriceCurve) -> PriceCurve:
    """The put curve paired with ``G`` by parity: ``(K / F) C(F^2 / K)``."""
    if C.kind != "call":
        raise DomainError("dual_put_curve expects a call curve")
    return PriceCurve(log_fn=lambda K: _log_dual(frame, C, K), kind="put", name=f"PG[{C.name}]")


def dual_density(frame: MarketFrame, D: Evaluable, x: float) -> float:
    """``F^3 x^{-3} D(F^2 / x)``: density of the dual stock price."""
    if not x > 0.0:
        raise DomainError(f"dual density needs x > 0, got {x}")
    F = frame.forward
    return (F / x) ** 3 * float(D(F * F / x))


def dual_log_density(frame: MarketFrame, log_D: Evaluable) -> Callable[[float], float]:
    """Log-coordinate version: ``u -> log dual density at e^u`` from ``u -> log D(e^u)``."""
    logF = math.log(frame.forward)
    return lambda u: 3.0 * (logF - u) + float(log_D(2.0 * logF - u))


def dual_spec(frame: MarketFrame, spec: DistributionSpec) -> DistributionSpec:
    """Distribution of the dual stock price; supports are swapped by the inversion."""
    pivot = frame.forward**2
    low = pivot / spec.support_high if math.isfinite(spec.support_high) else 0.0
    high = pivot / spec.support_low if spec.support_low > 0.0 else math.inf
    return DistributionSpec(
        density=lambda x: dual_density(frame, spec.density, x) if low <= x <= high else 0.0,
        support_low=low,
        support_high=high,
        log_density=dual_log_density(frame, spec.log_d),
        mean=None,
        name=f"dual[{spec.name}]",
        check=spec.check,
    )


@dataclass(frozen=True)
class SymmetryReport:
    strikes: tuple[float, ...]
    dual_strikes: tuple[float, ...]
    iv_call: tuple[float, ...]
    iv_dual: tuple[float, ...]
    deviations: tuple[float, ...]
    max_deviation: float
    max_parity_error: float


def _parity_errors(frame: MarketFrame, C: PriceCurve, P: PriceCurve, strikes: np.ndarray) -> np.ndarray:
    out = []
    for K in strikes:
        disc_k = K * frame.discount
        dev = C(K) - P(K) - frame.x0 + disc_k
        out.append(abs(dev) / (frame.x0 + disc_k))
    return np.array(out)


def symmetry_check(
    frame: MarketFrame, C: PriceCurve, P: PriceCurve, grid: Sequence[float]
) -> SymmetryReport:
    """Compare ``I_C(K)`` with ``I_G(F^2 / K)`` on ``grid``.

    Both sides are obtained by numerical inversion of genuine prices: ``I_C``
    from the out-of-the-money member of ``(C, P)`` at ``K``, ``I_G`` from the
    out-of-the-money member of ``(G, P_G)`` at the dual strike.

    Raises:
        ParityError: ``C`` and ``P`` violate put-call parity by more than 1e-9
            (relative to ``x0 + K e^{-rT}``) somewhere on the grid.
    """
    strikes = np.asarray(grid, dtype=float)
    parity = _parity_errors(frame, C, P, strikes)
    worst = int(np.argmax(parity))
    if parity[worst] > PARITY_GATE:
        raise ParityError(
            f"put-call parity violated at K={float(strikes[worst])!r} (relative error {parity[worst]:.3g}); "
            "symmetry does not apply"
        )
    dual = DualFrame(frame)
    G = dual_call_curve(frame, P)
    PG = dual_put_curve(frame, C)
    F = frame.forward
    iv_c, iv_g, kd = [], [], []
    for K in strikes:
        Kd = dual.dual_strike(K)
        if K >= F:
            iv_c.append(implied_vol(frame, K, log_price=C.log_price(K), kind="call"))
        else:
            iv_c.append(implied_vol(frame, K, log_price=P.log_price(K), kind="put"))
        if Kd >= F:
            iv_g.append(implied_vol(frame, Kd, log_price=G.log_price(Kd), kind="call"))
        else:
            iv_g.append(implied_vol(frame, Kd, log_price=PG.log_price(Kd), kind="put"))
        kd.append(Kd)
    dev = np.abs(np.array(iv_c) - np.array(iv_g))
    return SymmetryReport(
        strikes=tuple(strikes.tolist()),
        dual_strikes=tuple(kd),
        iv_call=tuple(iv_c),
        iv_dual=tuple(iv_g),
        deviations=tuple(dev.tolist()),
        max_deviation=float(dev.max()),
        max_parity_error=float(parity.max()),
    )
