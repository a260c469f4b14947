"""Model-free implied-volatility wing formulas with error envelopes.

The right-wing formulas take a call pricing curve and a strike ``K`` deep out
of the money and return an :class:`AsymptoticIV`: the approximate implied
volatility, the shape of its error envelope as a function of strike, and a
tag naming the formula that produced it.  Envelope constants are never
claimed; :mod:`volwing.harness` fits them.

Square-root differences are evaluated as ``(a - b) / (sqrt(a) + sqrt(b))``
so no digits are lost when ``log(1/C)`` is of order 1e5.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._trend import tail_window, trend
from .bs_core import MarketFrame
from .curves import Evaluable, PriceCurve
from .errors import DomainError, RegimeError, WingError

REGIMES = (
    "exact-C",
    "refined",
    "substitute-approx",
    "substitute-bounded-tau",
    "log-equivalent",
    "tail-wing-smooth",
    "not-asymptotic",
)

# finite-grid proxies for the asymptotic substitute conditions
BOUNDED_TAU_RATIO = 20.0
REGIME_ERROR_RATIO = 1.0 / 3.0
FORM_AGREEMENT = 1e-12


class NotAsymptoticWarning(UserWarning):
    """Strike is too close to the money for a wing formula to mean anything."""


@dataclass(frozen=True)
class AsymptoticIV:
    """A wing implied-volatility estimate.

    ``error_order`` maps a strike to the unnormalised error envelope of the
    formula that produced ``value``; it is ``None`` for value-only regimes.
    """

    value: float
    error_order: Callable[[float], float] | None
    regime: str
    strike: float
    psi_form: float | None = None

    @property
    def envelope(self) -> float:
        """Error envelope evaluated at the strike of this estimate."""
        if self.error_order is None:
            return math.nan
        return self.error_order(self.strike)


@dataclass(frozen=True)
class SubstituteDiagnostics:
    tau: Callable[[float], float]
    regime: str
    grid: tuple[float, ...]
    tau_values: tuple[float, ...]
    bounded_ratio: float  # sup over the tail window of tau / log log(1/Csub)
    log_ratio: float  # sup over the tail window of tau / log(1/Csub)
    notes: tuple[str, ...] = field(default_factory=tuple)


def psi(u: float) -> float:
    """``2 - 4 (sqrt(u^2 + u) - u)``, evaluated as ``2 / (sqrt(1+u) + sqrt(u))^2``."""
    if not u >= 0.0:
        raise DomainError(f"psi is defined for u >= 0, got {u}")
    if math.isinf(u):
        return 0.0
    return 2.0 / (math.sqrt(1.0 + u) + math.sqrt(u)) ** 2


def _root_gap(a: float, b: float) -> float:
    """``sqrt(a) - sqrt(b)`` for ``a >= b >= 0`` without cancellation."""
    return (a - b) / (math.sqrt(a) + math.sqrt(b))


def _gate(log_k: float, K: float) -> AsymptoticIV | None:
    if log_k <= 1.0:
        warnings.warn(
            f"strike {K!r} is not in the wing (|log K| <= 1); no asymptotic value returned",
            NotAsymptoticWarning,
            stacklevel=3,
        )
        return AsymptoticIV(math.nan, None, "not-asymptotic", K)
    return None


def _check_forms(a: float, b: float, what: str) -> None:
    if abs(a - b) > FORM_AGREEMENT * max(1.0, abs(a)):
        raise ArithmeticError(f"{what}: equivalent forms disagree ({a!r} vs {b!r})")


def _wing_L(C: PriceCurve, K: float) -> float:
    L = -C.log_price(K)
    if L <= 1.0:
        raise WingError(f"log(1/C(K)) = {L:.6g} <= 1 at K={K!r}: not a deep wing")
    return L


def _plain(log_k: float, L: float, T: float) -> float:
    return math.sqrt(2.0 / T) * _root_gap(log_k + L, L)


def _refined(log_k: float, L: float, T: float, log_L: float) -> float:
    return _root_gap(2.0 * log_k + 2.0 * L - log_L, 2.0 * L - log_L) / math.sqrt(T)


def iv_wing_call(frame: MarketFrame, C: PriceCurve, K: float) -> AsymptoticIV:
    """Right-wing implied volatility from the call price alone.

    ``sqrt(2/T) [sqrt(log K + L) - sqrt(L)]`` with ``L = log(1/C(K))`` and
    error envelope ``L^{-1/2} log L``.  The equivalent
    ``sqrt(log K / T) sqrt(psi(L / log K))`` form is computed alongside and
    must agree to 1e-12.
    """
    log_k = math.log(K)
    if (gated := _gate(log_k, K)) is not None:
        return gated
    L = _wing_L(C, K)
    value = _plain(log_k, L, frame.T)
    alt = math.sqrt(log_k / frame.T) * math.sqrt(psi(L / log_k))
    _check_forms(value, alt, "iv_wing_call")

    def order(k: float) -> float:
        Lk = _wing_L(C, k)
        return math.log(Lk) / math.sqrt(Lk)

    return AsymptoticIV(value, order, "exact-C", K, psi_form=alt)


def iv_wing_call_refined(
    frame: MarketFrame, C: PriceCurve, K: float, aux: Evaluable | None = None
) -> AsymptoticIV:
    """Right-wing implied volatility with the ``log log(1/C)`` correction.

    ``T^{-1/2} [sqrt(2 log K + 2L - log L) - sqrt(2L - log L)]``; the error
    envelope is ``L^{-1/2} aux(K)`` where ``aux`` is any positive function
    tending to infinity, ``log log(1/C(K))`` by default.
    """
    log_k = math.log(K)
    if (gated := _gate(log_k, K)) is not None:
        return gated
    L = _wing_L(C, K)
    value = _refined(log_k, L, frame.T, math.log(L))

    def order(k: float) -> float:
        Lk = _wing_L(C, k)
        a = math.log(Lk) if aux is None else float(aux(k))
        if not a > 0.0:
            raise DomainError(f"aux must be positive, got {a!r} at K={k!r}")
        return a / math.sqrt(Lk)

    return AsymptoticIV(value, order, "refined", K)


def iv_wing_put(frame: MarketFrame, P: PriceCurve, K: float) -> AsymptoticIV:
    """Left-wing implied volatility from the put price.

    ``sqrt(2/T) [sqrt(log 1/P) - sqrt(log K/P)]`` with envelope
    ``M^{-1/2} log M``, ``M = log(K / P(K))``.
    """
    log_inv_k = -math.log(K)
    if (gated := _gate(log_inv_k, K)) is not None:
        return gated

    def wing_M(k: float) -> tuple[float, float]:
        LP = -P.log_price(k)
        M = math.log(k) + LP
        if M <= 1.0:
            raise WingError(f"log(K/P(K)) = {M:.6g} <= 1 at K={k!r}: P(K)/K does not vanish fast enough")
        return LP, M

    LP, M = wing_M(K)
    value = math.sqrt(2.0 / frame.T) * _root_gap(LP, M)

    def order(k: float) -> float:
        _, Mk = wing_M(k)
        return math.log(Mk) / math.sqrt(Mk)

    return AsymptoticIV(value, order, "exact-C", K)


def iv_wing_substitute(
    frame: MarketFrame,
    C: PriceCurve,
    Csub: PriceCurve,
    grid: Sequence[float],
    aux: Evaluable | None = None,
) -> tuple[list[AsymptoticIV], SubstituteDiagnostics]:
    """Wing formula evaluated with a substitute ``Csub`` in place of ``C``.

    The distance ``tau(K) = |log 1/C - log 1/Csub|`` is probed on the last
    third of ``grid`` and decides which result applies:

    * ``sup tau / log log(1/Csub) <= 20``: bounded-tau, plain form with
      envelope ``Lsub^{-1/2} log Lsub``;
    * ``sup tau / log(1/Csub) < 1/3``: refined form with envelope
      ``Lsub^{-1/2} (aux + tau)``;
    * otherwise log-equivalence only, value without envelope.

    Raises:
        RegimeError: ``tau / log(1/Csub) >= 1/3`` on the whole tail window.
    """
    strikes = np.asarray(grid, dtype=float)
    if strikes.size < 3 or np.any(np.diff(strikes) <= 0):
        raise DomainError("grid must hold at least 3 increasing strikes")

    def tau(k: float) -> float:
        return abs(C.log_price(k) - Csub.log_price(k))

    Lsub = np.array([_wing_L(Csub, k) for k in strikes])
    taus = np.array([tau(k) for k in strikes])
    win = tail_window(strikes.size)
    bounded = float(np.max(taus[win] / np.log(Lsub[win])))
    log_ratio = taus[win] / Lsub[win]
    notes: list[str] = []
    if np.all(log_ratio >= REGIME_ERROR_RATIO * (1.0 - 1e-9)):
        raise RegimeError(
            f"tau/log(1/Csub) >= {REGIME_ERROR_RATIO:.4g} on the whole tail "
            f"(min {float(log_ratio.min()):.4g}); the substitute is not close enough to C"
        )
    if bounded <= BOUNDED_TAU_RATIO:
        regime = "substitute-bounded-tau"
    elif float(log_ratio.max()) < REGIME_ERROR_RATIO:
        regime = "substitute-approx"
    else:
        regime = "log-equivalent"
        if trend(log_ratio) != "decreasing":
            notes.append("tau/log(1/Csub) is not visibly decreasing; log-equivalence is unconfirmed")

    def sub_L(k: float) -> float:
        return _wing_L(Csub, k)

    def order_bounded(k: float) -> float:
        Lk = sub_L(k)
        return math.log(Lk) / math.sqrt(Lk)

    def order_approx(k: float) -> float:
        Lk = sub_L(k)
        a = math.log(Lk) if aux is None else float(aux(k))
        return (a + tau(k)) / math.sqrt(Lk)

    results = []
    for k, Lk in zip(strikes, Lsub):
        log_k = math.log(k)
        if regime == "substitute-approx":
            value = _refined(log_k, Lk, frame.T, math.log(Lk))
            order = order_approx
        else:
            value = _plain(log_k, Lk, frame.T)
            order = order_bounded if regime == "substitute-bounded-tau" else None
        results.append(AsymptoticIV(value, order, regime, float(k)))
    diag = SubstituteDiagnostics(
        tau=tau,
        regime=regime,
        grid=tuple(float(k) for k in strikes),
        tau_values=tuple(float(t) for t in taus),
        bounded_ratio=bounded,
        log_ratio=float(log_ratio.max()),
        notes=tuple(notes),
    )
    return results, diag


def tail_wing_smooth(frame: MarketFrame, fn: Evaluable, kind: str, K: float) -> AsymptoticIV:
    """Tail-wing formula with error estimate from a smooth log-tail exponent.

    ``kind="rho"``: the stock price ccdf is ``~ exp(-rho(log y))``;
    ``kind="h"``: the density is ``~ x^{-1} exp(-h(log x))``.  Either way the
    value is ``sqrt(2/T) (sqrt(fn(log K)) - sqrt(fn(log K) - log K))`` with
    envelope ``log(fn(log K)) / sqrt(fn(log K))``.  Smoothness of ``fn`` is
    the caller's assertion (see :func:`volwing.regvar.svr_check`).
    """
    if kind not in ("rho", "h"):
        raise DomainError(f"kind must be 'rho' or 'h', got {kind!r}")
    log_k = math.log(K)
    if (gated := _gate(log_k, K)) is not None:
        return gated

    def exponent(k: float) -> float:
        lk = math.log(k)
        v = float(fn(lk))
        if not v > lk:
            raise DomainError(f"{kind}(log K) = {v!r} must exceed log K = {lk!r}")
        return v

    v = exponent(K)
    value = math.sqrt(2.0 / frame.T) * _root_gap(v, v - log_k)
    alt = math.sqrt(log_k / frame.T) * math.sqrt(psi((v - log_k) / log_k))
    _check_forms(value, alt, "tail_wing_smooth")

    def order(k: float) -> float:
        vk = exponent(k)
        return math.log(vk) / math.sqrt(vk)

    return AsymptoticIV(value, order, "tail-wing-smooth", K, psi_form=alt)
