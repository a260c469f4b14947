"""Leading-order tail densities and wing call prices for three uncorrelated
stochastic-volatility models (Stein-Stein, Heston, Hull-White).

The amplitude and exponent constants of each tail are inputs; their closed
forms live in the model literature and are not derived here.  Everything is
evaluated in ``u = log x`` so strikes up to ``e^700`` (and beyond, through the
``log_`` variants) are usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Union

from .bs_core import MarketFrame
from .curves import Evaluable
from .errors import DomainError
from .quadrature import log_integral


@dataclass(frozen=True)
class SteinSteinTail:
    """``B0 (log x)^{-1/2} e^{B2 sqrt(log x)} x^{-B3}``."""

    B0: float
    B2: float
    B3: float

    def __post_init__(self) -> None:
        if not self.B0 > 0.0:
            raise DomainError(f"B0 must be positive, got {self.B0}")
        if not self.B2 >= 0.0:
            raise DomainError(f"B2 must be non-negative, got {self.B2}")
        if not self.B3 > 2.0:
            raise DomainError(f"B3 must exceed 2, got {self.B3}")

    @property
    def beta(self) -> float:
        return self.B3

    def floor_log(self) -> float:
        return 0.0

    def log_h(self, u: float) -> float:
        return math.log(self.B0) - 0.5 * math.log(u) + self.B2 * math.sqrt(u)


@dataclass(frozen=True)
class HestonTail:
    """``A0 (log x)^{-3/4 + q m / c^2} e^{A2 sqrt(log x)} x^{-A3}``."""

    A0: float
    A2: float
    A3: float
    q: float
    m: float
    c: float

    def __post_init__(self) -> None:
        if not self.A0 > 0.0:
            raise DomainError(f"A0 must be positive, got {self.A0}")
        if not self.A2 >= 0.0:
            raise DomainError(f"A2 must be non-negative, got {self.A2}")
        if not self.A3 > 2.0:
            raise DomainError(f"A3 must exceed 2, got {self.A3}")
        if not (self.q >= 0.0 and self.m >= 0.0 and self.c > 0.0):
            raise DomainError("need q >= 0, m >= 0, c > 0")

    @property
    def beta(self) -> float:
        return self.A3

    @property
    def log_power(self) -> float:
        return -0.75 + self.q * self.m / self.c**2

    def floor_log(self) -> float:
        return 0.0

    def log_h(self, u: float) -> float:
        return math.log(self.A0) + self.log_power * math.log(u) + self.A2 * math.sqrt(u)


@dataclass(frozen=True)
class HullWhiteTail:
    """``C0 x^{-2} (log x)^{(c2-1)/2} (log log x)^{c3} exp{-(log z + log log z / 2)^2 / (2 t xi^2)}``

    with ``z = sqrt(2 log x / t) / y0``.  Defined for ``z > 1`` and ``log x > 1``.
    """

    C0: float
    c2: float
    c3: float
    xi: float
    y0: float
    t: float

    def __post_init__(self) -> None:
        for name in ("C0", "xi", "y0", "t"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def beta(self) -> float:
        return 2.0

    def floor_log(self) -> float:
        """Smallest admissible ``log x`` (exclusive)."""
        return max(1.0, 0.5 * self.t * self.y0**2)

    def _gauss(self, u: float, T: float) -> float:
        log_z = 0.5 * math.log(2.0 * u / T) - math.log(self.y0)
        s = log_z + 0.5 * math.log(log_z)
        return s * s / (2.0 * T * self.xi**2)

    def log_h(self, u: float) -> float:
        return (
            math.log(self.C0)
            + 0.5 * (self.c2 - 1.0) * math.log(u)
            + self.c3 * math.log(math.log(u))
            - self._gauss(u, self.t)
        )


TailModel = Union[SteinSteinTail, HestonTail, HullWhiteTail]


def _check_floor(model: TailModel, u: float) -> None:
    f = model.floor_log()
    if not u > f:
        raise DomainError(f"{type(model).__name__} tail needs log x > {f:g}, got {u:g}")


def log_tail_density(model: TailModel, u: float) -> float:
    """``log D(e^u)`` for the leading-order tail density."""
    _check_floor(model, u)
    return model.log_h(u) - model.beta * u


def tail_density(model: TailModel, x: float) -> float:
    """Leading-order tail density at ``x`` (the formula without its ``1 + O(.)`` factor)."""
    if not x > 0.0:
        raise DomainError(f"x must be positive, got {x}")
    return math.exp(log_tail_density(model, math.log(x)))


def log_pareto_tail(model: TailModel, y: float) -> tuple[float, float]:
    """(alpha, log of ``y^{-alpha} h(y) / alpha``), the Pareto-type ccdf asymptote."""
    u = math.log(y)
    _check_floor(model, u)
    alpha = model.beta - 1.0
    return alpha, model.log_h(u) - alpha * u - math.log(alpha)


def pareto_tail(model: TailModel, y: float) -> tuple[float, float]:
    """Pareto-type index ``alpha`` and the ccdf asymptote ``y^{-alpha} h~(y)`` at ``y``."""
    alpha, lv = log_pareto_tail(model, y)
    return alpha, math.exp(lv)


def log_tail_ccdf_by_quadrature(model: TailModel, y: float) -> float:
    """``log int_y^inf D`` for the leading-order density."""
    u = math.log(y)
    _check_floor(model, u)
    return log_integral(lambda v: log_tail_density(model, v) + v, u, rtol=1e-10)


def log_call_wing_price(frame: MarketFrame, model: TailModel, K: float) -> float:
    """Logarithm of :func:`call_wing_price`."""
    u = math.log(K)
    _check_floor(model, u)
    rt = frame.r * frame.T
    if isinstance(model, HullWhiteTail):
        if not math.isclose(model.t, frame.T, rel_tol=1e-12):
            raise DomainError(f"Hull-White tail built for t={model.t} priced at T={frame.T}")
        T = frame.T
        return (
            math.log(4.0 * T * model.xi**2 * model.C0)
            - rt
            + 0.5 * (model.c2 + 1.0) * math.log(u)
            + (model.c3 - 1.0) * math.log(math.log(u))
            - model._gauss(u, T)
        )
    b = model.beta
    # 1/((1-b)(2-b)) = 1/((b-1)(b-2)) > 0
    return -rt + model.log_h(u) - math.log((b - 1.0) * (b - 2.0)) + (2.0 - b) * u


def call_wing_price(frame: MarketFrame, model: TailModel, K: float) -> float:
    """Leading-order call price as ``K -> infinity``.

    Stein-Stein and Heston: ``e^{-rT} h(K) K^{2-beta} / ((1-beta)(2-beta))``.
    Hull-White: ``4 T xi^2 C0 e^{-rT} (log K)^{(c2+1)/2} (log log K)^{c3-1}``
    times the Gaussian-in-log-log factor; the model's ``t`` must equal ``T``.
    """
    return math.exp(log_call_wing_price(frame, model, K))


def log_tail_call_by_quadrature(frame: MarketFrame, model: TailModel, K: float) -> float:
    """``log e^{-rT} int_K^inf (x - K) D(x) dx`` with the leading-order density."""
    log_k = math.log(K)
    _check_floor(model, log_k)

    def f(u: float) -> float:
        if u <= log_k:
            return -math.inf
        return u + math.log(-math.expm1(log_k - u)) + log_tail_density(model, u) + u

    return log_integral(f, log_k, rtol=1e-10) - frame.r * frame.T


def rv_call_asympt(frame: MarketFrame, beta: float, h: Evaluable, K: float) -> float:
    """``e^{-rT} K^{beta+2} h(K) / ((beta+1)(beta+2))`` for a density ``x^beta h(x)``."""
    if not beta < -2.0:
        raise DomainError(f"need beta < -2 for a finite call price, got {beta}")
    if not K > 0.0:
        raise DomainError(f"strike must be positive, got {K}")
    hv = float(h(K))
    return frame.discount * K ** (beta + 2.0) * hv / ((beta + 1.0) * (beta + 2.0))


def log_laplace_tail(b: Evaluable, bprime: Evaluable, a: float) -> float:
    """Log of the leading term ``e^{-b(a)} / b'(a)`` of ``int_a^inf e^{-b}``."""
    d = float(bprime(a))
    if not d > 0.0:
        raise DomainError(f"b'({a}) = {d} must be positive")
    return -float(b(a)) - math.log(d)


def laplace_tail(b: Evaluable, bprime: Evaluable, a: float) -> float:
    return math.exp(log_laplace_tail(b, bprime, a))


def logscale_call_asympt(frame: MarketFrame, b: Evaluable, Bprime: Evaluable, K: float) -> float:
    """``e^{-rT} e^{-b(log K)} log K / B'(log log K)`` for a density ``x^{-2} e^{-b(log x)}``.

    ``b(u) = B(log u)``; the caller supplies ``B'`` consistently.
    """
    u = math.log(K)
    if not u > 1.0:
        raise DomainError(f"need log K > 1, got {u}")
    d = float(Bprime(math.log(u)))
    if not d > 0.0:
        raise DomainError(f"B'(log log K) = {d} must be positive")
    return frame.discount * math.exp(-float(b(u))) * u / d


def hull_white_exponent(model: HullWhiteTail, T: float) -> tuple[Callable[[float], float], Callable[[float], float]]:
    """(b, B') with ``D(x) = x^{-2} exp(-b(log x))`` for the Hull-White tail.

    ``B`` is the closed form in ``v = log u`` obtained by writing
    ``log z = a + v/2`` with ``a = log(sqrt(2/T) / y0)``.
    """
    a = 0.5 * math.log(2.0 / T) - math.log(model.y0)
    k = 1.0 / (2.0 * T * model.xi**2)

    at_T = replace(model, t=T)

    def b(u: float) -> float:
        return -at_T.log_h(u)

    def Bprime(v: float) -> float:
        w = a + 0.5 * v
        s = w + 0.5 * math.log(w)
        ds = 0.5 + 0.25 / w
        return -0.5 * (model.c2 - 1.0) - model.c3 / v + 2.0 * k * s * ds

    return b, Bprime
