"""Distribution-level pricing and tail-index estimators.

Prices are recovered from a stock-price density through its tail functions
(``C(K) = e^{-rT} int_K^inf ccdf``, ``P(K) = e^{-rT} int_0^K cdf``).  All
integrals run in ``u = log x`` through :func:`volwing.quadrature.log_integral`,
so densities should be supplied as ``log_density(u) = log D(e^u)`` whenever
the tail is heavy.

The estimators turn the liminf/sup definitions of the right and left tail
indices into finite-grid procedures: a trailing-window lower envelope
extrapolated linearly in ``1 / log K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from ._trend import tail_window, trend
from .bs_core import MarketFrame
from .curves import Evaluable, PriceCurve
from .errors import DomainError, InsufficientGridError, NonIntegrableTailError, NonPositivePriceError
from .quadrature import log_integral

INFINITE_INDEX_THRESHOLD = 50.0
LADDER_RESOLUTION = 0.05
MIN_DECADES = 4.0
_RTOL = 1e-11
_SIMPSON_POINTS = 65
_P_LADDER = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)

CAVEAT = (
    "indices are limits; a finite grid cannot separate liminf from limsup on "
    "oscillating curves"
)


@dataclass(frozen=True)
class DistributionSpec:
    """Law of ``X_T`` given by its density.

    ``log_density`` takes ``u = log x``.  ``log_tail_ccdf`` / ``log_head_cdf``
    are optional closed forms of ``log P[X > y]`` / ``log P[X <= y]`` used for
    ``y >= tail_from`` / ``y <= head_to``.
    """

    density: Evaluable
    support_low: float = 0.0
    support_high: float = math.inf
    log_density: Evaluable | None = None
    log_tail_ccdf: Evaluable | None = None
    tail_from: float = math.inf
    log_head_cdf: Evaluable | None = None
    head_to: float = 0.0
    mean: float | None = None
    name: str = ""
    check: bool = True

    def __post_init__(self) -> None:
        if not (0.0 <= self.support_low < self.support_high):
            raise DomainError("need 0 <= support_low < support_high")
        if self.check:
            mass = math.exp(log_integral(self.log_integrand(0), *self.u_range(), rtol=_RTOL))
            if abs(mass - 1.0) > 1e-8:
                raise DomainError(f"density {self.name!r} integrates to {mass!r}, not 1")

    def log_d(self, u: float) -> float:
        """``log D(e^u)``, ``-inf`` outside the support."""
        lo, hi = self.u_range()
        if not (lo <= u <= hi):
            return -math.inf
        if self.log_density is not None:
            return float(self.log_density(u))
        try:
            x = math.exp(u)
        except OverflowError:
            raise NonIntegrableTailError(
                f"density {self.name!r} probed beyond the float range; supply log_density",
                achieved=math.inf,
            ) from None
        d = float(self.density(x))
        return math.log(d) if d > 0.0 else -math.inf

    def u_range(self) -> tuple[float, float]:
        lo = math.log(self.support_low) if self.support_low > 0.0 else -math.inf
        hi = math.log(self.support_high) if math.isfinite(self.support_high) else math.inf
        return lo, hi

    def log_integrand(self, power: float) -> Callable[[float], float]:
        """``u -> log(x^power D(x) x)``, the integrand of ``E[X^power]`` in ``u``."""
        return lambda u: self.log_d(u) + (power + 1.0) * u

    def expectation_mean(self) -> float:
        if self.mean is not None:
            return self.mean
        return math.exp(log_integral(self.log_integrand(1.0), *self.u_range(), rtol=_RTOL))


def _clip_log_prob(v: float) -> float:
    return min(v, 0.0)


def log_ccdf(spec: DistributionSpec, y: float) -> float:
    """``log P[X > y]``."""
    if y <= spec.support_low:
        return 0.0
    if y >= spec.support_high:
        return -math.inf
    if spec.log_tail_ccdf is not None and y >= spec.tail_from:
        return _clip_log_prob(float(spec.log_tail_ccdf(y)))
    _, hi = spec.u_range()
    return _clip_log_prob(log_integral(spec.log_integrand(0.0), math.log(y), hi, rtol=_RTOL))


def log_cdf(spec: DistributionSpec, y: float) -> float:
    """``log P[X <= y]``."""
    if y <= spec.support_low:
        return -math.inf
    if y >= spec.support_high:
        return 0.0
    if spec.log_head_cdf is not None and y <= spec.head_to:
        return _clip_log_prob(float(spec.log_head_cdf(y)))
    lo, _ = spec.u_range()
    return _clip_log_prob(log_integral(spec.log_integrand(0.0), lo, math.log(y), rtol=_RTOL))


def ccdf_from_density(spec: DistributionSpec, y: float) -> float:
    """``P[X > y] = int_y^inf D``."""
    return math.exp(log_ccdf(spec, y))


def cdf_from_density(spec: DistributionSpec, y: float) -> float:
    return math.exp(log_cdf(spec, y))


def log_call_from_ccdf(frame: MarketFrame, spec: DistributionSpec, K: float) -> float:
    """``log C(K)`` with ``C(K) = e^{-rT} int_K^inf ccdf(y) dy``.

    Raises:
        NonIntegrableTailError: the ccdf is not integrable (infinite mean).
    """
    if K < 0.0:
        raise DomainError(f"strike must be non-negative, got {K}")
    _, hi = spec.u_range()
    parts = []
    start = max(K, spec.support_low)
    if start > 0.0:
        if start < spec.support_high:
            parts.append(log_integral(lambda v: log_ccdf(spec, math.exp(v)) + v, math.log(start), hi, rtol=_RTOL))
    else:
        # K = 0 with support reaching 0: the whole mean
        parts.append(log_integral(lambda v: log_ccdf(spec, math.exp(v)) + v, -math.inf, hi, rtol=_RTOL))
    if K < spec.support_low:
        parts.append(math.log(spec.support_low - K))
    if not parts:
        return -math.inf
    return float(np.logaddexp.reduce(parts)) - frame.r * frame.T


def call_from_ccdf(frame: MarketFrame, spec: DistributionSpec, K: float) -> float:
    return math.exp(log_call_from_ccdf(frame, spec, K))


def log_put_from_cdf(frame: MarketFrame, spec: DistributionSpec, K: float) -> float:
    """``log P(K)`` with ``P(K) = e^{-rT} int_0^K cdf(y) dy``."""
    if not K > 0.0:
        raise DomainError(f"strike must be positive, got {K}")
    lo, _ = spec.u_range()
    end = min(K, spec.support_high)
    parts = []
    if end > spec.support_low:
        parts.append(log_integral(lambda v: log_cdf(spec, math.exp(v)) + v, lo, math.log(end), rtol=_RTOL))
    if K > spec.support_high:
        parts.append(math.log(K - spec.support_high))
    if not parts:
        return -math.inf
    return float(np.logaddexp.reduce(parts)) - frame.r * frame.T


def put_from_cdf(frame: MarketFrame, spec: DistributionSpec, K: float) -> float:
    return math.exp(log_put_from_cdf(frame, spec, K))


def log_call_by_payoff(frame: MarketFrame, spec: DistributionSpec, K: float) -> float:
    """``log e^{-rT} E[(X - K)^+]`` by direct payoff quadrature (independent oracle)."""
    lo, hi = spec.u_range()
    log_k = math.log(K)

    def f(u: float) -> float:
        if u <= log_k:
            return -math.inf
        return u + math.log(-math.expm1(log_k - u)) + spec.log_d(u) + u

    return log_integral(f, max(lo, log_k), hi, rtol=_RTOL) - frame.r * frame.T


def log_put_by_payoff(frame: MarketFrame, spec: DistributionSpec, K: float) -> float:
    """``log e^{-rT} E[(K - X)^+]`` by direct payoff quadrature."""
    lo, hi = spec.u_range()
    log_k = math.log(K)

    def f(u: float) -> float:
        if u >= log_k:
            return -math.inf
        return log_k + math.log(-math.expm1(u - log_k)) + spec.log_d(u) + u

    end = min(hi, log_k)
    if end <= lo:
        return -math.inf
    return log_integral(f, lo, end, rtol=_RTOL) - frame.r * frame.T


def pareto_spec(beta: float, tail_from: float = 1.0) -> DistributionSpec:
    """Density ``(beta-1) x^{-beta}`` on ``[1, inf)``; ``beta > 2`` for a finite mean.

    The closed-form ccdf and cdf are used from ``tail_from`` on; pass
    ``math.inf`` to force density quadrature everywhere (slow: nested integrals).
    """
    if not beta > 1.0:
        raise DomainError(f"need beta > 1, got {beta}")
    a = beta - 1.0
    return DistributionSpec(
        density=lambda x: a * x ** (-beta) if x >= 1.0 else 0.0,
        support_low=1.0,
        log_density=lambda u: math.log(a) - beta * u,
        log_tail_ccdf=lambda y: -a * math.log(y),
        tail_from=tail_from,
        log_head_cdf=lambda y: math.log(-math.expm1(-a * math.log(y))) if y > 1.0 else -math.inf,
        head_to=math.inf if math.isfinite(tail_from) else 0.0,
        mean=a / (beta - 2.0) if beta > 2.0 else math.inf,
        name=f"pareto({beta})",
    )


def pareto_curves(frame: MarketFrame, beta: float) -> tuple[PriceCurve, PriceCurve]:
    """Closed-form (call, put) curves of :func:`pareto_spec` under ``frame``.

    ``C(K) = e^{-rT} K^{2-beta} / (beta - 2)`` for ``K >= 1`` and
    ``e^{-rT} (mean - K)`` below; the put follows from parity.  ``frame``
    should have forward equal to the Pareto mean ``(beta-1)/(beta-2)``.
    """
    if not beta > 2.0:
        raise DomainError(f"need beta > 2 for a finite mean, got {beta}")
    mean = (beta - 1.0) / (beta - 2.0)
    if not math.isclose(frame.forward, mean, rel_tol=1e-12):
        raise DomainError(f"frame forward {frame.forward!r} differs from the Pareto mean {mean!r}")
    rt = frame.r * frame.T

    def log_call(K: float) -> float:
        if K >= 1.0:
            return (2.0 - beta) * math.log(K) - math.log(beta - 2.0) - rt
        return math.log(mean - K) - rt

    def log_put(K: float) -> float:
        if K <= 1.0:
            return -math.inf
        # P = C - x0 + K e^{-rT} = e^{-rT} (K - mean + K^{2-beta}/(beta-2))
        return math.log(K - mean + K ** (2.0 - beta) / (beta - 2.0)) - rt

    name = f"pareto({beta})"
    return PriceCurve(log_fn=log_call, kind="call", name=name), PriceCurve(log_fn=log_put, kind="put", name=name)


def lognormal_spec(frame: MarketFrame, sigma: float) -> DistributionSpec:
    """Risk-neutral Black-Scholes law of ``X_T``."""
    s = sigma * math.sqrt(frame.T)
    mu = math.log(frame.forward) - 0.5 * s * s
    norm = -math.log(s) - 0.5 * math.log(2.0 * math.pi)
    return DistributionSpec(
        density=lambda x: math.exp(norm - math.log(x) - 0.5 * ((math.log(x) - mu) / s) ** 2) if x > 0 else 0.0,
        log_density=lambda u: norm - u - 0.5 * ((u - mu) / s) ** 2,
        log_tail_ccdf=lambda y: float(special.log_ndtr(-(math.log(y) - mu) / s)),
        log_head_cdf=lambda y: float(special.log_ndtr((math.log(y) - mu) / s)),
        tail_from=0.0,
        head_to=math.inf,
        mean=frame.forward,
        name=f"lognormal({sigma})",
    )


# estimators


@dataclass(frozen=True)
class TailIndexReport:
    l_hat: float
    p_tilde_hat: float | None
    r_star_hat: float
    s_star_hat: float | None
    lee_slope: float
    l_infinite: bool
    deltas: dict[str, float]
    grid_meta: dict = field(default_factory=dict)
    caveat: str = CAVEAT


@dataclass(frozen=True)
class LeftIndexReport:
    m_hat: float
    q_tilde_hat: float | None
    u_star_hat: float
    v_star_hat: float | None
    lee_slope_left: float
    m_infinite: bool
    consistent: bool
    deltas: dict[str, float]
    grid_meta: dict = field(default_factory=dict)
    caveat: str = CAVEAT


def _extrapolate(x: np.ndarray, q: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Lower envelope ``a + b / x`` of ``q`` on the trailing window.

    ``x`` is the log-moneyness scale (``log K`` or ``log 1/K``), increasing.
    The least-squares fit is shifted down until no point lies below it, so
    oscillating ratios are extrapolated from their lows (liminf).
    Returns (intercept a, slope b, fitted envelope).
    """
    win = tail_window(x.size)
    xs, qs = x[win], q[win]
    A = np.vstack([np.ones_like(xs), 1.0 / xs]).T
    (a, b), *_ = np.linalg.lstsq(A, qs, rcond=None)
    env = A @ np.array([a, b])
    shift = max(0.0, float(np.max(env - qs)))
    return float(a) - shift, float(b), env - shift


def _check_grid(log_scale: np.ndarray) -> None:
    if log_scale.size < 6:
        raise InsufficientGridError(f"need at least 6 strikes, got {log_scale.size}")
    if np.any(np.diff(log_scale) <= 0.0):
        raise InsufficientGridError("strikes must move monotonically into the wing")
    if log_scale[0] <= 0.0:
        raise InsufficientGridError("all strikes must lie beyond the money (log-moneyness > 0)")
    decades = (log_scale[-1] - log_scale[0]) / math.log(10.0)
    if decades < MIN_DECADES:
        raise InsufficientGridError(f"grid spans {decades:.2f} decades of strike, need >= {MIN_DECADES}")


def _index_from_ratio(x: np.ndarray, q: np.ndarray) -> tuple[float, bool, dict]:
    a, b, env = _extrapolate(x, q)
    meta = {"intercept": a, "inverse_log_coef": b, "window_envelope": env.tolist()}
    if a > INFINITE_INDEX_THRESHOLD and trend(q[tail_window(q.size)]) == "increasing":
        return math.inf, True, meta
    return max(a, 0.0), False, meta


def _local_slopes(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Finite-difference ``dy/dx`` at the midpoints."""
    return 0.5 * (x[1:] + x[:-1]), np.diff(y) / np.diff(x)


def _slope_index(x: np.ndarray, logv: np.ndarray, offset: float) -> float:
    mids, slopes = _local_slopes(x, -logv)
    a, _, _ = _extrapolate(mids, slopes - offset)
    return max(a, 0.0)


class _WindowIntegrals:
    """``log int e^{log_tail(v) + c v} dv`` over unit windows beyond each anchor.

    The tail function is sampled once on a Simpson grid per window, so probing
    many exponents ``c`` costs no further quadrature.  ``direction`` is +1 for
    windows ``[t, t+1]`` and -1 for ``[-t-1, -t]``.
    """

    def __init__(self, log_tail: Callable[[float], float], anchors: np.ndarray, direction: float):
        self.anchors = anchors
        offsets = np.linspace(0.0, 1.0, _SIMPSON_POINTS)
        self.v = np.array([t + offsets if direction > 0 else -t - 1.0 + offsets for t in anchors])
        self.vals = np.array([[log_tail(float(v)) for v in row] for row in self.v])
        w = np.ones(_SIMPSON_POINTS)
        w[1:-1:2], w[2:-1:2] = 4.0, 2.0
        self.log_w = np.log(w / (3.0 * (_SIMPSON_POINTS - 1)))

    def growth(self, c: float) -> float:
        """Slope of the window log-integrals against the anchor."""
        vals = special.logsumexp(self.vals + c * self.v + self.log_w, axis=1)
        ok = np.isfinite(vals)
        if ok.sum() < 3:
            return -math.inf
        return float(np.polyfit(self.anchors[ok], vals[ok], 1)[0])


def _divergence_onset(rate: Callable[[float], float]) -> float:
    """Smallest p on the ladder (refined by bisection) where ``rate(p) >= 0``."""
    prev = None
    for p in _P_LADDER:
        if rate(p) >= 0.0:
            if prev is None:
                return 0.0
            lo, hi = prev, p
            while hi - lo > LADDER_RESOLUTION:
                mid = 0.5 * (lo + hi)
                if rate(mid) >= 0.0:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        prev = p
    return math.inf


def _finite_delta(a: float | None, b: float | None) -> float:
    if a is None or b is None:
        return math.nan
    if math.isinf(a) and math.isinf(b):
        return 0.0
    return abs(a - b)


def _pairwise(named: dict[str, float | None]) -> dict[str, float]:
    keys = list(named)
    return {
        f"{k1}-{k2}": _finite_delta(named[k1], named[k2])
        for i, k1 in enumerate(keys)
        for k2 in keys[i + 1 :]
        if named[k1] is not None and named[k2] is not None
    }


def lee_slope_right(l: float) -> float:
    """``sqrt(1 + l) - sqrt(l)``; 0 for ``l = inf``."""
    if math.isinf(l):
        return 0.0
    return 1.0 / (math.sqrt(1.0 + l) + math.sqrt(l))


def lee_slope_left(m: float) -> float:
    """``sqrt(m) - sqrt(m - 1)`` for ``m >= 1``."""
    if math.isinf(m):
        return 0.0
    if m < 1.0:
        return math.nan
    return 1.0 / (math.sqrt(m) + math.sqrt(m - 1.0))


def estimate_right_index(
    frame: MarketFrame, C: PriceCurve, grid: Sequence[float], spec: DistributionSpec | None = None
) -> TailIndexReport:
    """Estimate the right-wing indices ``l``, ``r*`` (and ``p~``, ``s*`` with a spec).

    ``l`` is read from ``log(1/C) / log K``, ``r*`` from the local log-log
    slope of ``C``, ``s*`` from the log-log slope of the ccdf minus one and
    ``p~`` from where the moment integrand ``y^p ccdf(y)`` stops decaying.
    The four are reported with their pairwise differences.
    """
    strikes = np.asarray(grid, dtype=float)
    x = np.log(strikes)
    _check_grid(x)
    logc = np.array([C.log_price(k) for k in strikes])
    l_hat, l_inf, meta = _index_from_ratio(x, -logc / x)
    r_star = math.inf if l_inf else _slope_index(x, logc, 0.0)
    s_star = p_tilde = None
    if spec is not None:
        logrho = np.array([log_ccdf(spec, k) for k in strikes])
        if np.any(~np.isfinite(logrho)):
            raise NonPositivePriceError("ccdf vanishes on the grid; the tail index is infinite")
        s_star = _slope_index(x, logrho, 1.0)
        # log of int_{Y}^{eY} y^p ccdf(y) dy as a function of log Y
        windows = _WindowIntegrals(lambda v: log_ccdf(spec, math.exp(v)), x[tail_window(x.size)], 1.0)
        p_tilde = _divergence_onset(lambda p: windows.growth(p + 1.0))
    named = {"l": l_hat, "r*": r_star, "s*": s_star, "p~": p_tilde}
    meta.update({"log_strikes": x.tolist(), "window": [float(x[tail_window(x.size)][0]), float(x[-1])]})
    return TailIndexReport(
        l_hat=l_hat,
        p_tilde_hat=p_tilde,
        r_star_hat=r_star,
        s_star_hat=s_star,
        lee_slope=lee_slope_right(l_hat),
        l_infinite=l_inf,
        deltas=_pairwise(named),
        grid_meta=meta,
    )


def estimate_left_index(
    frame: MarketFrame, P: PriceCurve, grid: Sequence[float], spec: DistributionSpec | None = None
) -> LeftIndexReport:
    """Estimate the left-wing indices ``m``, ``u*`` (and ``q~``, ``v*`` with a spec).

    ``grid`` holds strikes decreasing toward 0.  ``m < 1`` cannot come from a
    genuine put pricing function and is flagged via ``consistent=False``.
    """
    strikes = np.asarray(grid, dtype=float)
    x = -np.log(strikes)
    _check_grid(x)
    logp = np.array([P.log_price(k) for k in strikes])
    if np.any(logp >= np.log(strikes)):
        raise DomainError("put prices must stay below the strike")
    m_hat, m_inf, meta = _index_from_ratio(x, -logp / x)
    # P = O(K^u): slope of log P against log K, i.e. -d(log P)/d(log 1/K)
    u_star = math.inf if m_inf else _slope_index(x, logp, 0.0)
    v_star = q_tilde = None
    if spec is not None:
        logeta = np.array([log_cdf(spec, k) for k in strikes])
        if np.any(~np.isfinite(logeta)):
            raise NonPositivePriceError("cdf vanishes on the grid; the left index is infinite")
        v_star = _slope_index(x, logeta, 0.0)
        # log of int_{Y/e}^{Y} y^{-q-1} cdf(y) dy as a function of log 1/Y
        windows = _WindowIntegrals(lambda v: log_cdf(spec, math.exp(v)), x[tail_window(x.size)], -1.0)
        q_tilde = _divergence_onset(lambda q: windows.growth(-q))
    shifted = {
        "m": m_hat,
        "u*": u_star,
        "q~+1": None if q_tilde is None else q_tilde + 1.0,
        "v*+1": None if v_star is None else v_star + 1.0,
    }
    meta.update({"log_inv_strikes": x.tolist(), "window": [float(x[tail_window(x.size)][0]), float(x[-1])]})
    return LeftIndexReport(
        m_hat=m_hat,
        q_tilde_hat=q_tilde,
        u_star_hat=u_star,
        v_star_hat=v_star,
        lee_slope_left=lee_slope_left(m_hat),
        m_infinite=m_inf,
        consistent=m_hat >= 1.0 - 1e-9,
        deltas=_pairwise(shifted),
        grid_meta=meta,
    )


def moment_criterion(C: PriceCurve, p: float, grid: Sequence[float]) -> str:
    """Trend of ``K^p C(K)`` on the trailing window: bounded moments give 'decreasing'."""
    strikes = np.asarray(grid, dtype=float)
    vals = np.array([p * math.log(k) + C.log_price(k) for k in strikes])
    return trend(vals[tail_window(strikes.size)])
