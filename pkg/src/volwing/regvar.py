"""Numerical checks for regular variation, slow variation with remainder,
Bingham's lemma and Karamata's theorem.

Limits at infinity are judged on the trailing third of a probe grid: medians
for values, the Mann-Kendall sign statistic for "still drifting".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._trend import tail_window, trend
from .curves import Evaluable
from .errors import DomainError, InsufficientGridError
from .quadrature import log_integral

DEFAULT_LAMBDAS = (2.0, 5.0, 10.0)
RV_SPREAD = 0.1
SV_INDEX = 0.05
# growth of log(ratio) per unit of log log x tolerated as "bounded"
BOUNDED_SLOPE = 0.1
SIM_TOLERANCE = 0.05

VERDICTS = ("regularly-varying", "slowly-varying", "slowly-varying-with-remainder", "inconclusive")


@dataclass(frozen=True)
class RVDiagnostics:
    index_hat: float
    lambda_probes: tuple[float, ...]
    max_remainder_ratio: float
    verdict: str
    spread: float = math.nan
    smooth_index: float = math.nan
    remainder_ratios: tuple[float, ...] = ()
    notes: tuple[str, ...] = field(default_factory=tuple)


def _grid(x_grid: Sequence[float], decades: float) -> np.ndarray:
    x = np.asarray(x_grid, dtype=float)
    if x.size < 6 or np.any(np.diff(x) <= 0.0) or x[0] <= 0.0:
        raise InsufficientGridError("need at least 6 increasing positive probe points")
    span = math.log10(x[-1] / x[0])
    if span < decades:
        raise InsufficientGridError(f"grid spans {span:.2f} decades, need >= {decades}")
    return x


def _lambdas(lambdas: Sequence[float]) -> tuple[float, ...]:
    lam = tuple(float(v) for v in lambdas)
    if not lam or any(v <= 1.0 for v in lam):
        raise DomainError("lambda probes must all exceed 1")
    return lam


def _log_pos(f: Evaluable, x: float) -> float:
    v = float(f(x))
    if not v > 0.0:
        raise DomainError(f"function must be positive, got {v!r} at x={x!r}")
    return math.log(v)


def _log_ratios(f: Evaluable, xs: np.ndarray, lam: tuple[float, ...]) -> np.ndarray:
    """``log(f(lam x) / f(x))`` with shape (len(xs), len(lam))."""
    out = np.empty((xs.size, len(lam)))
    for i, x in enumerate(xs):
        base = _log_pos(f, x)
        for j, l in enumerate(lam):
            out[i, j] = _log_pos(f, l * x) - base
    return out


def smooth_index(f: Evaluable, x: float, rel_step: float = 1e-4) -> float:
    """Central-difference estimate of ``x f'(x) / f(x)``."""
    up = _log_pos(f, x * math.exp(rel_step))
    dn = _log_pos(f, x * math.exp(-rel_step))
    return (up - dn) / (2.0 * rel_step)


def rv_index_estimate(
    f: Evaluable, x_grid: Sequence[float], lambdas: Sequence[float] = DEFAULT_LAMBDAS
) -> RVDiagnostics:
    """Median of ``log(f(lam x)/f(x)) / log lam`` over the tail window."""
    x = _grid(x_grid, 3.0)
    lam = _lambdas(lambdas)
    xs = x[tail_window(x.size)]
    idx = _log_ratios(f, xs, lam) / np.log(np.array(lam))[None, :]
    index_hat = float(np.median(idx))
    spread = float(idx.max() - idx.min())
    if spread < RV_SPREAD:
        verdict = "slowly-varying" if abs(index_hat) < SV_INDEX else "regularly-varying"
    else:
        verdict = "inconclusive"
    return RVDiagnostics(
        index_hat=index_hat,
        lambda_probes=lam,
        max_remainder_ratio=0.0,
        verdict=verdict,
        spread=spread,
        smooth_index=smooth_index(f, float(x[-1])),
    )


def svr_check(
    l: Evaluable, g: Evaluable, x_grid: Sequence[float], lambdas: Sequence[float] = DEFAULT_LAMBDAS
) -> RVDiagnostics:
    """Slow variation with remainder: is ``|l(lam x)/l(x) - 1| / g(x)`` bounded?

    The ratio counts as bounded unless, on the tail window, it both trends
    upward (Mann-Kendall) and grows faster than ``(log log x)^0.1``.  A
    bounded ratio against a decreasing ``g`` yields the verdict
    ``slowly-varying-with-remainder``; otherwise the plain index estimate
    decides.
    """
    x = _grid(x_grid, 3.0)
    lam = _lambdas(lambdas)
    lr = _log_ratios(l, x, lam)
    gv = np.array([float(g(v)) for v in x])
    if np.any(gv <= 0.0):
        raise DomainError("remainder g must be positive")
    ratios = np.max(np.abs(np.expm1(lr)), axis=1) / gv
    win = tail_window(x.size)
    rw = ratios[win]
    notes = []
    if np.all(rw == 0.0):
        bounded, growth = True, 0.0
    else:
        pos = rw > 0.0
        lx = np.log(np.log(x[win][pos]))
        growth = float(np.polyfit(lx, np.log(rw[pos]), 1)[0]) if pos.sum() >= 3 else 0.0
        bounded = not (trend(rw) == "increasing" and growth > BOUNDED_SLOPE)
        notes.append(f"tail growth exponent in log log x: {growth:.3g}")
    base = rv_index_estimate(l, x, lam)
    g_vanishes = trend(gv[win]) == "decreasing" or np.all(rw == 0.0)
    if bounded and g_vanishes:
        # |l(lam x)/l(x) - 1| <= const * g(x) -> 0 makes l slowly varying by itself
        verdict = "slowly-varying-with-remainder"
    elif abs(base.index_hat) < SV_INDEX and base.spread < RV_SPREAD:
        verdict = "slowly-varying"
    else:
        verdict = base.verdict if not bounded else "inconclusive"
    return RVDiagnostics(
        index_hat=base.index_hat,
        lambda_probes=lam,
        max_remainder_ratio=float(ratios.max()),
        verdict=verdict,
        spread=base.spread,
        smooth_index=base.smooth_index,
        remainder_ratios=tuple(ratios.tolist()),
        notes=tuple(notes) + ("only the first-order smooth-variation condition is probed",),
    )


@dataclass(frozen=True)
class RatioReport:
    points: tuple[float, ...]
    ratios: tuple[float, ...]
    target: float
    trend: str

    @property
    def last(self) -> float:
        return self.ratios[-1]


def bingham_check(f: Evaluable, alpha_hint: float, K_grid: Sequence[float]) -> RatioReport:
    """``-log(int_K^inf e^{-f}) / f(K)`` per grid point; tends to 1 for ``f`` in ``R_alpha``."""
    if not alpha_hint > 0.0:
        raise DomainError("Bingham's lemma needs a positive index")
    ks = np.asarray(K_grid, dtype=float)
    ratios = []
    for K in ks:
        fk = float(f(K))
        # first chunk sized to the local decay scale 1 / f'(K)
        h = 1e-6 * max(abs(K), 1.0)
        slope = abs(float(f(K + h)) - fk) / h
        step = min(max(1.0 / slope, 1e-6), 1e6) if slope > 0.0 else 1.0
        li = log_integral(lambda y: -float(f(y)), float(K), step=step, rtol=1e-11)
        ratios.append(-li / fk)
    return RatioReport(tuple(ks.tolist()), tuple(ratios), 1.0, trend(np.abs(np.array(ratios) - 1.0)))


def karamata_check(l: Evaluable, alpha: float, x_grid: Sequence[float]) -> RatioReport:
    """``x^{alpha+1} l(x) / int_x^inf t^alpha l(t) dt``; tends to ``-alpha-1``.

    ``l`` is evaluated beyond each grid point until the integrand is
    negligible, so grid points should stay well below ``e^700``.
    """
    if not alpha < -1.0:
        raise DomainError(f"Karamata's theorem needs alpha < -1, got {alpha}")
    xs = np.asarray(x_grid, dtype=float)
    ratios = []
    for x in xs:
        u0 = math.log(x)
        li = log_integral(lambda u: (alpha + 1.0) * u + _log_pos(l, math.exp(u)), u0, rtol=1e-12)
        ratios.append(math.exp((alpha + 1.0) * u0 + _log_pos(l, x) - li))
    target = -alpha - 1.0
    return RatioReport(tuple(xs.tolist()), tuple(ratios), target, trend(np.abs(np.array(ratios) - target)))


@dataclass(frozen=True)
class RelationVerdict:
    mode: str
    holds: bool | None
    bounds: tuple[float, float]
    constant: float
    trend: str
    verdict: str


_MODES = {"≈": "approx", "approx": "approx", "∼": "sim", "~": "sim", "sim": "sim", "O": "big-o", "big-o": "big-o"}


def asym_relation_check(
    f1: Evaluable,
    f2: Evaluable,
    mode: str,
    grid: Sequence[float],
    rho: Callable[[float], float] | None = None,
) -> RelationVerdict:
    """Check ``f1 ≈ f2`` (two-sided bounds), ``f1 ∼ f2`` (ratio to 1) or
    ``f1 / f2 - 1 = O(rho)`` on the tail window of ``grid``."""
    kind = _MODES.get(mode)
    if kind is None:
        raise DomainError(f"unknown relation mode {mode!r}")
    ys = np.asarray(grid, dtype=float)
    win = ys[tail_window(ys.size)]
    r = np.array([math.exp(_log_pos(f2, y) - _log_pos(f1, y)) for y in win])
    lo, hi = float(r.min()), float(r.max())
    if kind == "approx":
        tr = "none" if hi / lo < 1.0 + 1e-12 else trend(r)
        holds = bool(lo > 0.0 and math.isfinite(hi) and tr == "none")
        return RelationVerdict(mode, holds, (lo, hi), math.nan, tr, "holds" if holds else "inconclusive")
    dev = np.abs(r - 1.0)
    if kind == "sim":
        tr = "none" if np.all(dev < 1e-12) else trend(dev)
        holds = bool(dev.max() < SIM_TOLERANCE and tr != "increasing")
        return RelationVerdict(mode, holds, (lo, hi), float(dev.max()), tr, "holds" if holds else "fails")
    if rho is None:
        raise DomainError("O mode needs a rate function rho")
    # f1/f2 - 1 = O(rho)
    dev = np.abs(1.0 / r - 1.0)
    norm = dev / np.array([float(rho(y)) for y in win])
    # a flat sequence up to round-off has no trend
    tr = "none" if np.all(norm < 1e-300) or np.ptp(norm) <= 1e-9 * norm.max() else trend(norm)
    holds = tr != "increasing"
    return RelationVerdict(mode, holds, (lo, hi), float(norm.max()), tr, "holds" if holds else "inconclusive")
