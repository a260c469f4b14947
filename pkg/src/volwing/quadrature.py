"""Log-domain adaptive quadrature for heavy and very thin tails.

All tail integrals in the package go through :func:`log_integral`, which
returns ``log(int_a^b exp(log_f(u)) du)``.  Working with the logarithm of the
integrand keeps values such as ``exp(-80000)`` representable, and splitting a
semi-infinite range into geometrically growing chunks lets each chunk carry
its own scale factor.  Each chunk is integrated by :func:`scipy.integrate.quad`
(QUADPACK QAGS).
"""

from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .errors import NonIntegrableTailError, QuadratureError

LogIntegrand = Callable[[float], float]

_PROBES = 33
_MAX_CHUNKS = 90


def _safe(log_f: LogIntegrand, u: float) -> float:
    v = log_f(u)
    if v is None or math.isnan(v):
        return -math.inf
    return float(v)


def _chunk(log_f: LogIntegrand, lo: float, hi: float, rtol: float) -> tuple[float, float]:
    """Return (log contribution, absolute error relative to the contribution)."""
    probes = np.linspace(lo, hi, _PROBES)
    vals = np.array([_safe(log_f, u) for u in probes])
    shift = float(np.max(vals))
    if shift == -math.inf:
        return -math.inf, 0.0
    if not math.isfinite(shift):
        raise QuadratureError(f"integrand overflow on [{lo:g}, {hi:g}]", achieved=math.inf)

    def g(u: float) -> float:
        return math.exp(_safe(log_f, u) - shift)

    inner = [float(p) for p, v in zip(probes[1:-1], vals[1:-1]) if v > shift - 40.0]
    # breakpoints help QAGS find narrow peaks inside wide chunks
    pts = inner[:: max(1, len(inner) // 8)] or None
    with warnings.catch_warnings():
        # QUADPACK roundoff warnings are superseded by the achieved-error check
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(g, lo, hi, epsabs=0.0, epsrel=rtol, limit=400, points=pts)
    if val <= 0.0:
        return -math.inf, 0.0
    return shift + math.log(val), err / val


def _log_integral_right(log_f: LogIntegrand, a: float, step: float, rtol: float) -> tuple[float, float]:
    parts: list[float] = []
    errs: list[float] = []
    quiet = 0
    lo = a
    width = step
    for _ in range(_MAX_CHUNKS):
        hi = lo + width
        part, rel = _chunk(log_f, lo, hi, rtol / 10.0)
        parts.append(part)
        errs.append(rel)
        total = logsumexp(parts) if any(p > -math.inf for p in parts) else -math.inf
        if total > -math.inf and part - total < math.log(rtol * 1e-3):
            quiet += 1
            if quiet >= 2:
                break
        else:
            quiet = 0
        lo = hi
        width *= 2.0
    else:
        if total == -math.inf:
            return -math.inf, 0.0
        raise NonIntegrableTailError(
            f"tail integral from {a:g} did not converge", achieved=math.exp(parts[-1] - total)
        )
    achieved = sum(e * math.exp(p - total) for p, e in zip(parts, errs) if p > -math.inf)
    return total, achieved


def log_integral(
    log_f: LogIntegrand,
    a: float,
    b: float = math.inf,
    *,
    rtol: float = 1e-10,
    step: float = 1.0,
) -> float:
    """Logarithm of ``int_a^b exp(log_f(u)) du``.

    ``log_f`` may return ``-inf`` where the integrand vanishes.  Infinite
    endpoints are handled by chunk doubling with widths starting at ``step``.
    Returns ``-inf`` for an identically zero integrand.

    Raises:
        QuadratureError: achieved relative error exceeds ``100 * rtol``.
        NonIntegrableTailError: an infinite tail keeps contributing.
    """
    if b < a:
        raise ValueError("log_integral needs a <= b")
    if a == b:
        return -math.inf
    if math.isinf(a) and math.isinf(b):
        left = log_integral(log_f, -math.inf, 0.0, rtol=rtol, step=step)
        right = log_integral(log_f, 0.0, math.inf, rtol=rtol, step=step)
        return float(np.logaddexp(left, right))
    if math.isinf(b):
        total, achieved = _log_integral_right(log_f, a, step, rtol)
    elif math.isinf(a):
        total, achieved = _log_integral_right(lambda v: log_f(-v), -b, step, rtol)
    else:
        # finite range: split into a handful of chunks so each gets its own scale
        edges = np.linspace(a, b, 9)
        parts, errs = zip(*(_chunk(log_f, lo, hi, rtol / 10.0) for lo, hi in zip(edges[:-1], edges[1:])))
        if all(p == -math.inf for p in parts):
            return -math.inf
        total = float(logsumexp(parts))
        achieved = sum(e * math.exp(p - total) for p, e in zip(parts, errs) if p > -math.inf)
    if achieved > 100.0 * rtol:
        raise QuadratureError(f"integral on [{a:g}, {b:g}] inaccurate", achieved=achieved)
    return float(total)


def integral(f: Callable[[float], float], a: float, b: float = math.inf, *, rtol: float = 1e-10) -> float:
    """Plain-domain convenience wrapper for a non-negative integrand."""

    def log_f(u: float) -> float:
        v = f(u)
        return math.log(v) if v > 0.0 else -math.inf

    return math.exp(log_integral(log_f, a, b, rtol=rtol))
