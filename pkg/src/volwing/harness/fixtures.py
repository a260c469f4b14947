"""Synthetic price surfaces used by the ``validate`` scenario and the tests."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..arbitrage import SurfaceGrid
from ..bs_core import MarketFrame, bs_call_price, bs_put_price

DEFAULT_EXPIRIES = (0.25, 0.5, 1.0, 2.0)


def bs_strikes(x0: float = 1.0, low: float = 0.01, high: float = 100.0, per_decade: int = 200) -> np.ndarray:
    n = int(round(np.log10(high / low) * per_decade)) + 1
    return x0 * np.geomspace(low, high, n)


def bs_surface(
    x0: float = 1.0,
    r: float = 0.02,
    sigma: float = 0.2,
    expiries: Sequence[float] = DEFAULT_EXPIRIES,
    strikes: Sequence[float] | None = None,
) -> tuple[SurfaceGrid, list[np.ndarray]]:
    """Black-Scholes call surface and the matching put surface."""
    K = bs_strikes(x0) if strikes is None else np.asarray(strikes, dtype=float)
    calls, puts = [], []
    for T in expiries:
        f = MarketFrame(x0, r, T)
        calls.append([bs_call_price(f, k, sigma) for k in K])
        puts.append([bs_put_price(f, k, sigma) for k in K])
    frame = MarketFrame(x0, r, max(expiries))
    return SurfaceGrid.from_matrix(expiries, K, calls, frame), [np.asarray(p) for p in puts]
