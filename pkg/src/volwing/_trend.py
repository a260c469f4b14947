"""Finite-sample proxies for limits: Mann-Kendall sign trend and tail windows."""

from __future__ import annotations

import numpy as np

# |S| / pairs above this is read as a monotone trend
TREND_THRESHOLD = 0.5


def tail_window(n: int, fraction: float = 1.0 / 3.0, minimum: int = 3) -> slice:
    """Slice selecting the last ``fraction`` of ``n`` points (at least ``minimum``)."""
    m = max(minimum, int(np.ceil(n * fraction)))
    return slice(max(0, n - m), n)


def mann_kendall(values) -> float:
    """Normalised Mann-Kendall statistic in [-1, 1] (+1: strictly increasing)."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 2:
        return 0.0
    diff = v[None, :] - v[:, None]
    s = np.sign(diff[np.triu_indices(n, k=1)]).sum()
    return float(s / (n * (n - 1) / 2))


def trend(values, threshold: float = TREND_THRESHOLD) -> str:
    """'increasing', 'decreasing' or 'none'."""
    s = mann_kendall(values)
    if s >= threshold:
        return "increasing"
    if s <= -threshold:
        return "decreasing"
    return "none"
