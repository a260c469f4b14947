"""Static-arbitrage validation of sampled call price surfaces.

A surface passes when, slice by slice, the forward-valued call prices are
convex in strike, the implied risk-neutral measure has unit mass and mean
``x0 e^{rT}``, prices at a fixed moneyness grow with expiry, the zero-expiry
slice (if sampled) is the intrinsic value, and prices die out at large
strikes.  Failures are reported with the location that witnesses them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._trend import trend
from .bs_core import MarketFrame
from .errors import DomainError, MisalignedGridError, NegativeWeightError

TOL_CONVEX = 1e-10
TOL_MEASURE = 1e-3
TOL_CALENDAR = 1e-10
TOL_DECAY = 1e-3
TOL_PARITY = 1e-9
ZERO_EXPIRY = 1e-12

PASS, FAIL, NOT_TESTABLE = "pass", "fail", "not-testable"


@dataclass(frozen=True)
class SurfaceGrid:
    """Call prices ``prices[i][j] = C(expiries[i], strikes[i][j])``.

    Each expiry has its own increasing strike vector.  ``frame.T`` is ignored.
    """

    expiries: tuple[float, ...]
    strikes: tuple[np.ndarray, ...]
    prices: tuple[np.ndarray, ...]
    frame: MarketFrame

    def __post_init__(self) -> None:
        if len(self.expiries) == 0:
            raise DomainError("surface has no expiries")
        if not (len(self.expiries) == len(self.strikes) == len(self.prices)):
            raise MisalignedGridError("expiries, strikes and prices differ in length")
        if np.any(np.diff(self.expiries) <= 0.0) or self.expiries[0] < 0.0:
            raise DomainError("expiries must be non-negative and strictly increasing")
        for T, K, C in zip(self.expiries, self.strikes, self.prices):
            if K.shape != C.shape or K.ndim != 1:
                raise MisalignedGridError(f"strike/price shapes differ at T={T}")
            if np.any(np.diff(K) <= 0.0) or K[0] <= 0.0:
                raise DomainError(f"strikes must be positive and strictly increasing at T={T}")
            # prices below the float range are stored as 0
            if np.any(C < 0.0) or not np.all(np.isfinite(C)):
                raise DomainError(f"prices must be finite and non-negative at T={T}")

    @classmethod
    def from_matrix(
        cls, expiries: Sequence[float], strikes: Sequence[float], prices, frame: MarketFrame
    ) -> "SurfaceGrid":
        """Surface with one strike vector shared by every expiry."""
        K = np.asarray(strikes, dtype=float)
        P = np.asarray(prices, dtype=float)
        if P.shape != (len(expiries), K.size):
            raise MisalignedGridError(f"price matrix shape {P.shape} != ({len(expiries)}, {K.size})")
        return cls(tuple(float(t) for t in expiries), tuple(K.copy() for _ in expiries), tuple(P), frame)

    def forward(self, i: int) -> float:
        return self.frame.x0 * math.exp(self.frame.r * self.expiries[i])

    def replace_prices(self, prices: Sequence[np.ndarray]) -> "SurfaceGrid":
        return SurfaceGrid(self.expiries, self.strikes, tuple(np.asarray(p, dtype=float) for p in prices), self.frame)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Risk-neutral measure read off slope increments of ``e^{rT} C(T, .)``.

    ``weights[j]`` sits at ``strikes[j]`` for interior strikes; the mass below
    the first strike and above the last strike are boundary cells.
    """

    strikes: np.ndarray
    weights: np.ndarray  # interior strikes 1..n-1
    left_mass: float
    right_mass: float
    total_mass: float
    mean: float
    forward: float


def _slopes(K: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.diff(c) / np.diff(K)


def discrete_measure(grid: SurfaceGrid, expiry_index: int, tol: float = TOL_CONVEX) -> DiscreteMeasure:
    """Discrete version of the second strike-derivative of ``e^{rT} C``.

    Interior weights are slope increments.  Below the first strike the mass is
    ``1 + s_0`` (the first slope measures ``-P[X > K_0]``), placed at
    ``K_0 / 2``; above the last strike it is ``-s_last``, whose contribution
    to the mean is completed by ``e^{rT} C(K_n)`` (truncation correction).

    Raises:
        NegativeWeightError: a slope increment is below ``-tol * x0``.
    """
    T = grid.expiries[expiry_index]
    K = grid.strikes[expiry_index]
    if K.size < 3:
        raise DomainError("need at least 3 strikes for a discrete measure")
    c = grid.prices[expiry_index] * math.exp(grid.frame.r * T)
    s = _slopes(K, c)
    w = np.diff(s)
    worst = int(np.argmin(w)) if w.size else 0
    if w.size and w[worst] < -tol * grid.frame.x0:
        raise NegativeWeightError(
            f"negative measure weight {w[worst]:.3g} at T={T}, K={K[worst + 1]!r} (convexity violated)",
            expiry_index=expiry_index,
            strike=float(K[worst + 1]),
            weight=float(w[worst]),
        )
    left = 1.0 + s[0]
    right = -s[-1]
    total = left + float(w.sum()) + right
    mean = left * 0.5 * K[0] + float(np.dot(K[1:-1], w)) + c[-1] + K[-1] * right
    return DiscreteMeasure(K, w, float(left), float(right), float(total), float(mean), grid.forward(expiry_index))


@dataclass(frozen=True)
class ConditionResult:
    status: str
    witness: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ValidationReport:
    conditions: dict[str, ConditionResult]

    @property
    def verdict(self) -> str:
        tested = [c.status for c in self.conditions.values() if c.status != NOT_TESTABLE]
        return PASS if all(s == PASS for s in tested) else FAIL

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def summary_lines(self) -> list[str]:
        lines = []
        for name, res in self.conditions.items():
            wit = ", ".join(f"{k}={v}" for k, v in res.witness.items())
            lines.append(f"{name}: {res.status}" + (f" ({wit})" if wit else ""))
        lines.append(f"verdict: {self.verdict}")
        return lines


def _check_convexity(grid: SurfaceGrid, tol: float) -> ConditionResult:
    worst = (math.inf, None, None)
    for i, (K, C) in enumerate(zip(grid.strikes, grid.prices)):
        if K.size < 3:
            continue
        w = np.diff(_slopes(K, C * math.exp(grid.frame.r * grid.expiries[i])))
        j = int(np.argmin(w))
        if w[j] < worst[0]:
            worst = (float(w[j]), grid.expiries[i], float(K[j + 1]))
    status = PASS if worst[0] >= -tol * grid.frame.x0 else FAIL
    return ConditionResult(status, {"worst_weight": worst[0], "expiry": worst[1], "strike": worst[2]})


def _check_measure(grid: SurfaceGrid, tol_measure: float, tol_convex: float) -> ConditionResult:
    worst_mean = (0.0, None)
    masses = []
    bad_boundary = None
    for i, T in enumerate(grid.expiries):
        if T <= ZERO_EXPIRY or grid.strikes[i].size < 3:
            continue
        try:
            m = discrete_measure(grid, i, tol=math.inf)
        except NegativeWeightError:  # pragma: no cover - tol=inf never raises
            raise
        masses.append(m.total_mass)
        err = abs(m.mean - m.forward) / m.forward
        if err > abs(worst_mean[0]):
            worst_mean = (m.mean / m.forward - 1.0, T)
        if bad_boundary is None and not (-tol_measure <= m.left_mass <= 1.0 + tol_measure and m.right_mass >= -tol_measure):
            bad_boundary = (T, m.left_mass, m.right_mass)
    if not masses:
        return ConditionResult(NOT_TESTABLE, {"reason": "no positive expiry with >= 3 strikes"})
    ok = abs(worst_mean[0]) <= tol_measure and bad_boundary is None
    wit = {
        "max_mass_error": float(max(abs(m - 1.0) for m in masses)),
        "worst_relative_mean_error": worst_mean[0],
        "expiry": worst_mean[1],
    }
    if bad_boundary is not None:
        wit["bad_boundary_mass"] = bad_boundary
    return ConditionResult(PASS if ok else FAIL, wit)


def _convex_lower_bound(K: np.ndarray, C: np.ndarray, x: float) -> float:
    """Largest value a convex interpolant of (K, C) can guarantee at ``x``."""
    j = int(np.searchsorted(K, x, side="right")) - 1
    j = min(max(j, 0), K.size - 2)
    if x == K[j]:
        return float(C[j])
    if x == K[j + 1]:
        return float(C[j + 1])
    lb = -math.inf
    if j >= 1:
        s = (C[j] - C[j - 1]) / (K[j] - K[j - 1])
        lb = max(lb, C[j] + s * (x - K[j]))
    if j + 2 < K.size:
        s = (C[j + 2] - C[j + 1]) / (K[j + 2] - K[j + 1])
        lb = max(lb, C[j + 1] + s * (x - K[j + 1]))
    if lb == -math.inf:
        lb = min(C[j], C[j + 1])
    return float(lb)


def _check_calendar(grid: SurfaceGrid, tol: float) -> ConditionResult:
    if len(grid.expiries) < 2:
        return ConditionResult(NOT_TESTABLE, {"reason": "single expiry"})
    r = grid.frame.r
    worst = (0.0, None, None, None)
    for i in range(len(grid.expiries) - 1):
        T1, T2 = grid.expiries[i], grid.expiries[i + 1]
        K1, C1 = grid.strikes[i], grid.prices[i]
        K2, C2 = grid.strikes[i + 1], grid.prices[i + 1]
        for Kb, Cb in zip(K2, C2):
            # same moneyness k = K e^{-rT} on the earlier slice
            Ka = Kb * math.exp(-r * (T2 - T1))
            if not (K1[0] <= Ka <= K1[-1]):
                continue
            deficit = Cb - _convex_lower_bound(K1, C1, Ka)
            if deficit < worst[0]:
                worst = (float(deficit), T1, T2, float(Kb * math.exp(-r * T2)))
    ok = worst[0] >= -tol * grid.frame.x0
    return ConditionResult(
        PASS if ok else FAIL,
        {"worst_deficit": worst[0], "expiry_pair": (worst[1], worst[2]), "moneyness_strike": worst[3]},
    )


def _check_initial(grid: SurfaceGrid, tol: float) -> ConditionResult:
    if grid.expiries[0] > ZERO_EXPIRY:
        return ConditionResult(NOT_TESTABLE, {"reason": "no zero-expiry slice"})
    K, C = grid.strikes[0], grid.prices[0]
    err = np.abs(C - np.maximum(grid.frame.x0 - K, 0.0))
    j = int(np.argmax(err))
    return ConditionResult(PASS if err[j] <= tol * grid.frame.x0 else FAIL, {"max_error": float(err[j]), "strike": float(K[j])})


def _check_decay(grid: SurfaceGrid, tol_decay: float) -> ConditionResult:
    worst = (-math.inf, None)
    for T, K, C in zip(grid.expiries, grid.strikes, grid.prices):
        sel = K >= K[-1] / 10.0
        tail = C[sel]
        if tail.size < 3:
            return ConditionResult(NOT_TESTABLE, {"reason": f"fewer than 3 strikes in the last decade at T={T}"})
        falling = bool(np.all(np.diff(tail) <= 0.0)) or trend(tail) == "decreasing"
        level = float(tail[-1]) / grid.frame.x0
        if not falling:
            return ConditionResult(FAIL, {"expiry": T, "reason": "prices not decreasing over the last decade"})
        if level > worst[0]:
            worst = (level, T)
    ok = worst[0] < tol_decay
    return ConditionResult(PASS if ok else FAIL, {"max_last_price_over_x0": worst[0], "expiry": worst[1]})


def parity_check(grid: SurfaceGrid, puts: Sequence[np.ndarray]) -> float:
    """``max |C - P - x0 + K e^{-rT}|`` over the surface."""
    if len(puts) != len(grid.expiries):
        raise MisalignedGridError("put surface has a different number of expiries")
    worst = 0.0
    for T, K, C, P in zip(grid.expiries, grid.strikes, grid.prices, puts):
        P = np.asarray(P, dtype=float)
        if P.shape != C.shape:
            raise MisalignedGridError(f"put slice shape {P.shape} != call slice shape {C.shape} at T={T}")
        dev = np.abs(C - P - grid.frame.x0 + K * math.exp(-grid.frame.r * T))
        worst = max(worst, float(dev.max()))
    return worst


def validate_surface(
    grid: SurfaceGrid,
    puts: Sequence[np.ndarray] | None = None,
    *,
    tol_convex: float = TOL_CONVEX,
    tol_measure: float = TOL_MEASURE,
    tol_calendar: float = TOL_CALENDAR,
    tol_decay: float = TOL_DECAY,
    tol_parity: float = TOL_PARITY,
) -> ValidationReport:
    """Check the five pricing-function conditions (and parity when puts are given)."""
    conditions = {
        "convexity": _check_convexity(grid, tol_convex),
        "measure": _check_measure(grid, tol_measure, tol_convex),
        "calendar": _check_calendar(grid, tol_calendar),
        "initial": _check_initial(grid, tol_convex),
        "decay": _check_decay(grid, tol_decay),
    }
    if puts is not None:
        dev = parity_check(grid, puts)
        conditions["parity"] = ConditionResult(PASS if dev <= tol_parity * grid.frame.x0 else FAIL, {"max_deviation": dev})
    return ValidationReport(conditions)
