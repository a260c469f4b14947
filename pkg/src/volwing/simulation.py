"""Monte Carlo for the uncorrelated Hull-White, Stein-Stein and Heston models.

The stock is stepped in log coordinates, ``log X += (r - v^2/2) dt + v dW``
with the volatility ``v`` frozen over the step, so each step multiplies the
discounted price by a mean-one factor and the scheme is a martingale exactly.
The volatility factor uses log-Euler (Hull-White, geometric Brownian motion),
plain Euler (Stein-Stein, Ornstein-Uhlenbeck) or full-truncation Euler
(Heston, CIR).

Paths are simulated in fixed-size blocks; block ``j`` draws from
``SeedSequence([seed, j])`` so results do not depend on how blocks are
scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bs_core import MarketFrame
from .errors import ConfigError, InstabilityError

MODELS = ("hull-white", "stein-stein", "heston")
_PARAMS = {
    "hull-white": ("nu", "xi"),
    "stein-stein": ("q", "m", "sigma"),
    "heston": ("q", "m", "c"),
}
BLOCK = 10_000


@dataclass(frozen=True)
class SdeSpec:
    """Model tag, volatility parameters, initial volatility state and MC sizes.

    ``y0`` is the initial volatility for Hull-White and Stein-Stein and the
    initial variance for Heston.
    """

    model: str
    params: dict = field(default_factory=dict)
    y0: float = 0.2
    n_steps: int = 200
    n_paths: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODELS}")
        missing = [k for k in _PARAMS[self.model] if k not in self.params]
        if missing:
            raise ConfigError(f"{self.model} needs parameters {missing}")
        if self.n_steps < 100:
            raise ConfigError(f"n_steps must be >= 100, got {self.n_steps}")
        if self.n_paths < 2:
            raise ConfigError("need at least 2 paths")
        p = self.params
        if self.model == "hull-white" and not (p["xi"] >= 0.0 and self.y0 > 0.0):
            raise ConfigError("hull-white needs xi >= 0 and y0 > 0")
        if self.model == "stein-stein" and not (p["q"] >= 0.0 and p["m"] >= 0.0 and p["sigma"] >= 0.0):
            raise ConfigError("stein-stein needs q, m, sigma >= 0")
        if self.model == "heston" and not (p["q"] >= 0.0 and p["m"] >= 0.0 and p["c"] >= 0.0 and self.y0 >= 0.0):
            raise ConfigError("heston needs q, m, c, y0 >= 0")


@dataclass(frozen=True)
class McResult:
    samples: np.ndarray  # terminal stock prices
    frame: MarketFrame
    spec: SdeSpec

    def _mean_se(self, values: np.ndarray) -> tuple[float, float]:
        d = self.frame.discount
        return float(d * values.mean()), float(d * values.std(ddof=1) / math.sqrt(values.size))

    def call_price(self, K: float) -> tuple[float, float]:
        """Discounted call price estimate and its standard error."""
        return self._mean_se(np.maximum(self.samples - K, 0.0))

    def put_price(self, K: float) -> tuple[float, float]:
        return self._mean_se(np.maximum(K - self.samples, 0.0))

    def discounted_mean(self) -> tuple[float, float]:
        return self._mean_se(self.samples)

    def martingale_ok(self, n_se: float = 3.0) -> bool:
        m, se = self.discounted_mean()
        return abs(m - self.frame.x0) <= n_se * se


def _block(spec: SdeSpec, frame: MarketFrame, n: int, rng: np.random.Generator) -> np.ndarray:
    dt = frame.T / spec.n_steps
    sq = math.sqrt(dt)
    p = spec.params
    r = frame.r
    logx = np.full(n, math.log(frame.x0))
    y = np.full(n, float(spec.y0))
    # overflow is detected after the loop and reported as InstabilityError
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(spec.n_steps):
            dw = rng.standard_normal(n)
            dz = rng.standard_normal(n)
            if spec.model == "hull-white":
                v = y
                y = y * np.exp((p["nu"] - 0.5 * p["xi"] ** 2) * dt + p["xi"] * sq * dz)
            elif spec.model == "stein-stein":
                v = np.abs(y)
                y = y + p["q"] * (p["m"] - y) * dt + p["sigma"] * sq * dz
            else:
                yp = np.maximum(y, 0.0)
                v = np.sqrt(yp)
                y = y + p["q"] * (p["m"] - yp) * dt + p["c"] * np.sqrt(yp) * sq * dz
            logx += (r - 0.5 * v * v) * dt + v * sq * dw
        x = np.exp(logx)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InstabilityError(
            f"{spec.model} paths overflowed with {spec.n_steps} steps; increase n_steps or reduce vol-of-vol"
        )
    return x


def mc_paths(spec: SdeSpec, frame: MarketFrame) -> McResult:
    """Simulate terminal stock prices for ``spec`` over ``[0, frame.T]``."""
    out = []
    remaining = spec.n_paths
    j = 0
    while remaining > 0:
        n = min(BLOCK, remaining)
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, j]))
        out.append(_block(spec, frame, n, rng))
        remaining -= n
        j += 1
    return McResult(np.concatenate(out), frame, spec)
