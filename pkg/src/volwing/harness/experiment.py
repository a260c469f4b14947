"""Reproducible convergence experiments.

Each scenario walks a ladder of log-strikes, compares an independently
computed "exact" value (inversion, quadrature or closed form) with the
formula under test, and writes one :class:`ConvergenceRow` per rung.  A
summary with the fitted error-order constant, the decay slope and the
scenario's pass/fail checks accompanies the CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .. import arbitrage, asymptotics, models, regvar, symmetry, tail_index
from .._trend import trend
from ..bs_core import MarketFrame, implied_vol
from ..curves import PriceCurve, bs_curve
from ..errors import ConfigError, DegenerateRegressionError, DomainError, InsufficientGridError, VolwingError
from . import fixtures, io

SCENARIOS = ("bs-sanity", "pareto-wing", "substitute", "symmetry", "model-wing", "lee-index", "rv-suite", "validate")

# one-sided decay requirement on the regression slope of log|error| vs log L
BS_SLOPE_MAX = -0.35
BS_FINAL_ERROR = 0.005
CONSTANT_MAX = 10.0
LEE_SLOPE_TOL = 0.01
IV_SLOPE_TOL = 0.02

_DEFAULTS: dict[str, dict[str, str]] = {
    "bs-sanity": {"sigma": "0.2", "T": "1", "x0": "1", "r": "0"},
    "pareto-wing": {"beta": "5", "T": "1", "r": "0"},
    "substitute": {"sigma": "0.2", "T": "1", "x0": "1", "r": "0", "power": "5"},
    "symmetry": {"curve": "bs", "sigma": "0.25", "beta": "5", "x0": "1", "r": "0", "T": "1", "pricing": "closed-form"},
    "model-wing": {
        "model": "stein-stein",
        "B0": "1", "B2": "1", "B3": "4",
        "A0": "1", "A2": "1", "A3": "3", "q": "1", "m": "1", "c": "1",
        "C0": "1", "c2": "1", "c3": "0", "xi": "1", "y0": "1",
        "T": "1", "r": "0",
    },
    "lee-index": {"beta": "5", "T": "1", "r": "0"},
    "rv-suite": {"log_power": "1", "alpha": "-3"},
    "validate": {"source": "bundled", "x0": "1", "r": "0.02", "sigma": "0.2", "violation": "none"},
}

_LADDERS: dict[str, tuple[float, float, int]] = {
    "bs-sanity": (10.0, 80.0, 8),
    "pareto-wing": (10.0, 40.0, 8),
    "substitute": (10.0, 80.0, 8),
    "symmetry": (-3.0, 3.0, 20),
    "model-wing": (60.0, 700.0, 9),
    "lee-index": (2.0, 40.0, 30),
    "rv-suite": (5.0, 80.0, 16),
    "validate": (0.0, 0.0, 8),  # unused; the surface grid is fixed
}
PARETO_SYMMETRY_LADDER = (0.05, 3.0, 20)


@dataclass(frozen=True)
class ExperimentConfig:
    """Scenario tag, string parameters, log-strike ladder ``(start, end, count)``, output path and seed."""

    scenario: str
    params: dict[str, str] = field(default_factory=dict)
    ladder: tuple[float, float, int] | None = None
    output: Path | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose one of {', '.join(SCENARIOS)}")
        unknown = sorted(set(self.params) - set(_DEFAULTS[self.scenario]))
        if unknown:
            allowed = ", ".join(sorted(_DEFAULTS[self.scenario]))
            raise ConfigError(f"scenario {self.scenario} does not take {unknown}; allowed keys: {allowed}")
        if self.ladder is not None:
            start, end, count = self.ladder
            if not start < end:
                raise ConfigError(f"ladder start {start} must be below end {end}")
            if int(count) != count or count < 8:
                raise ConfigError(f"ladder count must be an integer >= 8, got {count}")

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "ExperimentConfig":
        """Build from a flat ``key -> value`` map (config file merged with CLI overrides)."""
        v = dict(values)
        try:
            scenario = v.pop("scenario")
        except KeyError:
            raise ConfigError("config needs a 'scenario' key") from None
        ladder = None
        if "ladder" in v:
            parts = v.pop("ladder").replace(",", " ").split()
            if len(parts) != 3:
                raise ConfigError("ladder must be 'start end count'")
            ladder = (_num(parts[0], "ladder start"), _num(parts[1], "ladder end"), int(_num(parts[2], "ladder count")))
        output = Path(v.pop("output")) if "output" in v else None
        seed = int(_num(v.pop("seed", "0"), "seed"))
        return cls(scenario, v, ladder, output, seed)

    def resolved_ladder(self) -> np.ndarray:
        start, end, count = self.ladder if self.ladder is not None else _LADDERS[self.scenario]
        return np.linspace(start, end, int(count))

    def resolved_output(self) -> Path:
        return self.output if self.output is not None else io.default_output_dir() / f"{self.scenario}.csv"

    def param(self, key: str) -> str:
        return self.params.get(key, _DEFAULTS[self.scenario][key])

    def fparam(self, key: str) -> float:
        return _num(self.param(key), key)


def _num(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{what} must be a number, got {text!r}") from None


@dataclass(frozen=True)
class ConvergenceRow:
    log_k: float
    exact: float
    approx: float
    abs_err: float
    err_order: float
    norm_err: float

    def __post_init__(self) -> None:
        for name in ("log_k", "exact", "approx", "abs_err", "err_order", "norm_err"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"convergence row at log K={self.log_k!r} has non-finite {name}")

    @classmethod
    def build(cls, log_k: float, exact: float, approx: float, err_order: float) -> "ConvergenceRow":
        err = abs(approx - exact)
        return cls(float(log_k), float(exact), float(approx), err, float(err_order), err / err_order)


@dataclass(frozen=True)
class ErrorFit:
    constant: float
    slope: float
    trend: str  # "decaying" or "non-decay"


def fit_error_order(rows: Sequence[ConvergenceRow]) -> ErrorFit:
    """Regress ``log|error|`` on ``log(error_order)``.

    ``slope`` is the free least-squares slope; ``constant`` is the geometric
    mean of ``|error| / error_order`` (the intercept at unit slope), so
    ``error = c * error_order`` gives exactly ``c``.  The trend verdict is
    ``non-decay`` unless the errors fall (Mann-Kendall) down the ladder.
    """
    if len(rows) < 8:
        raise InsufficientGridError(f"need at least 8 rows, got {len(rows)}")
    err = np.array([r.abs_err for r in rows])
    order = np.array([r.err_order for r in rows])
    if np.any(err <= 0.0) or np.any(order <= 0.0):
        raise DomainError("errors and error orders must be positive for a log-log fit")
    x, y = np.log(order), np.log(err)
    if float(np.ptp(x)) == 0.0:
        raise DegenerateRegressionError("error order is constant across rows; slope undefined")
    slope = float(np.polyfit(x, y, 1)[0])
    constant = float(np.exp(np.mean(y - x)))
    verdict = "decaying" if trend(err) == "decreasing" else "non-decay"
    return ErrorFit(constant, slope, verdict)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[ConvergenceRow]
    summary: dict[str, object]
    checks: dict[str, bool]
    output: Path | None = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def summary_lines(self) -> list[str]:
        lines = [f"scenario: {self.config.scenario}", f"seed: {self.config.seed}"]
        lines += [f"{k}: {_show(v)}" for k, v in self.summary.items()]
        lines += [f"check {k}: {'pass' if ok else 'fail'}" for k, ok in self.checks.items()]
        lines.append(f"result: {'pass' if self.passed else 'fail'}")
        if self.output is not None:
            lines.append(f"csv: {self.output}")
        return lines


def _show(v: object) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    xs, ys = np.asarray(xs), np.asarray(ys)
    if float(np.ptp(xs)) == 0.0:
        raise DegenerateRegressionError("regressor is constant")
    return float(np.polyfit(xs, ys, 1)[0])


def _fit_summary(rows: list[ConvergenceRow], summary: dict, checks: dict) -> ErrorFit:
    fit = fit_error_order(rows)
    summary.update({"fit_constant": fit.constant, "fit_slope": fit.slope, "error_trend": fit.trend})
    checks["fit_constant<=10"] = fit.constant <= CONSTANT_MAX
    return fit


# scenarios ----------------------------------------------------------------


def _bs_sanity(cfg: ExperimentConfig) -> tuple[list, dict, dict]:
    frame = MarketFrame(cfg.fparam("x0"), cfg.fparam("r"), cfg.fparam("T"))
    sigma = cfg.fparam("sigma")
    C = bs_curve(frame, sigma)
    rows, logL, refined_gap = [], [], []
    for lk in cfg.resolved_ladder():
        K = math.exp(lk)
        exact = implied_vol(frame, K, log_price=C.log_price(K))
        est = asymptotics.iv_wing_call(frame, C, K)
        rows.append(ConvergenceRow.build(lk, exact, est.value, est.envelope))
        logL.append(math.log(-C.log_price(K)))
        if lk >= 20.0:
            ref = asymptotics.iv_wing_call_refined(frame, C, K)
            refined_gap.append(abs(ref.value - exact) - abs(est.value - exact))
    summary: dict = {}
    checks: dict = {}
    _fit_summary(rows, summary, checks)
    slope = _slope(logL, [math.log(r.abs_err) for r in rows])
    errs = [r.abs_err for r in rows]
    summary.update(
        {
            "slope_vs_logL": slope,
            "final_abs_err": errs[-1],
            "max_norm_err": max(r.norm_err for r in rows),
            "refined_max_excess": max(refined_gap) if refined_gap else math.nan,
        }
    )
    checks["slope_vs_logL<=-0.35"] = slope <= BS_SLOPE_MAX
    checks["final_abs_err<0.005"] = errs[-1] < BS_FINAL_ERROR
    checks["errors_monotone"] = all(b < a for a, b in zip(errs, errs[1:]))
    checks["max_norm_err<=10"] = summary["max_norm_err"] <= CONSTANT_MAX
    if refined_gap:
        checks["refined_not_worse"] = max(refined_gap) <= 1e-4
    return rows, summary, checks


def _pareto_frame(cfg: ExperimentConfig, beta: float) -> MarketFrame:
    T, r = cfg.fparam("T"), cfg.fparam("r")
    mean = (beta - 1.0) / (beta - 2.0)
    return MarketFrame(mean * math.exp(-r * T), r, T)


def _pareto_wing(cfg: ExperimentConfig) -> tuple[list, dict, dict]:
    beta = cfg.fparam("beta")
    frame = _pareto_frame(cfg, beta)
    C, _ = tail_index.pareto_curves(frame, beta)
    ladder = cfg.resolved_ladder()
    rows = []
    iv_slope = math.nan
    for lk in ladder:
        K = math.exp(lk)
        exact = implied_vol(frame, K, log_price=C.log_price(K))
        est = asymptotics.iv_wing_call(frame, C, K)
        rows.append(ConvergenceRow.build(lk, exact, est.value, est.envelope))
        iv_slope = exact * math.sqrt(frame.T) / math.sqrt(2.0 * lk)
    report = tail_index.estimate_right_index(frame, C, np.exp(ladder))
    target = tail_index.lee_slope_right(beta - 2.0)
    summary: dict = {}
    checks: dict = {}
    _fit_summary(rows, summary, checks)
    summary.update({"l_hat": report.l_hat, "lee_slope": report.lee_slope, "lee_target": target, "iv_slope_top": iv_slope})
    checks["lee_slope"] = abs(report.lee_slope - target) <= LEE_SLOPE_TOL
    checks["iv_slope_top"] = abs(iv_slope - target) <= IV_SLOPE_TOL
    return rows, summary, checks


def _substitute(cfg: ExperimentConfig) -> tuple[list, dict, dict]:
    frame = MarketFrame(cfg.fparam("x0"), cfg.fparam("r"), cfg.fparam("T"))
    sigma, power = cfg.fparam("sigma"), cfg.fparam("power")
    C = bs_curve(frame, sigma)
    Csub = PriceCurve(log_fn=lambda K: C.log_price(K) + power * math.log(math.log(K)), name=f"C*(logK)^{power}")
    ladder = cfg.resolved_ladder()
    results, diag = asymptotics.iv_wing_substitute(frame, C, Csub, np.exp(ladder))
    rows = []
    for lk, est in zip(ladder, results):
        K = math.exp(lk)
        exact = implied_vol(frame, K, log_price=C.log_price(K))
        order = est.envelope if est.error_order is not None else 1.0
        rows.append(ConvergenceRow.build(lk, exact, est.value, order))
    summary: dict = {"regime": diag.regime, "bounded_ratio": diag.bounded_ratio}
    checks: dict = {"regime_bounded_tau": diag.regime == "substitute-bounded-tau"}
    fit = _fit_summary(rows, summary, checks)
    checks["errors_decay"] = fit.trend == "decaying"
    return rows, summary, checks


def _symmetry(cfg: ExperimentConfig) -> tuple[list, dict, dict]:
    kind = cfg.param("curve")
    if kind == "bs":
        frame = MarketFrame(cfg.fparam("x0"), cfg.fparam("r"), cfg.fparam("T"))
        sigma = cfg.fparam("sigma")
        C, P = bs_curve(frame, sigma), bs_curve(frame, sigma, "put")
        strikes = frame.forward * np.exp(cfg.resolved_ladder())
        tol = 1e-10
    elif kind == "pareto":
        beta = cfg.fparam("beta")
        frame = _pareto_frame(cfg, beta)
        if cfg.param("pricing") == "quadrature":
            spec = tail_index.pareto_spec(beta)
            C = PriceCurve(log_fn=lambda K: tail_index.log_call_by_payoff(frame, spec, K), kind="call")
            P = PriceCurve(log_fn=lambda K: tail_index.log_put_by_payoff(frame, spec, K), kind="put")
        else:
            C, P = tail_index.pareto_curves(frame, beta)
        # the put vanishes below the support edge 1, so the default ladder starts just above log K = 0
        ladder = cfg.resolved_ladder() if cfg.ladder is not None else np.linspace(*PARETO_SYMMETRY_LADDER)
        strikes = np.exp(ladder)
        tol = 1e-6
    else:
        raise ConfigError(f"symmetry curve must be 'bs' or 'pareto', got {kind!r}")
    rep = symmetry.symmetry_check(frame, C, P, strikes)
    rows = [
        ConvergenceRow.build(math.log(K), a, b, tol)
        for K, a, b in zip(rep.strikes, rep.iv_call, rep.iv_dual)
    ]
    summary = {"max_deviation": rep.max_deviation, "max_parity_error": rep.max_parity_error, "tolerance": tol}
    return rows, summary, {"max_deviation": rep.max_deviation < tol}


def tail_model_from_config(cfg: ExperimentConfig) -> models.TailModel:
    name = cfg.param("model")
    f = cfg.fparam
    if name == "stein-stein":
        return models.SteinSteinTail(f("B0"), f("B2"), f("B3"))
    if name == "heston":
        return models.HestonTail(f("A0"), f("A2"), f("A3"), f("q"), f("m"), f("c"))
    if name == "hull-white":
        return models.HullWhiteTail(f("C0"), f("c2"), f("c3"), f("xi"), f("y0"), f("T"))
    raise ConfigError(f"model must be stein-stein, heston or hull-white, got {name!r}")


def _model_wing(cfg: ExperimentConfig) -> tuple[list, dict, dict]:
    """Rows hold log prices: wing formula vs quadrature of the leading-order density."""
    model = tail_model_from_config(cfg)
    frame = MarketFrame(1.0, cfg.fparam("r"), cfg.fparam("T"))
    hull_white = isinstance(model, models.HullWhiteTail)
    rows, ratios = [], []
    for lk in cfg.resolved_ladder():
        K = math.exp(lk)
        exact = models.log_tail_call_by_quadrature(frame, model, K)
        approx = models.log_call_wing_price(frame, model, K)
        order = 1.0 / math.log(lk) if hull_white else 1.0 / math.sqrt(lk)
        rows.append(ConvergenceRow.build(lk, exact, approx, order))
        ratios.append(math.exp(approx - exact))
    top = math.exp(rows[-1].log_k)
    _, lp = models.log_pareto_tail(model, top)
    pareto_ratio = math.exp(lp - models.log_tail_ccdf_by_quadrature(model, top))
    summary: dict = {"ratio_first": ratios[0], "ratio_last": ratios[-1], "pareto_ratio_top": pareto_ratio}
    checks: dict = {"ratio_first_in_[0.8,1.25]": 0.8 <= ratios[0] <= 1.25}
    fit = _fit_summary(rows, summary, checks)
    checks["trend_toward_1"] = fit.trend == "decaying"
    checks["pareto_ratio_in_[0.95,1.05]"] = 0.95 <= pareto_ratio <= 1.05
    return rows, summary, checks


def _lee_index(cfg: ExperimentConfig) -> tuple[list, dict, dict]:
    beta = cfg.fparam("beta")
    frame = _pareto_frame(cfg, beta)
    C, _ = tail_index.pareto_curves(frame, beta)
    ladder = cfg.resolved_ladder()
    l_true = beta - 2.0
    rows = [ConvergenceRow.build(lk, l_true, -C.log_price(math.exp(lk)) / lk - 1.0, 1.0 / lk) for lk in ladder]
    rep = tail_index.estimate_right_index(frame, C, np.exp(ladder))
    target = tail_index.lee_slope_right(l_true)
    summary = {"l_hat": rep.l_hat, "r_star_hat": rep.r_star_hat, "lee_slope": rep.lee_slope, "lee_target": target}
    checks = {
        "l_hat": abs(rep.l_hat - l_true) <= 0.05,
        "lee_slope": abs(rep.lee_slope - target) <= LEE_SLOPE_TOL,
    }
    return rows, summary, checks


def _rv_suite(cfg: ExperimentConfig) -> tuple[list, dict, dict]:
    a, alpha = cfg.fparam("log_power"), cfg.fparam("alpha")
    ladder = cfg.resolved_ladder()
    if ladder[0] <= 1.0:
        raise ConfigError("rv-suite ladder must start above log x = 1")
    l = lambda x: math.log(x) ** a  # noqa: E731
    rep = regvar.karamata_check(l, alpha, np.exp(ladder))
    rows = [ConvergenceRow.build(lk, rep.target, v, 1.0 / lk) for lk, v in zip(ladder, rep.ratios)]
    summary: dict = {"karamata_target": rep.target, "karamata_last": rep.last}
    checks: dict = {}
    fit = _fit_summary(rows, summary, checks)
    checks["karamata_converges"] = fit.trend == "decaying"
    return rows, summary, checks


def _validate(cfg: ExperimentConfig) -> tuple[list, dict, dict]:
    x0, r = cfg.fparam("x0"), cfg.fparam("r")
    source = cfg.param("source")
    if source == "bundled":
        grid, puts = fixtures.bs_surface(x0=x0, r=r, sigma=cfg.fparam("sigma"))
    else:
        grid, puts = io.read_surface_csv(source, MarketFrame(x0, r, 1.0))
    violation = cfg.param("violation")
    expect = {"none": None, "bump": "convexity", "calendar": "calendar", "scale": "measure"}
    if violation not in expect:
        raise ConfigError(f"violation must be one of {sorted(expect)}, got {violation!r}")
    if violation != "none":
        grid = _inject(grid, violation, np.random.default_rng(cfg.seed))
        puts = None
    rep = arbitrage.validate_surface(grid, puts)
    rows = []
    for i, T in enumerate(grid.expiries):
        if T <= arbitrage.ZERO_EXPIRY:
            continue
        m = arbitrage.discrete_measure(grid, i, tol=math.inf)
        rows.append(ConvergenceRow.build(math.log(m.forward), m.forward, m.mean, arbitrage.TOL_MEASURE * m.forward))
    summary: dict = {name: f"{res.status} {res.witness}" for name, res in rep.conditions.items()}
    summary["verdict"] = rep.verdict
    if violation == "none":
        checks = {"verdict_pass": rep.passed}
    else:
        checks = {f"{expect[violation]}_caught": rep.conditions[expect[violation]].status == arbitrage.FAIL}
    return rows, summary, checks


def _inject(grid: arbitrage.SurfaceGrid, violation: str, rng: np.random.Generator) -> arbitrage.SurfaceGrid:
    prices = [p.copy() for p in grid.prices]
    if violation == "bump":
        i = int(rng.integers(len(prices)))
        K = grid.strikes[i]
        # deep in the money a 1% bump exceeds the local convexity of the grid
        candidates = np.flatnonzero((K > K[0]) & (K < 0.9 * grid.frame.x0))
        j = int(rng.choice(candidates))
        prices[i][j] *= 1.01
    elif violation == "calendar":
        i = int(rng.integers(len(prices) - 1))
        prices[i], prices[i + 1] = prices[i + 1], prices[i]
    else:
        prices = [p * 1.5 for p in prices]
    return grid.replace_prices(prices)


_RUNNERS: dict[str, Callable[[ExperimentConfig], tuple[list, dict, dict]]] = {
    "bs-sanity": _bs_sanity,
    "pareto-wing": _pareto_wing,
    "substitute": _substitute,
    "symmetry": _symmetry,
    "model-wing": _model_wing,
    "lee-index": _lee_index,
    "rv-suite": _rv_suite,
    "validate": _validate,
}


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Run a scenario; write its CSV unless ``write`` is false."""
    try:
        rows, summary, checks = _RUNNERS[config.scenario](config)
    except VolwingError as exc:
        if exc.args and isinstance(exc.args[0], str):
            exc.args = (f"scenario {config.scenario}: {exc.args[0]}",) + exc.args[1:]
        raise
    out = None
    if write:
        out = config.resolved_output()
        io.write_report_csv(out, rows)
    return ExperimentResult(config, rows, summary, checks, out)
