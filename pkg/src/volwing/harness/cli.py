"""Command line interface: ``volwing <subcommand> ...``.

Exit status is 0 on success or a passing check, 1 on a failing check or a
domain error, 2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Sequence

import numpy as np

from .. import arbitrage, asymptotics, models, symmetry, tail_index
from ..bs_core import MarketFrame, bs_call_price, bs_put_price, implied_vol
from ..curves import PriceCurve, bs_curve
from ..errors import ConfigError, VolwingError
from . import fixtures, io
from .experiment import PARETO_SYMMETRY_LADDER, SCENARIOS, ExperimentConfig, run_experiment, tail_model_from_config

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _frame_args(p: argparse.ArgumentParser, T: bool = True) -> None:
    p.add_argument("--x0", type=float, default=1.0, help="spot price (default 1)")
    p.add_argument("--r", type=float, default=0.0, help="interest rate (default 0)")
    if T:
        p.add_argument("--T", type=float, default=1.0, help="expiry in years (default 1)")


def _curve_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--curve", choices=("bs", "pareto"), default="bs", help="pricing curve (default bs)")
    p.add_argument("--sigma", type=float, default=0.2, help="Black-Scholes volatility for --curve bs")
    p.add_argument("--beta", type=float, default=5.0, help="Pareto density exponent for --curve pareto")


def _ladder_arg(p: argparse.ArgumentParser, default: tuple[float, float, int]) -> None:
    p.add_argument(
        "--ladder", nargs=3, type=float, metavar=("START", "END", "COUNT"), default=default,
        help=f"log-strike ladder (default {default[0]:g} {default[1]:g} {default[2]:d})",
    )


def _curves(args) -> tuple[MarketFrame, PriceCurve, PriceCurve]:
    if args.curve == "bs":
        frame = MarketFrame(args.x0, args.r, args.T)
        return frame, bs_curve(frame, args.sigma), bs_curve(frame, args.sigma, "put")
    # the Pareto law fixes the forward; x0 is derived from it
    mean = (args.beta - 1.0) / (args.beta - 2.0)
    frame = MarketFrame(mean * math.exp(-args.r * args.T), args.r, args.T)
    C, P = tail_index.pareto_curves(frame, args.beta)
    return frame, C, P


def _ladder(args) -> np.ndarray:
    start, end, count = args.ladder
    if not start < end or count < 2 or int(count) != count:
        raise ConfigError("ladder needs START < END and an integer COUNT >= 2")
    return np.linspace(start, end, int(count))


def cmd_price(args) -> int:
    frame = MarketFrame(args.x0, args.r, args.T)
    fn = bs_call_price if args.kind == "call" else bs_put_price
    for K in args.K:
        print(f"{K!r} {fn(frame, K, args.sigma)!r}")
    return EXIT_OK


def cmd_iv(args) -> int:
    frame = MarketFrame(args.x0, args.r, args.T)
    print(repr(implied_vol(frame, args.K, args.price, kind=args.kind)))
    return EXIT_OK


def cmd_wing(args) -> int:
    frame, C, P = _curves(args)
    print("logK exact_iv wing_iv envelope regime")
    for lk in args.logK:
        if args.variant == "put":
            K = math.exp(-lk)
            est = asymptotics.iv_wing_put(frame, P, K)
            exact = implied_vol(frame, K, log_price=P.log_price(K), kind="put")
        else:
            K = math.exp(lk)
            fn = asymptotics.iv_wing_call if args.variant == "plain" else asymptotics.iv_wing_call_refined
            est = fn(frame, C, K)
            exact = implied_vol(frame, K, log_price=C.log_price(K))
        print(f"{lk!r} {exact!r} {est.value!r} {est.envelope!r} {est.regime}")
    return EXIT_OK


def cmd_tail_index(args) -> int:
    frame, C, P = _curves(args)
    x = _ladder(args)
    if args.side == "right":
        rep = tail_index.estimate_right_index(frame, C, np.exp(x))
        print(f"l_hat {rep.l_hat!r}\nr_star_hat {rep.r_star_hat!r}\nlee_slope {rep.lee_slope!r}")
        print(f"infinite {rep.l_infinite}")
    else:
        rep = tail_index.estimate_left_index(frame, P, np.exp(-x))
        print(f"m_hat {rep.m_hat!r}\nu_star_hat {rep.u_star_hat!r}\nlee_slope_left {rep.lee_slope_left!r}")
        print(f"infinite {rep.m_infinite}\nconsistent {rep.consistent}")
    print(f"caveat: {rep.caveat}")
    return EXIT_OK


def cmd_symmetry(args) -> int:
    frame, C, P = _curves(args)
    if args.ladder is None:
        args.ladder = (-3.0, 3.0, 20) if args.curve == "bs" else PARETO_SYMMETRY_LADDER
    x = _ladder(args)
    strikes = frame.forward * np.exp(x) if args.curve == "bs" else np.exp(x)
    rep = symmetry.symmetry_check(frame, C, P, strikes)
    print("K dual_K iv_call iv_dual deviation")
    for row in zip(rep.strikes, rep.dual_strikes, rep.iv_call, rep.iv_dual, rep.deviations):
        print(" ".join(repr(v) for v in row))
    print(f"max_deviation {rep.max_deviation!r}")
    return EXIT_OK if rep.max_deviation < args.tol else EXIT_FAIL


def _parse_pairs(pairs: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_model_wing(args) -> int:
    params = {"model": args.model, "T": str(args.T), "r": str(args.r), **_parse_pairs(args.const)}
    cfg = ExperimentConfig("model-wing", params)
    model = tail_model_from_config(cfg)
    frame = MarketFrame(1.0, args.r, args.T)
    print("logK log_wing_price log_quadrature_price ratio")
    for lk in args.logK:
        K = math.exp(lk)
        a = models.log_call_wing_price(frame, model, K)
        e = models.log_tail_call_by_quadrature(frame, model, K)
        print(f"{lk!r} {a!r} {e!r} {math.exp(a - e)!r}")
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.write_fixture:
        grid, puts = fixtures.bs_surface(x0=args.x0, r=args.r, sigma=args.sigma)
        io.write_surface_csv(args.write_fixture, grid, puts)
        print(f"wrote {args.write_fixture}")
        return EXIT_OK
    if args.surface is None:
        grid, puts = fixtures.bs_surface(x0=args.x0, r=args.r, sigma=args.sigma)
    else:
        grid, puts = io.read_surface_csv(args.surface, MarketFrame(args.x0, args.r, 1.0))
    rep = arbitrage.validate_surface(grid, puts)
    print("\n".join(rep.summary_lines()))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_experiment(args) -> int:
    values: dict[str, str] = {}
    if args.config:
        values.update(io.read_config(args.config))
    values.update(_parse_pairs(args.set))
    if args.scenario:
        values["scenario"] = args.scenario
    if args.ladder:
        values["ladder"] = " ".join(args.ladder)
    if args.output:
        values["output"] = args.output
    if args.seed is not None:
        values["seed"] = str(args.seed)
    result = run_experiment(ExperimentConfig.from_mapping(values))
    print("\n".join(result.summary_lines()))
    return EXIT_OK if result.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="volwing", description="Implied volatility wing asymptotics toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="Black-Scholes call/put prices")
    _frame_args(p)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--kind", choices=("call", "put"), default="call")
    p.add_argument("K", type=float, nargs="+", help="strikes")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("iv", help="implied volatility of one quote")
    _frame_args(p)
    p.add_argument("--kind", choices=("call", "put"), default="call")
    p.add_argument("K", type=float, help="strike")
    p.add_argument("price", type=float, help="option price")
    p.set_defaults(func=cmd_iv)

    p = sub.add_parser("wing", help="wing implied-vol formulas against exact inversion")
    _frame_args(p)
    _curve_args(p)
    p.add_argument("--variant", choices=("plain", "refined", "put"), default="plain")
    p.add_argument("logK", type=float, nargs="+", help="log strikes (for --variant put: log 1/K)")
    p.set_defaults(func=cmd_wing)

    p = sub.add_parser("tail-index", help="right or left tail index estimates")
    _frame_args(p)
    _curve_args(p)
    p.add_argument("--side", choices=("right", "left"), default="right")
    _ladder_arg(p, (2.0, 40.0, 30))
    p.set_defaults(func=cmd_tail_index)

    p = sub.add_parser("symmetry", help="put-call duality check of implied volatilities")
    _frame_args(p)
    _curve_args(p)
    p.add_argument(
        "--ladder", nargs=3, type=float, metavar=("START", "END", "COUNT"),
        help="ladder in log(K/F) for --curve bs (default -3 3 20), in log K for --curve pareto (default 0.05 3 20)",
    )
    p.add_argument("--tol", type=float, default=1e-10, help="pass threshold on the max deviation")
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("model-wing", help="stochastic-volatility wing prices against tail quadrature")
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--model", choices=("stein-stein", "heston", "hull-white"), default="stein-stein")
    p.add_argument("--const", action="append", default=[], metavar="KEY=VALUE",
                   help="tail constant, e.g. B3=4 (repeatable)")
    p.add_argument("logK", type=float, nargs="+", help="log strikes")
    p.set_defaults(func=cmd_model_wing)

    p = sub.add_parser("validate", help="static-arbitrage validation of a price surface CSV")
    _frame_args(p, T=False)
    p.add_argument("surface", nargs="?", help="CSV file expiry,strike,price[,put]; omit for the bundled fixture")
    p.add_argument("--sigma", type=float, default=0.2, help="volatility of the bundled fixture")
    p.add_argument("--write-fixture", metavar="PATH", help="write the bundled fixture to PATH and exit")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("experiment", help="run a convergence experiment and write its CSV")
    p.add_argument("--config", help="flat key = value file; command-line options override it")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="scenario parameter (repeatable)")
    p.add_argument("--ladder", nargs=3, metavar=("START", "END", "COUNT"))
    p.add_argument("--output", help="CSV path (default $VOLWING_OUTPUT_DIR/<scenario>.csv)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"volwing: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VolwingError as exc:
        print(f"volwing: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
