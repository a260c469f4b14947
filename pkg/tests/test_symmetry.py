import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from volwing.arbitrage import PASS, SurfaceGrid, validate_surface
from volwing.bs_core import MarketFrame, bs_call_price, bs_put_price
from volwing.curves import PriceCurve, bs_curve
from volwing.errors import DomainError, ParityError
from volwing.harness.fixtures import DEFAULT_EXPIRIES, bs_strikes
from volwing.quadrature import log_integral
from volwing.symmetry import (
    DualFrame,
    dual_call_curve,
    dual_call_G,
    dual_density,
    dual_log_density,
    dual_put_curve,
    dual_spec,
    symmetry_check,
)
from volwing.tail_index import (
    call_from_ccdf,
    lognormal_spec,
    pareto_curves,
    pareto_spec,
    put_from_cdf,
)

UNIT = MarketFrame(1.0, 0.0, 1.0)
PARETO_FRAME = MarketFrame(4.0 / 3.0, 0.0, 1.0)


def pareto_density(x):
    return 4.0 * x**-5 if x >= 1.0 else 0.0


class TestDualFrame:
    def test_pivot(self):
        f = MarketFrame(1.5, 0.04, 2.0)
        assert DualFrame(f).pivot == pytest.approx((1.5 * math.exp(0.08)) ** 2, rel=1e-15)

    def test_dual_strike_rejects_zero(self):
        with pytest.raises(DomainError):
            DualFrame(UNIT).dual_strike(0.0)


class TestDualCall:
    @pytest.mark.parametrize("K", [0.05, 0.5, 1.0, 2.0, 20.0])
    def test_bs_self_dual(self, K):
        P = bs_curve(UNIT, 0.2, "put")
        assert dual_call_G(UNIT, P, K) == pytest.approx(bs_call_price(UNIT, K, 0.2), rel=1e-12)

    def test_pivot_fixed_point(self):
        f = MarketFrame(1.2, 0.03, 0.7)
        P = bs_curve(f, 0.3, "put")
        F = f.forward
        assert dual_call_G(f, P, F) == pytest.approx(P(F), rel=1e-14)

    def test_kind_checks(self):
        with pytest.raises(DomainError):
            dual_call_curve(UNIT, bs_curve(UNIT, 0.2, "call"))
        with pytest.raises(DomainError):
            dual_put_curve(UNIT, bs_curve(UNIT, 0.2, "put"))

    def test_pareto_dual_beyond_pivot_is_zero(self):
        # the dual law lives on (0, F^2], so calls struck above the pivot are worthless
        _, P = pareto_curves(PARETO_FRAME, 5.0)
        K = math.exp(10.0)
        assert dual_call_G(PARETO_FRAME, P, K) == 0.0
        assert call_from_ccdf(PARETO_FRAME, dual_spec(PARETO_FRAME, pareto_spec(5.0)), K) == 0.0

    @pytest.mark.slow
    @pytest.mark.parametrize("K", [1.0])
    def test_pareto_dual_matches_dual_density_pricing(self, K):
        _, P = pareto_curves(PARETO_FRAME, 5.0)
        via_put = dual_call_G(PARETO_FRAME, P, K)
        via_density = call_from_ccdf(PARETO_FRAME, dual_spec(PARETO_FRAME, pareto_spec(5.0)), K)
        assert via_put == pytest.approx(via_density, rel=1e-8)

    def test_g_decays(self):
        _, P = pareto_curves(PARETO_FRAME, 5.0)
        vals = [dual_call_G(PARETO_FRAME, P, K) for K in (1.0, 1.5, 1.7)]
        assert vals[0] > vals[1] > vals[2] > 0.0

    @given(logk=st.floats(-4.0, 4.0))
    def test_curve_level_involution(self, logk):
        f = MarketFrame(1.1, 0.02, 1.5)
        C = bs_curve(f, 0.35)
        twice = dual_put_curve(f, dual_call_curve(f, dual_put_curve(f, C)))
        K = math.exp(logk)
        # dual of dual: P_G built from G built from P_G reproduces P_G, and G(G) gives back C
        G_of_PG = dual_call_curve(f, dual_put_curve(f, C))
        assert G_of_PG.log_price(K) == pytest.approx(C.log_price(K), abs=1e-9)
        assert twice.log_price(K) == pytest.approx(dual_put_curve(f, C).log_price(K), abs=1e-9)


class TestDualDensity:
    @given(x=st.floats(0.05, 20.0))
    def test_lognormal_self_dual(self, x):
        f = MarketFrame(1.3, 0.03, 1.2)
        spec = lognormal_spec(f, 0.4)
        assert dual_density(f, spec.density, x) == pytest.approx(spec.density(x), rel=1e-12)

    @given(x=st.floats(0.01, 50.0))
    def test_involution(self, x):
        once = lambda y: dual_density(PARETO_FRAME, pareto_density, y)
        twice = dual_density(PARETO_FRAME, once, x)
        assert twice == pytest.approx(pareto_density(x), rel=1e-10, abs=1e-300)

    def test_pareto_at_pivot(self):
        F = PARETO_FRAME.forward
        assert dual_density(PARETO_FRAME, pareto_density, F * F) == pytest.approx(F**-3 * 4.0, rel=1e-14)

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            dual_density(UNIT, pareto_density, 0.0)

    @pytest.mark.parametrize(
        "frame,spec",
        [
            (PARETO_FRAME, pareto_spec(5.0)),
            (MarketFrame(5.0 / 3.0 * math.exp(-0.1), 0.05, 2.0), pareto_spec(3.5)),
            (MarketFrame(1.0, 0.02, 1.0), lognormal_spec(MarketFrame(1.0, 0.02, 1.0), 0.6)),
        ],
        ids=["pareto5", "pareto3.5", "lognormal"],
    )
    def test_mass_and_mean(self, frame, spec):
        log_d = dual_log_density(frame, spec.log_d)
        mass = math.exp(log_integral(lambda u: log_d(u) + u, -math.inf, math.inf, rtol=1e-12))
        mean = math.exp(log_integral(lambda u: log_d(u) + 2.0 * u, -math.inf, math.inf, rtol=1e-12))
        assert mass == pytest.approx(1.0, abs=1e-7)
        assert mean == pytest.approx(frame.forward, rel=1e-7)

    def test_dual_spec_support(self):
        spec = dual_spec(PARETO_FRAME, pareto_spec(5.0))
        assert spec.support_low == 0.0
        assert spec.support_high == pytest.approx(PARETO_FRAME.forward**2, rel=1e-15)


class TestSymmetryCheck:
    def test_bs_constant_vol(self):
        f = MarketFrame(1.0, 0.03, 1.0)
        rep = symmetry_check(f, bs_curve(f, 0.25), bs_curve(f, 0.25, "put"), f.forward * np.exp(np.linspace(-3, 3, 20)))
        assert rep.max_deviation < 1e-10
        assert rep.dual_strikes[0] == pytest.approx(f.forward**2 / rep.strikes[0], rel=1e-14)

    def test_pareto_quadrature_priced(self):
        spec = pareto_spec(5.0)
        f = PARETO_FRAME
        C = PriceCurve(lambda K: call_from_ccdf(f, spec, K), kind="call")
        P = PriceCurve(lambda K: put_from_cdf(f, spec, K), kind="put")
        rep = symmetry_check(f, C, P, np.exp(np.linspace(0.05, 1.2, 12)))
        assert rep.max_deviation < 1e-6
        assert rep.max_parity_error < 1e-9

    def test_parity_violation_raises(self):
        f = UNIT
        strikes = np.exp(np.linspace(-1, 1, 9))
        bumped_at = strikes[4]
        base = bs_curve(f, 0.2)
        C = PriceCurve(lambda K: base(K) * (1.01 if K == bumped_at else 1.0), kind="call")
        with pytest.raises(ParityError):
            symmetry_check(f, C, bs_curve(f, 0.2, "put"), strikes)


class TestDualSurface:
    def test_bs_dual_surface_is_valid(self):
        x0, r, sigma = 1.2, 0.03, 0.25
        K = bs_strikes(x0)
        calls, puts = [], []
        for T in DEFAULT_EXPIRIES:
            f = MarketFrame(x0, r, T)
            P = PriceCurve(lambda k, f=f: bs_put_price(f, k, sigma), kind="put")
            G = dual_call_curve(f, P)
            calls.append([G(k) for k in K])
            puts.append(np.array([dual_put_curve(f, bs_curve(f, sigma))(k) for k in K]))
        grid = SurfaceGrid.from_matrix(DEFAULT_EXPIRIES, K, calls, MarketFrame(x0, r, 1.0))
        rep = validate_surface(grid, puts)
        assert rep.passed, rep.summary_lines()

    def test_pareto_dual_slice_is_valid(self):
        _, P = pareto_curves(PARETO_FRAME, 5.0)
        K = np.geomspace(1e-3, 10.0, 801)
        G = [P(PARETO_FRAME.forward**2 / k) * k / PARETO_FRAME.forward for k in K]
        grid = SurfaceGrid.from_matrix((1.0,), K, [G], PARETO_FRAME)
        rep = validate_surface(grid)
        for name in ("convexity", "measure", "decay"):
            assert rep.conditions[name].status == PASS, rep.summary_lines()
