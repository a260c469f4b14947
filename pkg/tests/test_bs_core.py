import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from volwing.bs_core import (
    MarketFrame,
    bs_call_price,
    bs_put_price,
    implied_vol,
    log_call_price,
    log_norm_cdf,
    log_put_price,
    norm_cdf,
)
from volwing.errors import BandError, DomainError

ATM = MarketFrame(1.0, 0.0, 1.0)


def lognormal_call_quadrature(frame, K, sigma):
    """Independent oracle: integrate the payoff against the lognormal density."""
    mp.mp.dps = 30
    s = sigma * mp.sqrt(frame.T)
    mu = mp.log(frame.x0) + (frame.r - sigma**2 / 2) * frame.T
    dens = lambda z: mp.exp(-z * z / 2) / mp.sqrt(2 * mp.pi)  # noqa: E731
    z0 = (mp.log(K) - mu) / s
    val = mp.quad(lambda z: (mp.exp(mu + s * z) - K) * dens(z), [z0, z0 + 5, mp.inf])
    return float(mp.exp(-frame.r * frame.T) * val)


class TestNormCdf:
    def test_centre(self):
        assert norm_cdf(0.0) == 0.5

    def test_upper_tail(self):
        assert norm_cdf(8.0) > 1 - 1e-15

    def test_against_mpmath(self):
        mp.mp.dps = 30
        expected = float(mp.ncdf(mp.mpf("0.1")))
        assert norm_cdf(0.1) == pytest.approx(0.539827837277029, abs=1e-15)
        assert norm_cdf(0.1) == pytest.approx(expected, rel=1e-15)

    def test_log_cdf_far_tail(self):
        mp.mp.dps = 30
        assert log_norm_cdf(-40.0) == pytest.approx(float(mp.log(mp.ncdf(-40))), rel=1e-13)


class TestPrices:
    def test_atm_value_matches_quadrature(self):
        oracle = lognormal_call_quadrature(ATM, 1.0, 0.2)
        assert oracle == pytest.approx(0.0796557, abs=1e-7)
        assert bs_call_price(ATM, 1.0, 0.2) == pytest.approx(oracle, rel=1e-13)

    @pytest.mark.parametrize("K,sigma,r,T", [(1.3, 0.3, 0.05, 2.0), (0.7, 0.15, 0.01, 0.5), (3.0, 0.8, 0.0, 4.0)])
    def test_quadrature_oracle(self, K, sigma, r, T):
        f = MarketFrame(1.0, r, T)
        assert bs_call_price(f, K, sigma) == pytest.approx(lognormal_call_quadrature(f, K, sigma), rel=1e-12)

    def test_put_equals_call_atm_without_rates(self):
        assert bs_put_price(ATM, 1.0, 0.2) == pytest.approx(bs_call_price(ATM, 1.0, 0.2), rel=1e-15)

    def test_deep_itm_and_otm_limits(self):
        assert bs_call_price(ATM, 1e-12, 0.2) == pytest.approx(1.0, abs=1e-9)
        assert bs_put_price(ATM, 1e-12, 0.2) < 1e-15
        assert bs_call_price(ATM, 1.5, 1e-8) < 1e-12

    def test_log_price_far_wing(self):
        # K = e^100: the price is exp(-O(1e5)), only the log is representable
        lp = log_call_price(ATM, math.exp(100.0), 0.2)
        mp.mp.dps = 50
        K = mp.e**100
        d1 = (-100 + mp.mpf("0.02")) / mp.mpf("0.2")
        exact = mp.ncdf(d1) - K * mp.ncdf(d1 - mp.mpf("0.2"))
        assert lp == pytest.approx(float(mp.log(exact)), rel=1e-12)
        assert log_put_price(ATM, math.exp(-100.0), 0.2) < -1e5

    @given(
        K=st.floats(0.05, 20.0),
        sigma=st.floats(0.02, 1.5),
        r=st.floats(0.0, 0.1),
        T=st.floats(0.05, 5.0),
    )
    def test_parity(self, K, sigma, r, T):
        f = MarketFrame(1.0, r, T)
        dev = bs_call_price(f, K, sigma) - bs_put_price(f, K, sigma) - 1.0 + K * f.discount
        assert abs(dev) < 1e-14 * max(1.0, K)

    @given(sigma=st.floats(0.05, 1.0), T=st.floats(0.1, 5.0))
    def test_monotone_and_convex_in_strike(self, sigma, T):
        f = MarketFrame(1.0, 0.02, T)
        K = np.linspace(0.2, 3.0, 200)
        C = np.array([bs_call_price(f, k, sigma) for k in K])
        # far out of the money the price underflows; the log price stays strict
        logC = np.array([log_call_price(f, k, sigma) for k in K])
        assert np.all(np.diff(logC) < 0.0)
        assert np.all(np.diff(C, 2) >= -1e-12)

    def test_increasing_in_sigma(self):
        s = np.linspace(0.01, 2.0, 200)
        C = np.array([bs_call_price(ATM, 1.4, v) for v in s])
        assert np.all(np.diff(C) > 0.0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            bs_call_price(ATM, -1.0, 0.2)
        with pytest.raises(DomainError):
            bs_call_price(ATM, 1.0, 0.0)
        with pytest.raises(DomainError):
            MarketFrame(x0=0.0)


class TestImpliedVol:
    def test_round_trip_simple(self):
        assert implied_vol(ATM, 1.2, bs_call_price(ATM, 1.2, 0.37)) == pytest.approx(0.37, abs=1e-10)

    def test_inverse_of_oracle_value(self):
        assert implied_vol(ATM, 1.0, 0.0796557) == pytest.approx(0.2, abs=1e-6)

    @given(
        sigma=st.floats(0.01, 2.0),
        logm=st.floats(math.log(1e-4), math.log(1e4)),
        T=st.floats(0.05, 10.0),
    )
    def test_round_trip_property(self, sigma, logm, T):
        f = MarketFrame(1.0, 0.03, T)
        K = math.exp(logm)
        # quotes are passed as out-of-the-money log prices
        if K >= f.forward:
            iv = implied_vol(f, K, log_price=log_call_price(f, K, sigma))
        else:
            iv = implied_vol(f, K, log_price=log_put_price(f, K, sigma), kind="put")
        assert abs(iv - sigma) < 1e-8

    def test_itm_quotes_use_parity(self):
        f = MarketFrame(1.0, 0.05, 1.0)
        assert implied_vol(f, 0.8, bs_call_price(f, 0.8, 0.25)) == pytest.approx(0.25, abs=1e-10)
        assert implied_vol(f, 1.3, bs_put_price(f, 1.3, 0.25), kind="put") == pytest.approx(0.25, abs=1e-10)

    @pytest.mark.parametrize("price", [1.0 - 1e-15, 1.0, 1.2, 0.0, -0.1])
    def test_band_violations(self, price):
        with pytest.raises(BandError):
            implied_vol(ATM, 1.0, price)

    def test_band_error_is_value_error(self):
        with pytest.raises(ValueError):
            implied_vol(ATM, 2.0, 5.0)
