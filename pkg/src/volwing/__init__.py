"""Implied volatility at extreme strikes.

Black-Scholes pricing and inversion, wing formulas with error envelopes,
tail-index estimators, put-call duality, stochastic-volatility tail
asymptotics, regular-variation diagnostics and static-arbitrage checks.
"""

from .arbitrage import SurfaceGrid, ValidationReport, discrete_measure, parity_check, validate_surface
from .asymptotics import (
    AsymptoticIV,
    NotAsymptoticWarning,
    iv_wing_call,
    iv_wing_call_refined,
    iv_wing_put,
    iv_wing_substitute,
    psi,
    tail_wing_smooth,
)
from .bs_core import MarketFrame, bs_call_price, bs_put_price, implied_vol, log_call_price, log_put_price
from .curves import PriceCurve, bs_curve
from .errors import *  # noqa: F401,F403
from .models import (
    HestonTail,
    HullWhiteTail,
    SteinSteinTail,
    call_wing_price,
    logscale_call_asympt,
    pareto_tail,
    rv_call_asympt,
    tail_density,
)
from .regvar import asym_relation_check, bingham_check, karamata_check, rv_index_estimate, svr_check
from .simulation import McResult, SdeSpec, mc_paths
from .symmetry import DualFrame, dual_call_G, dual_density, symmetry_check
from .tail_index import (
    DistributionSpec,
    estimate_left_index,
    estimate_right_index,
    lognormal_spec,
    moment_criterion,
    pareto_curves,
    pareto_spec,
)

__version__ = "0.1.0"
