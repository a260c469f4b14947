"""Put-call duality: implied vols of C at K match those of the dual call at F^2/K.

Run: python3 demos/duality.py
"""

import numpy as np

from volwing.bs_core import MarketFrame
from volwing.curves import PriceCurve
from volwing.symmetry import dual_call_curve, dual_put_curve, symmetry_check
from volwing.tail_index import call_from_ccdf, estimate_left_index, estimate_right_index, pareto_curves, pareto_spec, put_from_cdf

frame = MarketFrame(4.0 / 3.0, 0.0, 1.0)
spec = pareto_spec(5.0)
C = PriceCurve(lambda K: call_from_ccdf(frame, spec, K), kind="call")
P = PriceCurve(lambda K: put_from_cdf(frame, spec, K), kind="put")

rep = symmetry_check(frame, C, P, np.exp(np.linspace(0.05, 1.2, 8)))
print(f"{'K':>8} {'F^2/K':>8} {'IV call':>9} {'IV dual':>9}")
for K, Kd, a, b in zip(rep.strikes, rep.dual_strikes, rep.iv_call, rep.iv_dual):
    print(f"{K:8.4f} {Kd:8.4f} {a:9.6f} {b:9.6f}")
print(f"max deviation {rep.max_deviation:.2e}\n")

# a heavy right tail becomes a heavy left tail of the dual law
Cc, Pc = pareto_curves(frame, 5.0)
right = estimate_right_index(frame, Cc, np.exp(np.linspace(2.0, 40.0, 30)))
print(f"right index of C: {right.l_hat:.4f}")
G = dual_call_curve(frame, Pc)
print(f"G at the forward equals P at the forward: {G(frame.forward):.6f} vs {Pc(frame.forward):.6f}")
left = estimate_left_index(frame, dual_put_curve(frame, Cc), np.exp(-np.linspace(2.0, 40.0, 30)))
print(f"left index of the dual put: {left.m_hat:.4f} (right index + 1)")
