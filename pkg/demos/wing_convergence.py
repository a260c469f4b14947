"""Wing formulas against exact inversion on a Black-Scholes and a Pareto curve.

Run: python3 demos/wing_convergence.py
"""

import math

from volwing.asymptotics import iv_wing_call, iv_wing_call_refined
from volwing.bs_core import MarketFrame, implied_vol
from volwing.curves import bs_curve
from volwing.tail_index import pareto_curves


def table(title, frame, C):
    print(title)
    print(f"{'log K':>6} {'exact':>10} {'plain':>10} {'refined':>10} {'envelope':>10}")
    for lk in range(10, 81, 10):
        K = math.exp(lk)
        exact = implied_vol(frame, K, log_price=C.log_price(K))
        plain = iv_wing_call(frame, C, K)
        refined = iv_wing_call_refined(frame, C, K)
        print(f"{lk:6d} {exact:10.6f} {plain.value:10.6f} {refined.value:10.6f} {plain.envelope:10.2e}")
    print()


if __name__ == "__main__":
    unit = MarketFrame(1.0, 0.0, 1.0)
    table("Black-Scholes, sigma = 0.2: both formulas recover the flat smile", unit, bs_curve(unit, 0.2))

    frame = MarketFrame(4.0 / 3.0, 0.0, 1.0)
    C, _ = pareto_curves(frame, 5.0)
    table("Pareto density 4 x^-5: the smile grows like sqrt(log K)", frame, C)
    lk = 40.0
    slope = implied_vol(frame, math.exp(lk), log_price=C.log_price(math.exp(lk))) / math.sqrt(2 * lk)
    print(f"I(K) / sqrt(2 log K) at log K = 40: {slope:.4f}  (limit 2 - sqrt 3 = {2 - math.sqrt(3):.4f})")
