"""Static-arbitrage validation of a Black-Scholes surface and three broken copies.

Run: python3 demos/surface_check.py
"""

from volwing.arbitrage import validate_surface
from volwing.harness.fixtures import bs_surface

grid, puts = bs_surface(x0=1.0, r=0.02, sigma=0.2)


def show(title, g, p=None):
    print(title)
    for line in validate_surface(g, p).summary_lines():
        print("  " + line)
    print()


show("bundled fixture", grid, puts)

prices = [c.copy() for c in grid.prices]
j = int((grid.strikes[1] <= 0.8).nonzero()[0][-1])
prices[1][j] *= 1.01
show(f"1% bump at T={grid.expiries[1]}, K={grid.strikes[1][j]:.4f}", grid.replace_prices(prices))

prices = list(grid.prices)
prices[1], prices[2] = prices[2], prices[1]
show("expiries 0.5 and 1.0 swapped", grid.replace_prices(prices))

show("all prices scaled by 1.5", grid.replace_prices([1.5 * c for c in grid.prices]))
