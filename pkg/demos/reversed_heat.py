"""Degenerate time-fractional problem on the circle.

Solves D^alpha (|xi|^2 u) = -u with u(0) = sin(kx) for a few orders and
modes, and compares with the exact amplitude E_alpha(-t^alpha / k^2). Also
fits the growth exponent of a Schroedinger-type family.
"""
import cmath
import math

import numpy as np

from fracresolvent import DfpProblem, PolySymbol, TorusGrid, fit_growth_exponent, mittag_leffler, solve_dfp


def modes():
    grid = TorusGrid((32,), (2 * math.pi,))
    x = grid.x[0]
    lap = PolySymbol.minus_abs_squared(1)
    one = PolySymbol.univariate([1])
    sq = PolySymbol.univariate([0, 0, 1])
    times = np.array([0.5, 1.0, 2.0, 4.0])
    print("alpha  k   max error")
    for alpha in (0.5, 1.0, 1.5):
        for k in (1, 3, 8):
            prob = DfpProblem(lap, one, sq, -1, 0, alpha, grid, "reversed", phi=np.sin(k * x))
            u = solve_dfp(prob, times)
            amp = mittag_leffler(alpha, 1, -(times**alpha) / k**2)
            err = np.max(np.abs(u - amp[:, None] * np.sin(k * x)))
            print(f"{alpha:5.2f}  {k}   {err:.2e}")


def growth():
    grid = TorusGrid((4096,), (2560.0,))
    one = PolySymbol.univariate([1])
    sq = PolySymbol.univariate([0, 0, 1])
    for alpha in (1.0, 1.5):
        p1 = PolySymbol.univariate([0, 0, cmath.exp(0.5j * alpha * math.pi)])
        fit = fit_growth_exponent(DfpProblem(p1, one, sq, -1, 0, alpha, grid))
        print(f"alpha={alpha}: fitted growth exponent {fit.exponent:.3f}, bound {max(1, alpha) / 2:.2f}")


if __name__ == "__main__":
    modes()
    print()
    growth()
