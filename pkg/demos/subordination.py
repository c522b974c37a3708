"""Subordinate the decay semigroup e^(-t) by the Bessel and Wright routes.

Prints the sup error of each route against its closed form and the gap
between the dedicated routes and the general-purpose quadrature.
"""
import numpy as np

from fracresolvent import (
    bessel_spec,
    bessel_subordinate,
    construct_family,
    from_matrix,
    make_power,
    mittag_leffler,
    subordinate_general,
    wright_spec,
    wright_subordinate,
)


def main():
    g1 = make_power(1)
    decay = construct_family(from_matrix(-1), 1, g1, g1)
    grid = np.geomspace(1e-2, 10, 25)

    bessel = bessel_subordinate(decay, 0, 1, grid=grid)
    wright = wright_subordinate(decay, -0.5, 2, 0, 0, 0, grid=grid)

    t = grid
    bessel_ref = 1 - np.exp(-t)
    wright_ref = np.sqrt(t) * mittag_leffler(0.5, 1.5, -np.sqrt(t))
    print(f"bessel route vs 1 - e^-t:            {np.max(np.abs(bessel.scalar() - bessel_ref)):.2e}")
    print(f"wright route vs sqrt(t) E(-sqrt(t)): {np.max(np.abs(wright.scalar() - wright_ref)):.2e}")

    general_b = subordinate_general(decay, bessel_spec(0, 1), grid=grid)
    general_w = subordinate_general(decay, wright_spec(-0.5, 2, 0), grid=grid)
    print(f"general quadrature gap (bessel):     {np.max(np.abs(general_b.mats - bessel.mats)):.2e}")
    print(f"general quadrature gap (wright):     {np.max(np.abs(general_w.mats - wright.mats)):.2e}")

    print("\n     t    bessel    wright")
    for ti, b, w in zip(t[::4], bessel.scalar()[::4], wright.scalar()[::4]):
        print(f"{ti:6.3f}  {b.real:8.5f}  {w.real:8.5f}")


if __name__ == "__main__":
    main()
