"""Coupling thresholds: bounds, mass dependence and the low-dimensional decay.

Prints the eigenvalue threshold with its explicit lower and upper bounds
for several exponents, the fitted mass exponent against the exact one,
and the finite-ball estimate in one dimension for growing radii.
"""

from coupled_ground.beta import BetaProblem, beta_bounds, beta_direct, beta_scaling_report, beta_star, sobolev_constant


def main() -> None:
    print("dim,p,r,lower,beta_star,upper")
    for dim, p, r in ((3, 4.0, 1.5), (3, 4.0, 2.0), (3, 5.0, 2.0), (4, 3.5, 1.5)):
        bp = BetaProblem(dim, p, 1.0, 1.0, r)
        lo, hi = beta_bounds(bp, sobolev_constant(dim))
        print(f"{dim},{p:g},{r:g},{lo:.8g},{beta_star(bp):.8g},{hi:.8g}")
    print()
    print("r,regime,fitted_slope,exact_slope")
    for r in (1.5, 2.0, 2.5):
        rep = beta_scaling_report(BetaProblem(3, 4.0, 1.0, 1.0, r), (0.25, 0.5, 1.0, 2.0, 4.0))
        print(f"{r:g},{rep.regime},{rep.slope:.8f},{rep.expected_slope:.8f}")
    print()
    print("radius,estimate_N1_p8_r2")
    for R in (20.0, 40.0, 80.0, 160.0):
        print(f"{R:g},{beta_direct(BetaProblem(1, 8.0, 1.0, 1.0, 2.0), R, int(100 * R) + 1):.6g}")


if __name__ == "__main__":
    main()
