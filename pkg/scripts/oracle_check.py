"""Compare finite-threshold statistics of a long GARCH path with the tail chain.

Usage: python3 scripts/oracle_check.py [alpha1] [beta1] [length]
"""
import sys

from tailchain.estimators import estimate_chi, estimate_gamma
from tailchain.oracle import PathSimConfig, empirics_from_series, simulate_garch_path
from tailchain.tail_index import GarchParams, abs_normal_moment, solve_tail_index


def main():
    a1 = float(sys.argv[1]) if len(sys.argv) > 1 else 0.15
    b1 = float(sys.argv[2]) if len(sys.argv) > 2 else 0.84
    length = int(float(sys.argv[3])) if len(sys.argv) > 3 else 10**7
    p = GarchParams(1e-6, a1, b1)
    alpha = solve_tail_index(p).alpha
    sigma, zeta = simulate_garch_path(PathSimConfig(p, length=length))
    print(f"alpha = {alpha:.4f}, C = E|eps|^(2 alpha) = {abs_normal_moment(2 * alpha):.4f}")
    chi = [estimate_chi(p, alpha, h=h, N=10000).estimate for h in (1, 2, 3)]
    gamma = [estimate_gamma(p, alpha, h=h, m=50, N=10000).estimate for h in (1, 2, 3)]
    print("tail chain   chi " + " ".join(f"{v:.4f}" for v in chi)
          + "   gamma(m=50) " + " ".join(f"{v:.4f}" for v in gamma))
    for q in (0.995, 0.999, 0.9995):
        e = empirics_from_series(zeta, sigma, p, q, 3, 50)
        print(f"q={q:<7} chi " + " ".join(f"{v:.4f}" for v in e.chi)
              + "   gamma(m=50) " + " ".join(f"{v:.4f}" for v in e.gamma)
              + f"   C_hat {e.C_hat:.4f}  ({e.n_exceed} exceedances)")


if __name__ == "__main__":
    main()
