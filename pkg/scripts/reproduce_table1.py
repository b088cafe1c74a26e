"""Monte Carlo table of theta, chi(1..3) and gamma(1..3) for the seven GARCH rows.

Usage: python3 scripts/reproduce_table1.py [N] [m] [seed] > table1.csv
"""
import sys

from tailchain.estimators import table1, table1_csv


def main():
    N = int(float(sys.argv[1])) if len(sys.argv) > 1 else 10000
    m = int(sys.argv[2]) if len(sys.argv) > 2 else 500
    seed = int(sys.argv[3]) if len(sys.argv) > 3 else 42

    def progress(row):
        print(f"({row.params.alpha1}, {row.params.beta1}) alpha={row.alpha.alpha:.3f} "
              f"theta={row.theta.estimate:.3f} [{row.seconds:.1f} s]", file=sys.stderr)

    rows = table1(N=N, m=m, seed=seed, progress=progress)
    sys.stdout.write(table1_csv(rows))


if __name__ == "__main__":
    main()
