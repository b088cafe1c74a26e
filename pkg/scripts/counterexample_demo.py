"""Conditional laws of Y/x given f(Y) > x along two subsequences of thresholds."""
from tailchain.counterexample import accumulation_point_experiment, verify_pareto_pushforward

import numpy as np


def main():
    dev = verify_pareto_pushforward(np.geomspace(1.0, 5.0 ** 6, 200))
    print(f"max |P(f(Y) > x) - 1/x| on 200 points: {dev:.2e}")
    for c in (1.0, 3.0, 4.0):
        s = accumulation_point_experiment(c, 8, b_grid=[1.25, 1.5, 2.0, 3.0])
        print(f"c = {c}: gap (1, {s.b_c:.4f}) mass {s.gap_mass[-1]:.3e}; "
              + ", ".join(f"P(1 < Y/x < {b}) = {p:.4f}" for b, p in zip(s.b_grid, s.probabilities[:, -1])))


if __name__ == "__main__":
    main()
