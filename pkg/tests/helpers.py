import numpy as np


def ks_bound(samples, cdf, n_points=2000):
    """Upper bound on ``sup |F_n - F|`` using ``cdf`` only at ``n_points`` sample quantiles.

    Between consecutive evaluation points both functions are monotone, so the
    supremum exceeds the discrete maximum by at most the largest increment of
    ``F`` across a cell.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    idx = np.unique(np.linspace(0, n - 1, n_points).astype(int))
    pts = x[idx]
    F = np.array([cdf(v) for v in pts])
    right = np.searchsorted(x, pts, side="right") / n
    left = np.searchsorted(x, pts, side="left") / n
    d = max(np.max(np.abs(right - F)), np.max(np.abs(left - F)))
    # cells below the first and above the last point
    gaps = np.diff(np.concatenate([[0.0], F, [1.0]]))
    return float(d + gaps.max())


def ks_two_sample(a, b):
    a, b = np.sort(a), np.sort(b)
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))
