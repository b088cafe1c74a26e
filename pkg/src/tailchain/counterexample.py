"""A continuous map ``f`` with ``f(Y) ~ Par(1)`` for ``Y ~ Par(1)`` whose
conditional laws ``L(Y / x | f(Y) > x)`` have a continuum of limit points.

On every level block ``[z, 5z]``, ``z = 5**i``, ``f`` is built from four
monotone pieces::

    f1 on [z, 2.25z]      increasing z -> 3z, defined through its inverse
    f2 on [2.25z, 3z]     up 3z -> 5z on the left half, mirrored on the right
    f3 on [3z, 4z]        9z - 2t   (3z -> z)
    f4 on [4z, 5z]        4t - 15z  (z -> 5z)

and ``f(t) = t`` for ``t <= 1``.  The inverses are chosen so that
``P(f(Y) > x) = 1/x`` for every ``x``.  Along ``x_i = c 5**i`` with
``c`` in ``[3, 5)`` the set ``{f(Y) > x_i}`` misses ``Y / x_i`` in
``(1, b_c)``, ``b_c = (15 + c) / (4c)``, while along ``x_i = 5**i`` it
is exactly ``{Y > x_i}``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ParameterError

_XTOL_REL = 1e-13


@dataclass(frozen=True)
class LevelBlock:
    """The pieces of ``f`` on ``[z, 5z]``."""

    z: float

    def f3_inv(self, x):
        return (9.0 * self.z - x) / 2.0

    def f4_inv(self, x):
        return (x + 15.0 * self.z) / 4.0

    def f1_inv(self, x):
        """Solves ``P(f1^{-1}(x) < Y < 2.25z) + P(3z < Y < f3^{-1}(x)) + P(Y > f4^{-1}(x)) = 1/x``."""
        return 1.0 / (1.0 / x + 1.0 / self.f3_inv(x) - 1.0 / self.f4_inv(x))

    def f2_left_inv(self, x):
        """``g`` in ``[2.25z, 2.625z]`` with ``1/g - 1/(5.25z - g) = 1/x - 1/f4^{-1}(x)``, ``x`` in ``[3z, 5z]``."""
        c = 5.25 * self.z
        r = max(1.0 / x - 1.0 / self.f4_inv(x), 0.0)
        # root of r g^2 - (r c + 2) g + c = 0 in cancellation-free form
        return 2.0 * c / (r * c + 2.0 + math.sqrt(r * r * c * c + 4.0))

    def f1(self, t):
        z = self.z
        if t <= z:
            return z
        if t >= 2.25 * z:
            return 3.0 * z
        return _invert_increasing(self.f1_inv, t, z, 3.0 * z)

    def f2(self, t):
        z = self.z
        mid = 2.625 * z
        if t > mid:
            t = 5.25 * z - t
        if t <= 2.25 * z:
            return 3.0 * z
        if t >= mid:
            return 5.0 * z
        return _invert_increasing(self.f2_left_inv, t, 3.0 * z, 5.0 * z)

    def f3(self, t):
        return 9.0 * self.z - 2.0 * t

    def f4(self, t):
        return 4.0 * t - 15.0 * self.z

    def __call__(self, t):
        z = self.z
        if t <= 2.25 * z:
            return self.f1(t)
        if t <= 3.0 * z:
            return self.f2(t)
        if t <= 4.0 * z:
            return self.f3(t)
        return self.f4(t)

    def pieces(self):
        """Monotone pieces as ``(lo, hi, increasing)``."""
        z = self.z
        return ((z, 2.25 * z, True), (2.25 * z, 2.625 * z, True), (2.625 * z, 3.0 * z, False),
                (3.0 * z, 4.0 * z, False), (4.0 * z, 5.0 * z, True))


def _invert_increasing(func, target, lo, hi):
    """``x`` in ``[lo, hi]`` with ``func(x) = target`` for increasing ``func``."""
    g = lambda x: func(x) - target  # noqa: E731
    glo, ghi = g(lo), g(hi)
    if glo >= 0:
        return lo
    if ghi <= 0:
        return hi
    return optimize.brentq(g, lo, hi, xtol=_XTOL_REL * lo, rtol=4 * np.finfo(float).eps, maxiter=200)


def level_of(t: float) -> float:
    """``5**i`` with ``5**i <= t < 5**(i+1)`` for ``t >= 1``."""
    i = int(math.floor(math.log(t, 5)))
    while 5.0 ** (i + 1) <= t:
        i += 1
    while 5.0 ** i > t:
        i -= 1
    return 5.0 ** i


def eval_f(t):
    """Evaluate ``f``; accepts scalars or arrays of nonnegative reals."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ParameterError("f is defined on finite t >= 0")
    if arr.ndim == 0:
        return _eval_scalar(float(arr))
    return np.array([_eval_scalar(float(v)) for v in arr.ravel()]).reshape(arr.shape)


def _eval_scalar(t):
    if t <= 1.0:
        return t
    return LevelBlock(level_of(t))(t)


# ---------------------------------------------------------------------------
# preimages and pushforward


def _crossing(lo, hi, x):
    """Point in ``[lo, hi]`` where a monotone piece of ``f`` crosses ``x`` (bisection on ``eval_f``)."""
    flo = _eval_scalar(lo)
    a, b = lo, hi
    up = _eval_scalar(hi) > flo
    for _ in range(200):
        mid = 0.5 * (a + b)
        above = _eval_scalar(mid) > x
        if above == up:
            b = mid
        else:
            a = mid
        if b - a <= _XTOL_REL * lo:
            break
    return 0.5 * (a + b)


def exceedance_set(x: float):
    """Intervals (union, disjoint) of ``t >= 1`` with ``f(t) > x``, found numerically piece by piece."""
    if x < 1.0:
        return [(1.0, math.inf)]
    z = level_of(x)
    out = []
    for lo, hi, increasing in LevelBlock(z).pieces():
        f_lo, f_hi = _eval_scalar(lo), _eval_scalar(hi)
        if max(f_lo, f_hi) <= x:
            continue
        if min(f_lo, f_hi) > x:
            out.append((lo, hi))
            continue
        cut = _crossing(lo, hi, x)
        out.append((cut, hi) if increasing else (lo, cut))
    # values beyond the block map into later blocks, hence above x
    out.append((5.0 * z, math.inf))
    return out


def pareto1_mass(a, b):
    """``P(a < Y < b)`` for ``Y ~ Par(1)``, ``1 <= a``."""
    a = max(a, 1.0)
    if b <= a:
        return 0.0
    return 1.0 / a - (0.0 if math.isinf(b) else 1.0 / b)


def pushforward_survival(x: float) -> float:
    """``P(f(Y) > x)`` for ``Y ~ Par(1)``, by summing preimage masses."""
    return math.fsum(pareto1_mass(a, b) for a, b in exceedance_set(x))


def verify_pareto_pushforward(grid) -> float:
    """Maximum of ``|P(f(Y) > x) - 1/x|`` over ``grid``."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if np.any(grid < 1.0):
        raise ParameterError("grid points must be >= 1")
    return max(abs(pushforward_survival(float(x)) - 1.0 / x) for x in grid)


# ---------------------------------------------------------------------------
# accumulation points


def gap_endpoint(c: float) -> float:
    """``b_c = (15 + c) / (4c)``: right end of the empty interval ``(1, b_c)``."""
    return (15.0 + c) / (4.0 * c)


def conditional_interval_mass(x: float, lo: float, hi: float) -> float:
    """``P(lo < Y/x < hi | f(Y) > x)`` for ``Y ~ Par(1)``."""
    total = 0.0
    parts = []
    for a, b in exceedance_set(x):
        total += pareto1_mass(a, b)
        parts.append(pareto1_mass(max(a, lo * x), min(b, hi * x)))
    return math.fsum(parts) / total


@dataclass
class AccumulationSummary:
    """Conditional laws of ``Y / x_i`` along ``x_i = c 5**i``.

    ``probabilities[j, i]`` is ``P(1 < Y/x_i < b_grid[j] | f(Y) > x_i)`` at level ``i``;
    ``gap_mass[i]`` the mass of ``(1, b_c)``; ``tail[j, i]`` is
    ``P(Y/x_i > b_grid[j] | f(Y) > x_i)``.
    """

    c: float
    b_c: float
    x: np.ndarray
    b_grid: np.ndarray
    probabilities: np.ndarray
    tail: np.ndarray
    gap_mass: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["c", "b", "probability"])
        for b, p in zip(self.b_grid, self.probabilities[:, -1]):
            writer.writerow([repr(float(self.c)), repr(float(b)), repr(float(p))])
        return buf.getvalue()


def accumulation_point_experiment(c: float, levels: int, b_grid=None) -> AccumulationSummary:
    """Exact conditional masses along ``x_i = c 5**i``, ``i = 1..levels``.

    ``c = 1`` gives the pure powers of five, where the conditional law is
    Par(1) and there is no gap (``b_c`` is reported as 1).
    """
    if not (c == 1.0 or 3.0 <= c < 5.0):
        raise ParameterError(f"c must lie in [3, 5) (or equal 1), got {c}")
    if levels < 5:
        raise ParameterError("levels must be >= 5")
    b_c = 1.0 if c == 1.0 else gap_endpoint(c)
    if b_grid is None:
        b_grid = np.unique(np.concatenate([np.round(np.arange(1.05, 3.0001, 0.05), 10), [b_c]]))
    b_grid = np.asarray(b_grid, dtype=float)
    x = c * 5.0 ** np.arange(1, levels + 1)
    probs = np.array([[conditional_interval_mass(xi, 1.0, b) for xi in x] for b in b_grid])
    tail = np.array([[conditional_interval_mass(xi, b, math.inf) for xi in x] for b in b_grid])
    gap = np.array([conditional_interval_mass(xi, 1.0, b_c) for xi in x])
    return AccumulationSummary(c=c, b_c=b_c, x=x, b_grid=b_grid, probabilities=probs, tail=tail, gap_mass=gap)
