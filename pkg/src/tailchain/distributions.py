"""Samplers and distribution functions for the GARCH(1,1) tail chain.

Covers the Pareto radius, the tilted first innovation, the random sign, and
the backward volatility increment ``A_{-1}``.  The last one is only known
through its distribution function

    P(A_{-1} <= x) = sqrt(2/pi) * int_{L(x)}^inf (alpha1 z**2 + beta1)**alpha exp(-z**2/2) dz,
    L(x) = sqrt((x**-2 - beta1) / alpha1),   0 < x < beta1**-0.5,

so it is sampled by inverting a tabulated CDF (:class:`MonotoneCdfTable`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate

from .errors import ConsistencyError, ParameterError
from .tail_index import GarchParams, abs_normal_moment, as_alpha, log_moment

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class ParetoLaw:
    """Pareto law with survival ``x**-index`` on ``[1, inf)``."""

    index: float

    def __post_init__(self):
        if not self.index > 0:
            raise ParameterError(f"Pareto index must be > 0, got {self.index}")

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 1.0, np.power(np.maximum(x, 1.0), -self.index), 1.0)

    def sample(self, rng: np.random.Generator, size=None):
        u = 1.0 - rng.random(size)  # (0, 1]
        return u ** (-1.0 / self.index)


def sample_pareto(law: ParetoLaw, rng: np.random.Generator, size=None):
    return law.sample(rng, size)


@dataclass(frozen=True)
class SignLaw:
    prob_plus: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.prob_plus <= 1.0:
            raise ParameterError(f"prob_plus must lie in [0, 1], got {self.prob_plus}")

    def sample(self, rng: np.random.Generator, size=None):
        return np.where(rng.random(size) < self.prob_plus, 1.0, -1.0)


@dataclass(frozen=True)
class TiltedInnovationLaw:
    """Law of the first innovation given a large return at time 0.

    Symmetric, with ``eps**2 / 2 ~ Gamma(alpha + 1/2, 1)``; equivalently the
    standard normal density tilted by ``|x|**(2 alpha)``.
    """

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"tilted innovation needs alpha > 0, got {self.alpha}")

    @property
    def shape(self) -> float:
        return self.alpha + 0.5

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        normal = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        return np.abs(x) ** (2.0 * self.alpha) * normal / abs_normal_moment(2.0 * self.alpha)

    def sample(self, rng: np.random.Generator, size=None):
        gamma = np.asarray(rng.standard_gamma(self.shape, size), dtype=float)
        # zero is a null event; redraw if the gamma variate underflows
        while np.any(gamma == 0.0):
            bad = gamma == 0.0
            gamma[bad] = rng.standard_gamma(self.shape, int(bad.sum()))
        signs = SignLaw(0.5).sample(rng, gamma.shape)
        out = signs * np.sqrt(2.0 * gamma)
        return float(out) if size is None else out


def sample_tilted_innovation(law: TiltedInnovationLaw, rng: np.random.Generator, size=None):
    return law.sample(rng, size)


# ---------------------------------------------------------------------------
# backward increment law


def _normalization(params: GarchParams, alpha: float) -> float:
    return math.exp(log_moment(params.alpha1, params.beta1, alpha))


def check_consistency(params: GarchParams, alpha, tol: float = 1e-6) -> float:
    """Raise :class:`ConsistencyError` unless ``alpha`` solves the moment equation."""
    a = as_alpha(alpha)
    if not a > 0:
        raise ParameterError(f"alpha must be > 0, got {a}")
    norm = _normalization(params, a)
    if abs(norm - 1.0) > tol:
        raise ConsistencyError(
            f"alpha={a:.6g} gives E[(alpha1 eps^2 + beta1)^alpha] = {norm:.9g}, not 1"
        )
    return norm


def _lower_limit(x, params: GarchParams):
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.maximum(x ** -2.0 - params.beta1, 0.0) / params.alpha1)


def _backward_density_z(z, params: GarchParams, alpha: float):
    z = np.asarray(z, dtype=float)
    return _SQRT_2_OVER_PI * (params.alpha1 * z * z + params.beta1) ** alpha * np.exp(-0.5 * z * z)


def _tail_integral(lower: float, params: GarchParams, alpha: float) -> float:
    # split at the integrand's mode so quad sees the bulk
    z_peak = math.sqrt(max(2.0 * alpha - params.beta1 / params.alpha1, 0.0))

    def f(z):
        return float(_backward_density_z(z, params, alpha))

    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
    if lower < z_peak:
        return integrate.quad(f, lower, z_peak, **opts)[0] + integrate.quad(f, z_peak, math.inf, **opts)[0]
    return integrate.quad(f, lower, math.inf, **opts)[0]


def backward_increment_cdf(x: float, params: GarchParams, alpha, with_flag: bool = False):
    """``P(A_{-1} <= x)`` by adaptive quadrature.

    Points outside ``(0, beta1**-0.5)`` are clamped to 0 or 1; pass
    ``with_flag=True`` to also receive whether clamping happened.
    """
    a = as_alpha(alpha)
    check_consistency(params, a)
    x = float(x)
    if x <= 0.0:
        value, clamped = 0.0, True
    elif x >= params.upper_support:
        value, clamped = 1.0, True
    else:
        value = min(1.0, max(0.0, _tail_integral(float(_lower_limit(x, params)), params, a)))
        clamped = False
    return (value, clamped) if with_flag else value


def backward_cdf_at_endpoint(params: GarchParams, alpha) -> float:
    """Unclamped CDF at the right end of the support (lower integration limit 0).

    Equals ``E[(alpha1 eps**2 + beta1)**alpha]``, so it is 1 exactly when
    ``alpha`` solves the tail-index equation.
    """
    return _tail_integral(0.0, params, as_alpha(alpha))


@dataclass(frozen=True)
class MonotoneCdfTable:
    """Tabulated monotone CDF with its inverse.

    ``order="linear"`` interpolates piecewise linearly, so ``inverse`` is the
    exact inverse of ``cdf`` between nodes.  ``order="pchip"`` uses monotone
    cubic interpolation in both directions.
    """

    grid: np.ndarray
    cdf_values: np.ndarray
    order: str = "linear"
    _forward: object = field(default=None, repr=False, compare=False)
    _backward: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.cdf_values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("grid and cdf_values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(np.diff(values) <= 0):
            raise ValueError("cdf_values must be strictly increasing")
        if values[0] > 1e-12 or values[-1] < 1.0 - 1e-12 or values[0] < 0 or values[-1] > 1:
            raise ValueError("cdf_values must run from <= 1e-12 to >= 1 - 1e-12 inside [0, 1]")
        if self.order not in ("linear", "pchip"):
            raise ValueError(f"unknown interpolation order {self.order!r}")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "cdf_values", values)
        if self.order == "pchip":
            object.__setattr__(self, "_forward", interpolate.PchipInterpolator(grid, values))
            object.__setattr__(self, "_backward", interpolate.PchipInterpolator(values, grid))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.order == "linear":
            out = np.interp(x, self.grid, self.cdf_values)
        else:
            out = self._forward(np.clip(x, self.grid[0], self.grid[-1]))
        out = np.where(x < self.grid[0], 0.0, np.where(x > self.grid[-1], 1.0, out))
        return np.clip(out, 0.0, 1.0)

    def inverse(self, u):
        u = np.clip(np.asarray(u, dtype=float), self.cdf_values[0], self.cdf_values[-1])
        if self.order == "linear":
            return np.interp(u, self.cdf_values, self.grid)
        return np.clip(self._backward(u), self.grid[0], self.grid[-1])

    def sample(self, rng: np.random.Generator, size=None):
        return self.inverse(rng.random(size))


def _gauss_legendre_segments(edges, f, order=20):
    """Integrals of ``f`` over consecutive intervals of ``edges``."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    z = lo + half * (nodes[None, :] + 1.0)
    return (f(z) * weights[None, :] * half).sum(axis=1)


def _tail_on_grid(lower_limits, params, alpha):
    """``int_L^inf`` of the backward density at each ascending ``L``."""
    L = np.asarray(lower_limits, dtype=float)
    pieces = _gauss_legendre_segments(L, lambda z: _backward_density_z(z, params, alpha))
    beyond = _tail_integral(float(L[-1]), params, alpha)
    tail = np.empty_like(L)
    tail[-1] = beyond
    tail[:-1] = beyond + np.cumsum(pieces[::-1])[::-1]
    return tail


def build_backward_sampler(params: GarchParams, alpha, n_nodes: int = 8192, order: str = "linear",
                           p_min: float = 1e-13) -> MonotoneCdfTable:
    """Inverse-CDF table for ``A_{-1}``.

    Nodes are placed at logit-spaced CDF levels between ``p_min`` and
    ``1 - p_min`` and their CDF values recomputed by Gauss-Legendre panels,
    then the exact endpoints are appended (``x = 0`` and, for ``beta1 > 0``,
    ``x = beta1**-0.5``).
    """
    a = as_alpha(alpha)
    check_consistency(params, a)
    if n_nodes < 4096:
        raise ValueError("backward sampler needs at least 4096 nodes")

    # coarse pass in the integration variable L (L = 0 <-> upper endpoint)
    z_peak = math.sqrt(max(2.0 * a - params.beta1 / params.alpha1, 0.0))
    l_max = z_peak + 2.0
    while _tail_integral(l_max, params, a) > 0.1 * p_min:
        l_max += 1.0
    # geometric refinement near L = 0, where 1 - F vanishes like a power of L
    coarse = np.unique(np.concatenate([np.linspace(0.0, l_max, 20001), np.geomspace(1e-12, 1e-2, 2001)]))
    coarse_tail = np.clip(_tail_on_grid(coarse, params, a), 1e-300, None)

    # logit-spaced targets in the CDF domain, mapped back to L
    logits = np.linspace(math.log(p_min / (1 - p_min)), math.log((1 - p_min) / p_min), n_nodes)
    coarse_logit = np.log(coarse_tail) - np.log1p(-np.minimum(coarse_tail, 1 - 1e-16))
    # coarse_logit decreases in L; np.interp needs ascending abscissae
    L_nodes = np.interp(logits, coarse_logit[::-1], coarse[::-1])
    L_nodes = np.unique(np.concatenate([L_nodes, [0.0] if params.beta1 > 0 else []]))
    if params.beta1 == 0:
        L_nodes = L_nodes[L_nodes > 0]

    tail = _tail_on_grid(L_nodes, params, a)
    x_nodes = (params.alpha1 * L_nodes ** 2 + params.beta1) ** -0.5
    # ascending x corresponds to descending L
    x_nodes, cdf = x_nodes[::-1], tail[::-1]
    if params.beta1 > 0:
        cdf[-1] = 1.0
    cdf = np.minimum(cdf, 1.0)
    x_nodes = np.concatenate([[0.0], x_nodes])
    cdf = np.concatenate([[0.0], cdf])
    # near beta1**-0.5 neighbouring x collapse below float resolution; keep the later node
    keep = np.append((np.diff(cdf) > 0) & (np.diff(x_nodes) > 0), True)
    return MonotoneCdfTable(x_nodes[keep], cdf[keep], order=order)


@lru_cache(maxsize=64)
def cached_backward_sampler(params: GarchParams, alpha: float) -> MonotoneCdfTable:
    return build_backward_sampler(params, alpha)
