"""GARCH(1,1) tail index and normal-moment constants.

The squared GARCH(1,1) processes are regularly varying with index ``alpha``,
the positive root of ``E[(alpha1 * eps**2 + beta1) ** alpha] = 1`` for a
standard normal ``eps``.  Returns and volatility therefore have index
``2 * alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .errors import NoTailIndexError, ParameterError

EULER_GAMMA = 0.5772156649015329
_LOG_SQRT_2_OVER_PI = 0.5 * math.log(2.0 / math.pi)
BRACKET_CAP = 200.0


@dataclass(frozen=True)
class GarchParams:
    """GARCH(1,1) coefficients ``sigma_t**2 = alpha0 + (alpha1 eps_t**2 + beta1) sigma_{t-1}**2``."""

    alpha0: float = 1e-6
    alpha1: float = 0.1
    beta1: float = 0.85

    def __post_init__(self):
        for name in ("alpha0", "alpha1", "beta1"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value}")
        if self.alpha0 <= 0:
            raise ParameterError(f"alpha0 must be > 0, got {self.alpha0}")
        if self.alpha1 <= 0:
            raise ParameterError(f"alpha1 must be > 0, got {self.alpha1}")
        if self.beta1 < 0:
            raise ParameterError(f"beta1 must be >= 0, got {self.beta1}")

    @property
    def stationary(self) -> bool:
        return self.alpha1 + self.beta1 < 1.0

    def require_stationary(self):
        if not self.stationary:
            raise ParameterError(
                f"simulation needs alpha1 + beta1 < 1, got {self.alpha1 + self.beta1:.6g}"
            )

    @property
    def upper_support(self) -> float:
        """Right endpoint ``beta1**-0.5`` of the backward increment law."""
        return math.inf if self.beta1 == 0 else self.beta1 ** -0.5

    def phi(self, eps):
        """Forward volatility multiplier ``sqrt(alpha1 eps**2 + beta1)``."""
        eps = np.asarray(eps, dtype=float)
        return np.sqrt(self.alpha1 * eps * eps + self.beta1)


@dataclass(frozen=True)
class TailIndex:
    """Index of regular variation of the squared processes."""

    alpha: float
    residual: float

    def __float__(self):
        return float(self.alpha)

    @property
    def two_alpha(self) -> float:
        return 2.0 * self.alpha


def abs_normal_moment(two_alpha: float) -> float:
    """``E|N(0,1)|**p`` for ``p = two_alpha``, via ``2**(p/2) Gamma((p+1)/2) / sqrt(pi)``."""
    if not two_alpha > 0:
        raise ParameterError(f"moment order must be > 0, got {two_alpha}")
    p = float(two_alpha)
    return math.exp(0.5 * p * math.log(2.0) + special.gammaln(0.5 * (p + 1.0)) - 0.5 * math.log(math.pi))


def _log_moment_quad(alpha1: float, beta1: float, a: float) -> float:
    # integrand peaks where z**2 = 2a - beta1/alpha1; rescale by its maximum to avoid overflow
    z_peak = math.sqrt(max(2.0 * a - beta1 / alpha1, 0.0))

    def log_kernel(z):
        return a * math.log(alpha1 * z * z + beta1) - 0.5 * z * z

    shift = log_kernel(z_peak)

    def kernel(z):
        return math.exp(log_kernel(z) - shift)

    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=400)
    left = integrate.quad(kernel, 0.0, z_peak, **opts)[0] if z_peak > 0 else 0.0
    right = integrate.quad(kernel, z_peak, math.inf, **opts)[0]
    return shift + math.log(left + right) + _LOG_SQRT_2_OVER_PI


@lru_cache(maxsize=4096)
def log_moment(alpha1: float, beta1: float, a: float) -> float:
    """``log E[(alpha1 eps**2 + beta1)**a]`` for standard normal ``eps``."""
    if a == 0:
        return 0.0
    if beta1 == 0:
        return a * math.log(alpha1) + math.log(abs_normal_moment(2.0 * a))
    return _log_moment_quad(alpha1, beta1, a)


def moment(params: GarchParams, a: float) -> float:
    return math.exp(log_moment(params.alpha1, params.beta1, float(a)))


def log_drift(params: GarchParams) -> float:
    """``E[log(alpha1 eps**2 + beta1)]``; negative drift is needed for a finite tail index."""
    a1, b1 = params.alpha1, params.beta1
    if b1 == 0:
        return math.log(a1) - (EULER_GAMMA + math.log(2.0))

    def integrand(z):
        return math.log(a1 * z * z + b1) * math.exp(-0.5 * z * z)

    value = integrate.quad(integrand, 0.0, math.inf, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    return value * math.sqrt(2.0 / math.pi)


def solve_tail_index(params: GarchParams) -> TailIndex:
    """Positive root of ``E[(alpha1 eps**2 + beta1)**a] = 1``.

    The bracket starts at ``[1e-6, 1]`` and its upper end doubles until the
    moment exceeds one, giving up beyond ``a = 200``.
    """
    drift = log_drift(params)
    if not drift < 0:
        raise ParameterError(
            f"E[log(alpha1 eps^2 + beta1)] = {drift:.6g} >= 0; no stationary heavy-tailed solution"
        )
    a1, b1 = params.alpha1, params.beta1

    def g(a):
        return log_moment(a1, b1, a)

    lo, hi = 1e-6, 1.0
    while g(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > BRACKET_CAP:
            raise NoTailIndexError(f"no sign change of the moment equation below a = {BRACKET_CAP:g}")
    root = optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    residual = abs(math.expm1(g(root)))
    if residual >= 1e-9:
        raise NoTailIndexError(f"tail index residual {residual:.3g} above 1e-9")
    return TailIndex(alpha=root, residual=residual)


def as_alpha(alpha) -> float:
    """Accept a :class:`TailIndex` or a bare float."""
    return float(alpha.alpha) if isinstance(alpha, TailIndex) else float(alpha)
