"""Joint tail chain of GARCH(1,1) returns and volatility.

Given ``zeta_0 > x`` (one-sided) or ``|zeta_0| > x`` (two-sided), the
rescaled returns converge to

    zeta_0 = R * S_0,                       R ~ Par(2 alpha)
    sigma_0 = R / |E_1|,                    E_1 tilted innovation
    sigma_t = sigma_{t-1} sqrt(alpha1 eps_t**2 + beta1),   t >= 1 (eps_1 = E_1)
    sigma_{-t} = sigma_{-t+1} A_{-t},       A_{-t} backward increments
    zeta_t = sigma_t |eps_{t+1}| S_t,       t >= 1
    zeta_{-t} = sigma_{-t} sqrt((A_{-t}**-2 - beta1) / alpha1) S_{-t}

with all ingredients mutually independent.  Volatility products are
accumulated in log space.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _rng
from .distributions import (MonotoneCdfTable, ParetoLaw, SignLaw, TiltedInnovationLaw,
                            cached_backward_sampler, check_consistency)
from .tail_index import GarchParams, as_alpha

ONE_SIDED = "one-sided"
TWO_SIDED = "two-sided"
_LOG_FLOOR = -700.0


def _check_conditioning(conditioning):
    if conditioning not in (ONE_SIDED, TWO_SIDED):
        raise ValueError(f"conditioning must be {ONE_SIDED!r} or {TWO_SIDED!r}, got {conditioning!r}")


def _backward_return_factor(a, params: GarchParams):
    """``|eps|`` recovered from a backward increment: ``sqrt((a**-2 - beta1) / alpha1)``."""
    return np.sqrt(np.maximum(a ** -2.0 - params.beta1, 0.0) / params.alpha1)


def _exp_saturating(log_values):
    saturated = bool(np.any(log_values < _LOG_FLOOR))
    return np.where(log_values < _LOG_FLOOR, 0.0, np.exp(log_values)), saturated


@dataclass(frozen=True)
class GarchTailChainSample:
    """One tail-chain realisation on ``t = -m, ..., n``.

    ``signs``, ``sigma_path`` and ``zeta_path`` are indexed by ``t + m``;
    ``fwd_innovations[i]`` is ``eps_{i+2}``, ``bwd_increments[i]`` is ``A_{-(i+1)}``.
    """

    params: GarchParams
    alpha: float
    m: int
    n: int
    zeta0_mag: float
    eps1: float
    signs: np.ndarray
    fwd_innovations: np.ndarray
    bwd_increments: np.ndarray
    sigma_path: np.ndarray
    zeta_path: np.ndarray
    saturated: bool = False

    @property
    def times(self):
        return np.arange(-self.m, self.n + 1)

    def zeta(self, t: int) -> float:
        return float(self.zeta_path[t + self.m])

    def sigma(self, t: int) -> float:
        return float(self.sigma_path[t + self.m])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "sigma", "zeta"])
        for t, sig, z in zip(self.times, self.sigma_path, self.zeta_path):
            writer.writerow([int(t), repr(float(sig)), repr(float(z))])
        return buf.getvalue()


def _assemble(params, alpha, m, n, zeta0_mag, eps1, signs, fwd, bwd):
    """Build sigma and zeta paths from component draws (single path)."""
    log_sigma0 = math.log(zeta0_mag) - math.log(abs(eps1))
    fwd_steps = np.log(params.phi(np.concatenate([[eps1], fwd[:max(n - 1, 0)]])))[:n]
    log_fwd = log_sigma0 + np.cumsum(fwd_steps)
    log_bwd = log_sigma0 + np.cumsum(np.log(bwd))
    log_sigma = np.concatenate([log_bwd[::-1], [log_sigma0], log_fwd])
    sigma, saturated = _exp_saturating(log_sigma)

    zeta = np.empty(m + n + 1)
    zeta[m] = zeta0_mag * signs[m]
    zeta[m + 1:] = sigma[m + 1:] * np.abs(fwd[:n]) * signs[m + 1:]
    zeta[:m] = (sigma[:m] * _backward_return_factor(bwd, params)[::-1] * signs[:m])
    return sigma, zeta, saturated


def sample_garch_tail_chain(params: GarchParams, alpha, m: int, n: int, conditioning: str = ONE_SIDED,
                            rng: Optional[np.random.Generator] = None,
                            table: Optional[MonotoneCdfTable] = None) -> GarchTailChainSample:
    """Draw one joint tail-chain path ``zeta_{-m..n}`` with its volatility path.

    Draw order from ``rng``: radius, tilted innovation, signs ``S_{-m..n}``,
    forward normals ``eps_{2..n+1}``, backward uniforms for ``A_{-1..-m}``.
    """
    _check_conditioning(conditioning)
    if m < 0 or n < 0:
        raise ValueError("m and n must be >= 0")
    params.require_stationary()
    a = as_alpha(alpha)
    check_consistency(params, a)
    rng = np.random.default_rng() if rng is None else rng
    table = cached_backward_sampler(params, a) if table is None else table

    zeta0_mag = float(ParetoLaw(2.0 * a).sample(rng))
    eps1 = float(TiltedInnovationLaw(a).sample(rng))
    signs = SignLaw(0.5).sample(rng, m + n + 1)
    if conditioning == ONE_SIDED:
        signs[m] = 1.0
    fwd = rng.standard_normal(n)
    bwd = table.inverse(rng.random(m))
    bwd = np.where(bwd > 0, bwd, table.grid[1])

    sigma, zeta, saturated = _assemble(params, a, m, n, zeta0_mag, eps1, signs, fwd, bwd)
    return GarchTailChainSample(params=params, alpha=a, m=m, n=n, zeta0_mag=zeta0_mag, eps1=eps1,
                                signs=signs, fwd_innovations=fwd, bwd_increments=bwd,
                                sigma_path=sigma, zeta_path=zeta, saturated=saturated)


def closed_form_zeta(sample: GarchTailChainSample) -> np.ndarray:
    """``zeta_{-m..n}`` from the explicit product formula, without the sigma chain."""
    p, m, n = sample.params, sample.m, sample.n
    out = np.empty(m + n + 1)
    out[m] = sample.zeta0_mag * sample.signs[m]
    eps = np.concatenate([[sample.eps1], sample.fwd_innovations])  # eps_1 .. eps_{n+1}
    for t in range(1, n + 1):
        prod = 1.0
        for i in range(1, t + 1):
            prod *= math.sqrt(p.alpha1 * eps[i - 1] ** 2 + p.beta1)
        out[m + t] = sample.zeta0_mag * prod * abs(eps[t]) / abs(sample.eps1) * sample.signs[m + t]
    for t in range(1, m + 1):
        prod = 1.0
        for i in range(1, t + 1):
            prod *= sample.bwd_increments[i - 1]
        a_t = sample.bwd_increments[t - 1]
        factor = math.sqrt(max(a_t ** -2 - p.beta1, 0.0) / p.alpha1)
        out[m - t] = sample.zeta0_mag * prod * factor / abs(sample.eps1) * sample.signs[m - t]
    return out


def chain_algebra_check(sample: GarchTailChainSample, rtol: float = 1e-12) -> bool:
    """True iff every defining identity of the sample holds to relative tolerance ``rtol``."""
    p, m, n = sample.params, sample.m, sample.n
    sigma, zeta, signs = sample.sigma_path, sample.zeta_path, sample.signs

    def close(x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return bool(np.all(np.abs(x - y) <= rtol * np.maximum(np.abs(x), np.abs(y))))

    if not sample.saturated and not np.all(sigma > 0):
        return False
    if not np.all(np.isin(signs, (-1.0, 1.0))):
        return False
    if not close(sigma[m], sample.zeta0_mag / abs(sample.eps1)):
        return False
    if not close(zeta[m], sample.zeta0_mag * signs[m]):
        return False
    if n >= 1:
        steps = p.phi(np.concatenate([[sample.eps1], sample.fwd_innovations[:n - 1]]))
        if not close(sigma[m + 1:], sigma[m:m + n] * steps):
            return False
        if not close(zeta[m + 1:], sigma[m + 1:] * np.abs(sample.fwd_innovations[:n]) * signs[m + 1:]):
            return False
    if m >= 1:
        a = sample.bwd_increments
        if not np.all((a > 0) & (a < p.upper_support)):
            return False
        if not close(sigma[:m][::-1], sigma[1:m + 1][::-1] * a):
            return False
        if not close(zeta[:m][::-1], sigma[:m][::-1] * _backward_return_factor(a, p) * signs[:m][::-1]):
            return False
    return True


# ---------------------------------------------------------------------------
# batched simulation for the estimators


@dataclass
class ChainBlock:
    """Returns of a block of tail-chain paths, time-major.

    ``forward[t-1]`` holds ``zeta_t`` (t = 1..n) and ``backward[t-1]`` holds
    ``zeta_{-t}`` (t = 1..m), one column per path.
    """

    zeta0: np.ndarray
    forward: np.ndarray
    backward: np.ndarray


def simulate_block(params: GarchParams, alpha: float, table: MonotoneCdfTable, m: int, n: int,
                   seed: int, block: int, size: int, conditioning: str = ONE_SIDED) -> ChainBlock:
    """Simulate ``size`` paths of block ``block`` from per-component streams.

    Time-major draws make the first ``k`` time steps identical for every
    horizon ``n >= k`` (and likewise backwards), so estimates at different
    horizons share their random numbers.
    """
    a = as_alpha(alpha)
    rng = lambda comp: _rng.component_rng(seed, block, comp)  # noqa: E731
    radius = ParetoLaw(2.0 * a).sample(rng(_rng.PARETO), size)
    eps1 = TiltedInnovationLaw(a).sample(rng(_rng.TILTED), size)
    log_sigma0 = np.log(radius) - np.log(np.abs(eps1))
    if conditioning == ONE_SIDED:
        zeta0 = radius
    else:
        zeta0 = radius * SignLaw(0.5).sample(rng(_rng.SIGN_ZERO), size)

    forward = np.empty((n, size))
    if n:
        eps = rng(_rng.FORWARD).standard_normal((n, size))  # eps_2 .. eps_{n+1}
        signs = SignLaw(0.5).sample(rng(_rng.SIGN_FORWARD), (n, size))
        steps = np.log(params.phi(np.vstack([eps1[None, :], eps[:n - 1]])))
        log_sigma = log_sigma0[None, :] + np.cumsum(steps, axis=0)
        forward = np.exp(log_sigma) * np.abs(eps) * signs

    backward = np.empty((m, size))
    if m:
        incr = table.inverse(rng(_rng.BACKWARD).random((m, size)))
        incr = np.where(incr > 0, incr, table.grid[1])
        signs = SignLaw(0.5).sample(rng(_rng.SIGN_BACKWARD), (m, size))
        log_sigma = log_sigma0[None, :] + np.cumsum(np.log(incr), axis=0)
        backward = np.exp(log_sigma) * _backward_return_factor(incr, params) * signs

    return ChainBlock(zeta0=zeta0, forward=forward, backward=backward)
