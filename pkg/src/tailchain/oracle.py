"""Brute-force check of the tail chain on long simulated GARCH(1,1) paths.

Thresholds are empirical quantiles of the simulated returns; every
exceedance time contributes one window (windows may overlap, no
declustering), mirroring a tail chain conditioned on a single exceedance.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .tail_index import GarchParams

_SEGMENT = 1 << 20
_CHUNK = 256


@dataclass(frozen=True)
class PathSimConfig:
    params: GarchParams
    length: int = 10**7
    burn_in: int = 10**4
    quantile: float = 0.999
    seed: int = 42

    def __post_init__(self):
        if self.burn_in < 10**4:
            raise ParameterError("burn_in must be >= 1e4")
        if self.length < 1:
            raise ParameterError("length must be positive")
        if not 0.0 < self.quantile < 1.0:
            raise ParameterError("quantile must lie in (0, 1)")


def _affine_scan(a, b, x0):
    """Solve ``x_t = a_t x_{t-1} + b`` for all t, vectorised over chunks."""
    n = a.size
    k = -(-n // _CHUNK)
    padded = np.ones(k * _CHUNK)
    padded[:n] = a
    A = padded.reshape(k, _CHUNK)
    P = np.empty_like(A)
    Q = np.empty_like(A)
    P[:, 0] = A[:, 0]
    Q[:, 0] = b
    for j in range(1, _CHUNK):
        P[:, j] = A[:, j] * P[:, j - 1]
        Q[:, j] = A[:, j] * Q[:, j - 1] + b
    starts = np.empty(k)
    s = x0
    p_end, q_end = P[:, -1].tolist(), Q[:, -1].tolist()
    for i in range(k):
        starts[i] = s
        s = p_end[i] * s + q_end[i]
    return (P * starts[:, None] + Q).ravel()[:n]


def simulate_garch_path(config: PathSimConfig):
    """Stationary GARCH(1,1) path: returns ``(sigma, zeta)`` after burn-in.

    ``sigma_t**2 = alpha0 + (alpha1 eps_t**2 + beta1) sigma_{t-1}**2`` and
    ``zeta_t = sigma_t eps_{t+1}``, started from the stationary mean
    ``alpha0 / (1 - alpha1 - beta1)``.
    """
    p = config.params
    p.require_stationary()
    rng = np.random.default_rng(config.seed)
    total = config.burn_in + config.length
    sigma = np.empty(config.length)
    zeta = np.empty(config.length)
    var = p.alpha0 / (1.0 - p.alpha1 - p.beta1)
    prev_sigma = math.sqrt(var)
    t = 0  # index of first sigma in the current segment
    while t < total + 1:
        size = min(_SEGMENT, total + 1 - t)
        eps = rng.standard_normal(size)
        var_seg = _affine_scan(p.alpha1 * eps * eps + p.beta1, p.alpha0, var)
        sig_seg = np.sqrt(var_seg)
        # zeta_{t-1} = sigma_{t-1} eps_t pairs the previous sigma with this eps
        lagged = np.concatenate([[prev_sigma], sig_seg[:-1]])
        z_seg = lagged * eps
        z_times = np.arange(t - 1, t - 1 + size)
        s_times = np.arange(t, t + size)
        _store(zeta, z_seg, z_times, config.burn_in)
        _store(sigma, sig_seg, s_times, config.burn_in)
        var = var_seg[-1]
        prev_sigma = sig_seg[-1]
        t += size
    return sigma, zeta


def _store(out, values, times, burn_in):
    idx = times - burn_in
    keep = (idx >= 0) & (idx < out.size)
    out[idx[keep]] = values[keep]


@dataclass
class ConditionalEmpirics:
    """Finite-threshold analogues of theta, chi(h) and gamma(h)."""

    params: GarchParams
    quantile: float
    x: float
    n_exceed: int
    m: int
    theta_hat: float
    chi: list
    chi_se: list
    gamma: list
    gamma_se: list
    n_no_prior: int
    C_hat: float
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "params": {"alpha0": self.params.alpha0, "alpha1": self.params.alpha1, "beta1": self.params.beta1},
            "quantile": self.quantile,
            "x": self.x,
            "n_exceed": self.n_exceed,
            "m": self.m,
            "theta_hat": self.theta_hat,
            "chi": self.chi,
            "chi_se": self.chi_se,
            "gamma": self.gamma,
            "gamma_se": self.gamma_se,
            "n_no_prior": self.n_no_prior,
            "C_hat": self.C_hat,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def empirics_from_series(zeta, sigma, params: GarchParams, quantile: float, h_max: int, m: int,
                         min_exceed: int = 500) -> ConditionalEmpirics:
    zeta = np.asarray(zeta, dtype=float)
    x = float(np.quantile(zeta, quantile))
    lag = max(m, h_max)
    times = np.flatnonzero(zeta > x)
    times = times[(times >= m) & (times + lag < zeta.size)]
    if times.size < min_exceed:
        raise InsufficientDataError(f"only {times.size} exceedances above x={x:.4g} (need {min_exceed})")

    fwd_max = np.full(times.size, -np.inf)
    bwd_any = np.zeros(times.size, dtype=bool)
    # column loops keep memory at O(#exceedances)
    for k in range(1, m + 1):
        fwd_max = np.maximum(fwd_max, zeta[times + k])
        bwd_any |= zeta[times - k] > x
    theta = float(np.mean(fwd_max < x)) if m else 1.0
    no_prior = ~bwd_any
    chi, chi_se, gamma, gamma_se = [], [], [], []
    for h in range(1, h_max + 1):
        hit = zeta[times + h] > x
        p = float(hit.mean())
        chi.append(p)
        chi_se.append(math.sqrt(p * (1 - p) / hit.size))
        d = int(no_prior.sum())
        g = float(hit[no_prior].mean()) if d else float("nan")
        gamma.append(g)
        gamma_se.append(math.sqrt(g * (1 - g) / d) if d else float("nan"))

    c_hat = float(np.mean(np.abs(zeta) > x) / np.mean(np.asarray(sigma) > x))
    return ConditionalEmpirics(params=params, quantile=quantile, x=x, n_exceed=int(times.size), m=m,
                               theta_hat=theta, chi=chi, chi_se=chi_se, gamma=gamma, gamma_se=gamma_se,
                               n_no_prior=int(no_prior.sum()), C_hat=c_hat,
                               notes=["finite-threshold estimates; overlapping windows; "
                                      "tolerances against the limit are engineering choices"])


def conditional_empirics(config: PathSimConfig, h_max: int = 3, m: int = 500) -> ConditionalEmpirics:
    sigma, zeta = simulate_garch_path(config)
    return empirics_from_series(zeta, sigma, config.params, config.quantile, h_max, m)


@dataclass(frozen=True)
class HillEstimate:
    index: float
    std_error: float
    k: int


def tail_index_empirical(series, k: int, n_boot: int = 200, seed: int = 0) -> HillEstimate:
    """Hill estimate of the tail index of ``|series|`` from the top ``k`` order statistics.

    The standard error bootstraps the ``k`` log-excesses over the ``(k+1)``-th
    largest value.
    """
    x = np.abs(np.asarray(series, dtype=float))
    x = x[np.isfinite(x)]
    if k < 100:
        raise ParameterError("Hill estimator needs k >= 100")
    if k >= x.size:
        raise ParameterError(f"k={k} exceeds the sample size {x.size} - 1")
    top = np.partition(x, x.size - k - 1)[x.size - k - 1:]
    top.sort()
    ref = top[0]
    if not ref > 0:
        raise InsufficientDataError("reference order statistic is not positive")
    excess = np.log(top[1:] / ref)
    mean = excess.mean()
    if not mean > 0:
        raise InsufficientDataError("no tail: top order statistics are all equal")
    rng = np.random.default_rng(seed)
    boots = rng.choice(excess, size=(n_boot, k), replace=True).mean(axis=1)
    boots = boots[boots > 0]
    return HillEstimate(index=1.0 / mean, std_error=float(np.std(1.0 / boots, ddof=1)), k=k)
