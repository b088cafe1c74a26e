"""Back-and-forth tail chains driven by a hidden Markov recursion.

Outside the start block ``{0, ..., s}`` the limit chain is a multiplicative
random walk: forward steps use ``h(y, A, B)`` with ``(A, B)`` from the forward
increment law, backward steps use the same map with increments drawn from
the adjoint law.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distributions import MonotoneCdfTable, ParetoLaw, TiltedInnovationLaw, cached_backward_sampler
from .errors import ConsistencyError, NumericalError, ParameterError
from .tail_index import GarchParams, as_alpha, log_moment

PairSampler = Callable[[np.random.Generator, int], "tuple[np.ndarray, np.ndarray]"]


def transition_h(y, a, b):
    """``h(y, a, b) = y * (a 1{y > 0} + b 1{y < 0})``; vanishes at ``y = 0``."""
    y = np.asarray(y, dtype=float)
    out = y * np.where(y > 0, a, np.where(y < 0, b, 0.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class IncrementLaw:
    """Forward increments ``(A, B) = (phi(eps, +1), phi(eps, -1))``.

    ``alpha`` is the tail index of the chain itself (for the GARCH volatility
    chain that is twice the index of the squared process).
    """

    alpha: float
    forward_sampler: PairSampler
    sign_balance: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"chain index must be > 0, got {self.alpha}")
        if not 0.0 <= self.sign_balance <= 1.0:
            raise ParameterError(f"sign balance must lie in [0, 1], got {self.sign_balance}")

    @property
    def nonnegative(self) -> bool:
        return self.sign_balance == 1.0

    def sample(self, rng, size):
        a, b = self.forward_sampler(rng, size)
        return np.asarray(a, dtype=float), np.asarray(b, dtype=float)


@dataclass(frozen=True)
class BackwardLaw:
    """Sampler for ``(A_{-1}, B_{-1})`` plus the point mass of ``A_{-1}`` at zero."""

    sampler: PairSampler
    point_mass_zero: float
    point_mass_zero_negative: float = 0.0

    def sample(self, rng, size):
        a, b = self.sampler(rng, size)
        return np.asarray(a, dtype=float), np.asarray(b, dtype=float)


def _weighted_branch(values, weights, mass, rng, size):
    """Return ``values[i]`` w.p. ``mass * w_i / sum(w)`` and 0 otherwise."""
    out = np.zeros(size)
    total = weights.sum()
    if total <= 0:
        return out
    alive = rng.random(size) < min(mass, 1.0)
    cdf = np.cumsum(weights)
    picks = np.searchsorted(cdf, rng.random(int(alive.sum())) * total, side="right")
    out[alive] = values[np.minimum(picks, values.size - 1)]
    return out


def build_adjoint(increment: IncrementLaw, pool_size: int = 10**6,
                  rng: Optional[np.random.Generator] = None) -> BackwardLaw:
    """Adjoint (backward) increment law by weighted bootstrap.

    A pool of forward increments ``a_i`` is drawn once; a backward draw returns
    ``1 / a_i`` with probability proportional to ``a_i**alpha`` and ``0`` with
    the leftover probability ``max(0, 1 - mean(a_i**alpha) / P(M_0 = 1))``.
    The signed case mixes both branches of the forward pair accordingly.
    """
    if pool_size < 10**5:
        raise ValueError("adjoint pool needs at least 1e5 draws")
    rng = np.random.default_rng(0) if rng is None else rng
    a, b = increment.sample(rng, pool_size)
    kappa = increment.alpha
    p = increment.sign_balance

    with np.errstate(divide="ignore"):
        inv_a = np.where(a != 0, 1.0 / a, 0.0)
        inv_b = np.where(b != 0, 1.0 / b, 0.0)

    # M_0 = +1: mass from (M_0=1, A>0) -> 1/A and (M_0=-1, B<0) -> 1/B
    pos_values = np.concatenate([inv_a, inv_b])
    pos_weights = np.concatenate([p * np.clip(a, 0, None) ** kappa,
                                  (1 - p) * np.clip(-b, 0, None) ** kappa])
    # M_0 = -1: mass from (M_0=1, A<0) -> 1/A and (M_0=-1, B>0) -> 1/B
    neg_weights = np.concatenate([p * np.clip(-a, 0, None) ** kappa,
                                  (1 - p) * np.clip(b, 0, None) ** kappa])
    if pos_weights.sum() <= 0 and neg_weights.sum() <= 0:
        raise NumericalError("adjoint pool is degenerate: all weights vanish")

    pos_mass = pos_weights.sum() / pool_size / p if p > 0 else 0.0
    neg_mass = neg_weights.sum() / pool_size / (1 - p) if p < 1 else 0.0

    def sampler(rng_, size):
        size = 1 if size is None else int(size)
        a_back = _weighted_branch(pos_values, pos_weights, pos_mass, rng_, size)
        b_back = _weighted_branch(pos_values, neg_weights, neg_mass, rng_, size)
        return a_back, b_back

    return BackwardLaw(sampler=sampler, point_mass_zero=max(0.0, 1.0 - pos_mass),
                       point_mass_zero_negative=max(0.0, 1.0 - neg_mass) if p < 1 else 0.0)


@dataclass(frozen=True)
class BftcSpec:
    """Start block sampler on ``{0, ..., s}`` plus forward and backward increment laws."""

    increment: IncrementLaw
    start_block: Callable[[np.random.Generator, int], np.ndarray]
    s: int
    backward: BackwardLaw

    def __post_init__(self):
        if self.s < 0:
            raise ParameterError("s must be >= 0")


@dataclass(frozen=True)
class TailChainPath:
    """Realisations of ``Y_t`` for ``t = -m, ..., s + n``; ``values`` has one row per path."""

    times: np.ndarray
    values: np.ndarray
    s: int

    def at(self, t: int):
        return self.values[..., int(t) - int(self.times[0])]


def simulate_bftc(spec: BftcSpec, m: int, n: int, rng: np.random.Generator, size: Optional[int] = None):
    """Draw tail-chain paths on ``-m, ..., s + n``.

    With ``size=None`` a single path is returned (1-d ``values``), otherwise
    ``size`` independent paths stacked row-wise.
    """
    if m < 0 or n < 0:
        raise ParameterError("m and n must be >= 0")
    k = 1 if size is None else int(size)
    s = spec.s
    block = np.asarray(spec.start_block(rng, k), dtype=float).reshape(k, s + 1)
    values = np.empty((k, m + s + n + 1))
    values[:, m:m + s + 1] = block
    for j in range(n):
        a, b = spec.increment.sample(rng, k)
        col = m + s + 1 + j
        values[:, col] = transition_h(values[:, col - 1], a, b)
    for j in range(m):
        a, b = spec.backward.sample(rng, k)
        col = m - 1 - j
        values[:, col] = transition_h(values[:, col + 1], a, b)
    times = np.arange(-m, s + n + 1)
    return TailChainPath(times=times, values=values[0] if size is None else values, s=s)


def point_mass_diagnostic(chi_moment: float, C: float) -> float:
    """Mass at zero of the hidden start value: ``1 - E|chi|**alpha / C`` clamped to ``[0, 1]``."""
    if not C > 0:
        raise ParameterError(f"tail-equivalence constant must be > 0, got {C}")
    if chi_moment < 0:
        raise ParameterError(f"moment must be >= 0, got {chi_moment}")
    if chi_moment > C * (1 + 1e-9):
        raise ConsistencyError(f"E|chi|^alpha = {chi_moment:.6g} exceeds C = {C:.6g}")
    return min(1.0, max(0.0, 1.0 - chi_moment / C))


# ---------------------------------------------------------------------------
# presets


def garch_increment(params: GarchParams, alpha) -> IncrementLaw:
    """Volatility increments ``sqrt(alpha1 eps**2 + beta1)``; chain index ``2 alpha``."""

    def sampler(rng, size):
        a = params.phi(rng.standard_normal(size))
        return a, a

    return IncrementLaw(alpha=2.0 * as_alpha(alpha), forward_sampler=sampler, sign_balance=1.0)


def garch_backward_law(params: GarchParams, alpha, table: Optional[MonotoneCdfTable] = None) -> BackwardLaw:
    """Exact backward law via the tabulated inverse CDF (no mass at zero)."""
    table = cached_backward_sampler(params, as_alpha(alpha)) if table is None else table

    def sampler(rng, size):
        a = table.sample(rng, size)
        return a, a

    return BackwardLaw(sampler=sampler, point_mass_zero=0.0)


def garch_volatility_spec(params: GarchParams, alpha, backward: Optional[BackwardLaw] = None) -> BftcSpec:
    """Volatility chain conditioned on a large absolute return at time 0.

    Start block ``(sigma_0, sigma_1) = (R / |E|, R phi(E) / |E|)`` with
    ``R ~ Par(2 alpha)`` and ``E`` the tilted innovation.
    """
    a = as_alpha(alpha)
    radius = ParetoLaw(2.0 * a)
    tilted = TiltedInnovationLaw(a)

    def start(rng, size):
        r = radius.sample(rng, size)
        e = tilted.sample(rng, size)
        sigma0 = r / np.abs(e)
        return np.column_stack([sigma0, sigma0 * params.phi(e)])

    return BftcSpec(increment=garch_increment(params, a), start_block=start, s=1,
                    backward=garch_backward_law(params, a) if backward is None else backward)


def gjr_increment(alpha1: float, delta1: float, beta1: float, kappa: Optional[float] = None) -> IncrementLaw:
    """GJR-GARCH volatility increments ``sqrt((alpha1 + delta1 1{eps > 0}) eps**2 + beta1)``.

    ``kappa`` defaults to twice the root of the averaged moment equation.
    """
    if kappa is None:
        from scipy import optimize

        def g(a):
            up = np.exp(log_moment(alpha1 + delta1, beta1, a))
            down = np.exp(log_moment(alpha1, beta1, a))
            return np.log(0.5 * (up + down))

        hi = 1.0
        while g(hi) < 0:
            hi *= 2.0
            if hi > 200:
                raise ParameterError("no finite tail index for these GJR parameters")
        kappa = 2.0 * optimize.brentq(g, 1e-6, hi, xtol=1e-14)

    def sampler(rng, size):
        eps = rng.standard_normal(size)
        a = np.sqrt((alpha1 + delta1 * (eps > 0)) * eps * eps + beta1)
        return a, a

    return IncrementLaw(alpha=kappa, forward_sampler=sampler, sign_balance=1.0)


def srsarv_increment(alpha1: float, beta1: float, eta_sampler, kappa: float, squared: bool = False) -> IncrementLaw:
    """SR-SARV increments ``alpha1 eta + beta1`` (or its square root for the squared recursion)."""

    def sampler(rng, size):
        eta = np.asarray(eta_sampler(rng, size), dtype=float)
        a = alpha1 * eta + beta1
        if squared:
            a = np.sqrt(a)
        return a, a

    return IncrementLaw(alpha=kappa, forward_sampler=sampler, sign_balance=1.0)


def constant_increment(c: float, kappa: float) -> IncrementLaw:
    def sampler(rng, size):
        a = np.full(size, float(c))
        return a, a

    return IncrementLaw(alpha=kappa, forward_sampler=sampler, sign_balance=1.0)


def pareto_start(kappa: float):
    """Self-conditioned start block: ``Y_0 ~ Par(kappa)``."""
    law = ParetoLaw(kappa)

    def start(rng, size):
        return law.sample(rng, size).reshape(-1, 1)

    return start
