"""Monte Carlo extremal measures from the GARCH(1,1) tail chain.

With a one-sided tail chain (threshold normalised to 1):

    theta_m   = P(max(zeta_1, ..., zeta_m) < 1)
    chi(h)    = P(zeta_h > 1)
    gamma_m(h) = P(zeta_h > 1 | zeta_{-m}, ..., zeta_{-1} <= 1)

Paths are simulated in blocks of ``BLOCK_SIZE`` with one random stream per
(seed, block, component); block results are integer counts reduced in block
order, so reports do not depend on the number of worker processes.  The
blocks estimator for observed return series lives here as well.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from . import _rng
from .bftc import BftcSpec, simulate_bftc
from .distributions import cached_backward_sampler, check_consistency
from .errors import InsufficientConditioningError, InsufficientDataError, ParameterError
from .garch_chain import ONE_SIDED, simulate_block
from .tail_index import GarchParams, TailIndex, as_alpha, solve_tail_index

TABLE1_ROWS = (
    (0.99, 0.0),
    (0.15, 0.84),
    (0.11, 0.88),
    (0.09, 0.90),
    (0.07, 0.92),
    (0.04, 0.95),
    (0.072, 0.920),
)
TABLE1_ALPHA0 = 1e-6
DEFAULT_M = 500
MIN_CONDITIONING = 50
_Z95 = float(stats.norm.ppf(0.975))


def wilson_interval(successes: int, trials: int, z: float = _Z95):
    if trials <= 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # guard against rounding at p = 0 or 1
    return (min(lo, p), max(hi, p))


def _ratio_se(num: int, den: int) -> float:
    """Delta-method SE of ``num / den`` for indicators with numerator events inside denominator events.

    With ``den`` equal to the sample size this is the binomial SE.
    """
    r = num / den
    return math.sqrt(num * (1 - r) ** 2 + (den - num) * r * r) / den


@dataclass
class EstimatorReport:
    """Point estimate with standard error, Wilson 95% interval and run metadata."""

    kind: str
    estimate: float
    std_error: float
    ci95: tuple
    N: int
    m: Optional[int]
    h: Optional[int]
    seed: Optional[int]
    params: Optional[GarchParams]
    alpha: Optional[float]
    count: int = 0
    denominator: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = asdict(self)
        out["ci95"] = list(self.ci95)
        return out


def _proportion_report(kind, num, den, N, m, h, seed, params, alpha, **extra):
    est = num / den
    return EstimatorReport(kind=kind, estimate=est, std_error=_ratio_se(num, den),
                           ci95=wilson_interval(num, den), N=N, m=m, h=h, seed=seed, params=params,
                           alpha=alpha, count=int(num), denominator=int(den), extra=extra)


# ---------------------------------------------------------------------------
# chain statistics


@dataclass(frozen=True)
class ChainCounts:
    """Integer tallies over ``N`` one-sided tail-chain paths.

    ``theta_count`` counts paths with no forward exceedance in ``1..m_forward``;
    ``chi_forward[h-1]`` counts ``zeta_h > 1``; ``chi_backward[h-1]`` counts
    ``zeta_{-h} > 1``; ``no_prior`` counts paths with no exceedance in
    ``-m_backward..-1`` and ``gamma_hits[h-1]`` those among them with ``zeta_h > 1``.
    """

    N: int
    m_forward: int
    m_backward: int
    theta_count: int
    chi_forward: tuple
    chi_backward: tuple
    no_prior: int
    gamma_hits: tuple

    def __add__(self, other: "ChainCounts") -> "ChainCounts":
        add = lambda a, b: tuple(int(x) + int(y) for x, y in zip(a, b))  # noqa: E731
        return ChainCounts(self.N + other.N, self.m_forward, self.m_backward,
                           self.theta_count + other.theta_count, add(self.chi_forward, other.chi_forward),
                           add(self.chi_backward, other.chi_backward), self.no_prior + other.no_prior,
                           add(self.gamma_hits, other.gamma_hits))


def _block_counts(task):
    params, alpha, m_fwd, m_bwd, h_fwd, h_bwd, seed, block, size = task
    table = cached_backward_sampler(params, alpha)
    n = max(m_fwd, h_fwd)
    m = max(m_bwd, h_bwd)
    chain = simulate_block(params, alpha, table, m, n, seed, block, size, ONE_SIDED)
    fwd, bwd = chain.forward, chain.backward
    theta = int(np.count_nonzero(np.all(fwd[:m_fwd] < 1.0, axis=0))) if m_fwd else size
    fwd_hits = fwd[:h_fwd] > 1.0
    no_prior = ~np.any(bwd[:m_bwd] > 1.0, axis=0)
    return ChainCounts(
        N=size, m_forward=m_fwd, m_backward=m_bwd, theta_count=theta,
        chi_forward=tuple(int(c) for c in fwd_hits.sum(axis=1)),
        chi_backward=tuple(int(c) for c in (bwd[:h_bwd] > 1.0).sum(axis=1)),
        no_prior=int(no_prior.sum()),
        gamma_hits=tuple(int(c) for c in (fwd_hits & no_prior[None, :]).sum(axis=1)),
    )


def _resolve_alpha(params: GarchParams, alpha):
    params.require_stationary()
    if alpha is None:
        return solve_tail_index(params).alpha
    a = as_alpha(alpha)
    check_consistency(params, a)
    return a


def chain_counts(params: GarchParams, alpha=None, m_forward: int = DEFAULT_M, m_backward: int = DEFAULT_M,
                 h_forward: int = 3, h_backward: int = 0, N: int = 10000, seed: int = 42,
                 workers: int = 1) -> ChainCounts:
    """Tally every statistic needed for theta, chi and gamma from one set of paths."""
    if N < 1:
        raise ParameterError("N must be positive")
    if min(m_forward, m_backward, h_forward, h_backward) < 0:
        raise ParameterError("horizons must be >= 0")
    a = _resolve_alpha(params, alpha)
    tasks = [(params, a, m_forward, m_backward, h_forward, h_backward, seed, b, size)
             for b, size in _rng.blocks(N)]
    workers = max(1, int(workers or 1))
    if workers == 1 or len(tasks) == 1:
        parts = [_block_counts(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            parts = list(pool.map(_block_counts, tasks))
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total


def _check_N(N):
    if N < 100:
        raise ParameterError(f"N must be >= 100, got {N}")


def estimate_theta(params: GarchParams, alpha=None, m: int = DEFAULT_M, N: int = 10000, seed: int = 42,
                   workers: int = 1) -> EstimatorReport:
    """``theta_m``: fraction of paths with ``zeta_1, ..., zeta_m`` all below 1."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    _check_N(N)
    a = _resolve_alpha(params, alpha)
    c = chain_counts(params, a, m_forward=m, m_backward=0, h_forward=0, N=N, seed=seed, workers=workers)
    return _proportion_report("theta", c.theta_count, c.N, N, m, None, seed, params, a)


def estimate_chi(params: GarchParams, alpha=None, h: int = 1, N: int = 10000, seed: int = 42,
                 workers: int = 1) -> EstimatorReport:
    """``chi(h)``: fraction of paths with ``zeta_h > 1``; negative ``h`` uses the backward chain."""
    _check_N(N)
    a = _resolve_alpha(params, alpha)
    if h == 0:
        return _proportion_report("chi", N, N, N, None, 0, seed, params, a)
    fwd, bwd = (h, 0) if h > 0 else (0, -h)
    c = chain_counts(params, a, m_forward=0, m_backward=0, h_forward=fwd, h_backward=bwd,
                     N=N, seed=seed, workers=workers)
    hits = c.chi_forward[h - 1] if h > 0 else c.chi_backward[-h - 1]
    return _proportion_report("chi", hits, c.N, N, None, h, seed, params, a)


def _gamma_report(c: ChainCounts, h, m, N, seed, params, a):
    if c.no_prior < MIN_CONDITIONING:
        raise InsufficientConditioningError(
            f"only {c.no_prior} of {c.N} paths have no exceedance in the {m} lags before 0 "
            f"(need {MIN_CONDITIONING})", c.no_prior)
    return _proportion_report("gamma", c.gamma_hits[h - 1], c.no_prior, N, m, h, seed, params, a)


def estimate_gamma(params: GarchParams, alpha=None, h: int = 1, m: int = DEFAULT_M, N: int = 10000,
                   seed: int = 42, workers: int = 1) -> EstimatorReport:
    """``gamma_m(h)``: ratio estimate of ``P(zeta_h > 1 | no exceedance in -m..-1)`` on joint chains."""
    if h < 1:
        raise ParameterError("gamma needs h >= 1")
    if m < 0:
        raise ParameterError("m must be >= 0")
    _check_N(N)
    a = _resolve_alpha(params, alpha)
    c = chain_counts(params, a, m_forward=0, m_backward=m, h_forward=h, N=N, seed=seed, workers=workers)
    return _gamma_report(c, h, m, N, seed, params, a)


def theta_from_spec(spec: BftcSpec, m: int, N: int, seed: int = 42) -> EstimatorReport:
    """``theta_m`` for a generic chain: fraction of paths with ``Y_{s+1..s+m}`` all below 1."""
    if m < 1:
        raise ParameterError("m must be >= 1")
    _check_N(N)
    path = simulate_bftc(spec, 0, m, np.random.default_rng(seed), size=N)
    below = int(np.count_nonzero(np.all(path.values[:, spec.s + 1:] < 1.0, axis=1)))
    return _proportion_report("theta", below, N, N, m, None, seed, None, spec.increment.alpha)


# ---------------------------------------------------------------------------
# table of extremal measures

TABLE1_COLUMNS = ("alpha1", "beta1", "alpha", "theta", "chi1", "chi2", "chi3", "gamma1", "gamma2", "gamma3",
                  "se_theta", "se_chi1", "se_chi2", "se_chi3", "se_gamma1", "se_gamma2", "se_gamma3")


@dataclass
class Table1Row:
    """One row of the table; ``gamma`` entries are ``None`` when fewer than
    ``MIN_CONDITIONING`` paths have an exceedance-free past (``no_prior``)."""

    params: GarchParams
    alpha: TailIndex
    theta: EstimatorReport
    chi: list
    gamma: list
    no_prior: int = 0
    seconds: float = 0.0

    def values(self) -> dict:
        out = {"alpha1": self.params.alpha1, "beta1": self.params.beta1, "alpha": self.alpha.alpha,
               "theta": self.theta.estimate}
        for i, r in enumerate(self.chi, 1):
            out[f"chi{i}"] = r.estimate
        for i, r in enumerate(self.gamma, 1):
            out[f"gamma{i}"] = math.nan if r is None else r.estimate
        out["se_theta"] = self.theta.std_error
        for i, r in enumerate(self.chi, 1):
            out[f"se_chi{i}"] = r.std_error
        for i, r in enumerate(self.gamma, 1):
            out[f"se_gamma{i}"] = math.nan if r is None else r.std_error
        return out


def table1_row(params: GarchParams, N: int = 10000, m: int = DEFAULT_M, seed: int = 42, h_max: int = 3,
               workers: int = 1) -> Table1Row:
    import time

    start = time.perf_counter()
    _check_N(N)
    ti = solve_tail_index(params)
    params.require_stationary()
    c = chain_counts(params, ti.alpha, m_forward=m, m_backward=m, h_forward=h_max, N=N, seed=seed,
                     workers=workers)
    theta = _proportion_report("theta", c.theta_count, c.N, N, m, None, seed, params, ti.alpha)
    chi = [_proportion_report("chi", c.chi_forward[h - 1], c.N, N, None, h, seed, params, ti.alpha)
           for h in range(1, h_max + 1)]
    if c.no_prior >= MIN_CONDITIONING:
        gamma = [_gamma_report(c, h, m, N, seed, params, ti.alpha) for h in range(1, h_max + 1)]
    else:
        gamma = [None] * h_max
    return Table1Row(params=params, alpha=ti, theta=theta, chi=chi, gamma=gamma, no_prior=c.no_prior,
                     seconds=time.perf_counter() - start)


def table1(N: int = 10000, m: int = DEFAULT_M, seed: int = 42, rows=TABLE1_ROWS, workers: int = 1,
           alpha0: float = TABLE1_ALPHA0, progress=None) -> list:
    """theta, chi(1..3) and gamma(1..3) for each ``(alpha1, beta1)`` row.

    Every row uses the same seed.  ``progress(row)`` is called after each row.
    """
    out = []
    for a1, b1 in rows:
        row = table1_row(GarchParams(alpha0, a1, b1), N=N, m=m, seed=seed, workers=workers)
        if progress is not None:
            progress(row)
        out.append(row)
    return out


def table1_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE1_COLUMNS)
    for row in rows:
        values = row.values()
        writer.writerow([repr(float(values[k])) for k in TABLE1_COLUMNS])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# blocks estimator


@dataclass(frozen=True)
class ReturnSeries:
    values: np.ndarray
    source: str = "<memory>"
    skipped: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ParameterError("return series contains non-finite values")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def parse_return_series(text: str, source: str = "<memory>") -> ReturnSeries:
    """Parse a single numeric column; an optional non-numeric first line is a header.

    Rows that are not a single finite number are skipped and counted.
    """
    values, skipped = [], 0
    first = True
    for row in csv.reader(io.StringIO(text.lstrip("﻿"))):
        cells = [c.strip() for c in row if c.strip()]
        if not cells:
            continue
        try:
            if len(cells) != 1:
                raise ValueError
            v = float(cells[0])
            if not math.isfinite(v):
                raise ValueError
        except ValueError:
            if not first:
                skipped += 1
            first = False
            continue
        first = False
        values.append(v)
    return ReturnSeries(values=np.array(values, dtype=float), source=source, skipped=skipped)


def read_return_series(path) -> ReturnSeries:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_return_series(fh.read(), source=os.fspath(path))


def _blocks_theta(x, threshold, block_len, method):
    n = x.size
    exceed = x > threshold
    n_exc = int(exceed.sum())
    k = -(-n // block_len)
    padded = np.zeros(k * block_len, dtype=bool)
    padded[:n] = exceed
    n_blocks_hit = int(padded.reshape(k, block_len).any(axis=1).sum())
    if n_exc == 0:
        return float("nan"), n_exc, n_blocks_hit, k
    if method == "ratio":
        theta = n_blocks_hit / n_exc
    elif n_blocks_hit >= k or n_exc >= n:
        theta = 1.0
    else:
        theta = math.log1p(-n_blocks_hit / k) / (block_len * math.log1p(-n_exc / n))
    return min(1.0, max(0.0, theta)), n_exc, n_blocks_hit, k


def blocks_estimator(series, block_len: int, quantile: float, method: str = "ratio", n_boot: int = 200,
                     seed: int = 42) -> EstimatorReport:
    """Blocks estimator of the extremal index.

    ``method="ratio"``: exceeding blocks over exceedances, ``K / N``.
    ``method="log"``: ``log(1 - K/k) / (b log(1 - N/n))`` with ``k`` blocks of
    length ``b`` in a series of length ``n``; this form corrects the ratio for
    blocks that contain independent exceedances.

    The threshold is the empirical ``quantile`` of the series; the trailing
    partial block is kept.  The standard error resamples whole blocks.
    """
    x = series.values if isinstance(series, ReturnSeries) else np.asarray(series, dtype=float)
    if method not in ("ratio", "log"):
        raise ParameterError(f"unknown blocks method {method!r}")
    if not 0.5 < quantile < 1.0:
        raise ParameterError(f"quantile must lie in (0.5, 1), got {quantile}")
    if block_len < 1:
        raise ParameterError("block_len must be >= 1")
    if x.size < 2 * block_len:
        raise InsufficientDataError(f"series of length {x.size} is shorter than two blocks of {block_len}")
    threshold = float(np.quantile(x, quantile))
    theta, n_exc, n_hit, k = _blocks_theta(x, threshold, block_len, method)
    if n_exc == 0:
        raise InsufficientDataError(f"no observation exceeds the {quantile} quantile {threshold:.6g}")

    rng = np.random.default_rng(seed)
    full = x[: (x.size // block_len) * block_len].reshape(-1, block_len)
    boots = []
    for _ in range(n_boot):
        sample = full[rng.integers(0, full.shape[0], full.shape[0])].ravel()
        t, ne, _, _ = _blocks_theta(sample, threshold, block_len, method)
        if ne:
            boots.append(t)
    boots = np.array(boots)
    se = float(np.std(boots, ddof=1)) if boots.size > 1 else float("nan")
    if boots.size > 1:
        lo, hi = np.quantile(boots, [0.025, 0.975])
        ci = (float(min(lo, theta)), float(max(hi, theta)))
    else:
        ci = (0.0, 1.0)
    return EstimatorReport(kind="blocks", estimate=theta, std_error=se, ci95=ci, N=int(x.size), m=None, h=None,
                           seed=seed, params=None, alpha=None, count=n_hit, denominator=n_exc,
                           extra={"threshold": threshold, "block_len": block_len, "quantile": quantile,
                                  "method": method, "n_blocks": k, "skipped_rows":
                                  series.skipped if isinstance(series, ReturnSeries) else 0})
