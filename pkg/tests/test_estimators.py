import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reference import FROZEN_ARCH_CHI1
from tailchain.bftc import BackwardLaw, BftcSpec, constant_increment, pareto_start
from tailchain.errors import InsufficientConditioningError, InsufficientDataError, ParameterError
from tailchain.estimators import (TABLE1_COLUMNS, ChainCounts, ReturnSeries, _gamma_report, blocks_estimator,
                                  chain_counts, estimate_chi, estimate_gamma, estimate_theta, parse_return_series,
                                  read_return_series, table1, table1_csv, theta_from_spec, wilson_interval)
from tailchain.tail_index import GarchParams


def P(a1, b1):
    return GarchParams(1e-6, a1, b1)


def test_theta_arch_row():
    r = estimate_theta(P(0.99, 0.0), m=500, N=10000, seed=42)
    assert r.estimate == pytest.approx(0.570, abs=0.025)
    assert r.ci95[0] <= r.estimate <= r.ci95[1]
    assert r.std_error <= 0.5 / math.sqrt(r.N) + 1e-12


def test_theta_weak_clustering_row():
    assert estimate_theta(P(0.04, 0.95), m=500, N=10000, seed=42).estimate == pytest.approx(0.854, abs=0.02)


def test_theta_degenerate_stub_law():
    spec = BftcSpec(increment=constant_increment(0.0, 1.0), start_block=pareto_start(1.0), s=0,
                    backward=BackwardLaw(lambda rng, n: (np.zeros(n), np.zeros(n)), 1.0))
    assert theta_from_spec(spec, m=10, N=1000).estimate == 1.0


def test_chi_at_zero_is_one(garch):
    assert estimate_chi(*garch, h=0, N=100).estimate == 1.0


def test_arch_chi1_matches_closed_form(arch):
    r = estimate_chi(*arch, h=1, N=100000, seed=3)
    assert abs(r.estimate - FROZEN_ARCH_CHI1) < 3 * r.std_error


@pytest.mark.parametrize("h", [1, 2, 3])
def test_chi_time_reversal(garch, h):
    # stationarity forces chi(-h) = chi(h); the backward chain is built independently
    fwd = estimate_chi(*garch, h=h, N=50000, seed=10 + h)
    bwd = estimate_chi(*garch, h=-h, N=50000, seed=20 + h)
    assert abs(fwd.estimate - bwd.estimate) < 3 * math.hypot(fwd.std_error, bwd.std_error)


@pytest.mark.parametrize("h", [1, 3])
def test_gamma_with_empty_past_equals_chi(garch, h):
    g = estimate_gamma(*garch, h=h, m=0, N=2000, seed=9)
    c = estimate_chi(*garch, h=h, N=2000, seed=9)
    assert (g.estimate, g.std_error, g.ci95) == (c.estimate, c.std_error, c.ci95)


def test_theta_monotone_in_m(garch):
    est = [estimate_theta(*garch, m=m, N=1000, seed=4).estimate for m in (1, 2, 5, 20, 100, 500)]
    assert all(a >= b for a, b in zip(est, est[1:]))


def test_gamma_below_chi_for_strong_persistence(garch):
    # no exceedance in the past selects small volatility at time 0
    g = estimate_gamma(*garch, h=1, m=500, N=10000, seed=5)
    c = estimate_chi(*garch, h=1, N=10000, seed=5)
    assert g.estimate < c.estimate


def test_weak_clustering_chi_bounded_by_theta():
    p = P(0.04, 0.95)
    theta = estimate_theta(p, m=500, N=10000, seed=6)
    for h in (1, 2, 3):
        chi = estimate_chi(p, h=h, N=10000, seed=6)
        assert chi.estimate <= 1 - theta.estimate + 3 * math.hypot(theta.std_error, chi.std_error)


def test_gamma_conditioning_starvation():
    counts = ChainCounts(N=100, m_forward=0, m_backward=500, theta_count=0, chi_forward=(5,), chi_backward=(),
                         no_prior=12, gamma_hits=(1,))
    with pytest.raises(InsufficientConditioningError) as info:
        _gamma_report(counts, 1, 500, 100, 0, None, None)
    assert info.value.count == 12


def test_parameter_checks(garch):
    with pytest.raises(ParameterError):
        estimate_theta(*garch, m=0, N=100)
    with pytest.raises(ParameterError):
        estimate_theta(*garch, m=5, N=10)
    with pytest.raises(ParameterError):
        estimate_gamma(*garch, h=0, m=5, N=100)


def test_workers_do_not_change_counts(garch):
    kw = dict(m_forward=50, m_backward=50, h_forward=3, N=3500, seed=8)
    assert chain_counts(*garch, workers=1, **kw) == chain_counts(*garch, workers=3, **kw)


def test_table1_csv_schema():
    rows = table1(N=200, m=20, seed=1, rows=[(0.15, 0.84)])
    text = table1_csv(rows)
    header, line = text.strip().split("\n")
    assert tuple(header.split(",")) == TABLE1_COLUMNS
    values = [float(v) for v in line.split(",")]
    assert values[3] == rows[0].theta.estimate
    assert values[2] == rows[0].alpha.alpha


def test_table1_standard_error_scaling():
    small = table1(N=100, m=500, seed=2, rows=[(0.15, 0.84)])[0]
    large = table1(N=10000, m=500, seed=2, rows=[(0.15, 0.84)])[0]
    assert small.theta.std_error / large.theta.std_error == pytest.approx(10.0, rel=0.35)
    assert small.chi[0].std_error / large.chi[0].std_error == pytest.approx(10.0, rel=0.5)


def test_table1_starved_gamma_is_nan():
    row = table1(N=100, m=500, seed=2, rows=[(0.99, 0.0)])[0]
    values = row.values()
    if row.no_prior < 50:
        assert math.isnan(values["gamma1"]) and math.isnan(values["se_gamma3"])
    else:
        assert 0 <= values["gamma1"] <= 1


@settings(max_examples=200)
@given(st.integers(1, 10**6), st.data())
def test_wilson_interval_contains_estimate(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(k, n)
    assert 0.0 <= lo <= k / n <= hi <= 1.0


# ---------------------------------------------------------------------------
# blocks estimator


def test_blocks_iid_and_moving_maximum():
    rng = np.random.default_rng(1)
    iid = 1.0 / (1.0 - rng.random(10**5))
    z = 1.0 / -np.log(rng.random(10**5 + 1))
    mm = np.maximum(z[1:], z[:-1])
    assert blocks_estimator(iid, 100, 0.99, method="log").estimate == pytest.approx(1.0, abs=0.1)
    assert blocks_estimator(mm, 100, 0.99, method="log").estimate == pytest.approx(0.5, abs=0.1)


def test_blocks_ratio_on_hand_built_series():
    x = np.zeros(25)
    x[[0, 1, 2, 12, 24]] = 10.0  # five exceedances in three of five blocks (last one partial)
    r = blocks_estimator(x, 6, 0.75, method="ratio")
    assert (r.count, r.denominator, r.extra["n_blocks"]) == (3, 5, 5)
    assert r.estimate == pytest.approx(0.6)


def test_blocks_trailing_partial_block_counts():
    x = np.zeros(21)
    x[20] = 1.0
    r = blocks_estimator(x, 10, 0.9)
    assert r.extra["n_blocks"] == 3 and r.count == 1


def test_blocks_errors():
    with pytest.raises(InsufficientDataError):
        blocks_estimator(np.ones(1000), 10, 0.95)
    with pytest.raises(InsufficientDataError):
        blocks_estimator(np.arange(10.0), 10, 0.95)
    with pytest.raises(ParameterError):
        blocks_estimator(np.arange(100.0), 10, 0.3)
    with pytest.raises(ParameterError):
        blocks_estimator(np.arange(100.0), 10, 0.9, method="runs")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=40, max_size=400), st.integers(1, 20),
       st.floats(0.55, 0.99))
def test_blocks_ratio_brute_force(values, block_len, q):
    x = np.array(values)
    if x.size < 2 * block_len:
        return
    u = np.quantile(x, q)
    exc = x > u
    if not exc.any():
        with pytest.raises(InsufficientDataError):
            blocks_estimator(x, block_len, q, n_boot=2)
        return
    hits = sum(exc[i:i + block_len].any() for i in range(0, x.size, block_len))
    r = blocks_estimator(x, block_len, q, n_boot=2)
    assert r.estimate == pytest.approx(min(1.0, hits / exc.sum()))
    assert 0.0 <= r.estimate <= 1.0


def test_parse_series_header_crlf_and_malformed():
    text = "﻿return\r\n0.1\r\n-0.2\r\nabc\r\n\r\n0.3,0.4\r\nnan\r\n1e-3\r\n"
    s = parse_return_series(text)
    assert np.array_equal(s.values, [0.1, -0.2, 1e-3])
    assert s.skipped == 3


def test_read_series_from_file(tmp_path):
    f = tmp_path / "r.csv"
    f.write_bytes(b"0.5\n0.25\n")
    s = read_return_series(f)
    assert len(s) == 2 and s.skipped == 0 and s.source == str(f)


def test_return_series_rejects_non_finite():
    with pytest.raises(ParameterError):
        ReturnSeries(np.array([1.0, np.inf]))
