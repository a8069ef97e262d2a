import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ltpi.dgp import gen_arma_garch, make_rng
from ltpi.exceptions import DegenerateEstimateWarning, InvalidInputError
from ltpi.stats import (
    BlockPlan,
    carlstein_block_length,
    carlstein_rule,
    default_bandwidth,
    epanechnikov,
    kernel_quantile,
    lag_window_lrv,
    optimal_block_length,
    stationary_bootstrap,
    stationary_bootstrap_indices,
    subsample_lrv,
)


def ar1(n, phi, seed):
    return gen_arma_garch(phi, 0.0, 1.0, 0.0, 0.0, n, make_rng(seed))


# --- block length -----------------------------------------------------------


def test_block_length_iid_vs_ar1():
    iid = [optimal_block_length(make_rng(s).standard_normal(1000)) for s in range(200)]
    dep = [optimal_block_length(ar1(1000, 0.6, s)) for s in range(200)]
    assert np.mean(np.array(iid) <= 4) >= 0.95
    assert np.mean(np.array(dep) > 4) >= 0.95


def test_block_length_edge_cases(rng):
    assert optimal_block_length(np.full(100, 3.0)) == 1.0
    with pytest.raises(InvalidInputError):
        optimal_block_length(rng.standard_normal(49))
    x = np.cumsum(rng.standard_normal(400))
    assert optimal_block_length(x) <= 3 * math.sqrt(400)


def test_block_length_affine_invariant():
    x = ar1(500, 0.5, 3)
    b = optimal_block_length(x)
    assert math.isclose(optimal_block_length(3.5 * x - 7.0), b, rel_tol=1e-9)


def test_block_length_ar1_against_theory():
    # for AR(1) the optimal stationary-bootstrap length is
    # (2 G^2 / D)^{1/3} n^{1/3} with G = 2 phi / (1 - phi^2) / (1 - phi)^2 * s2 ...
    # compare with the plug-in of the true autocovariances
    phi, n = 0.5, 20_000
    lags = np.arange(1, 400)
    acv = phi ** lags / (1 - phi ** 2)
    g0 = 1 / (1 - phi ** 2)
    G = 2 * np.sum(lags * acv)
    D = 2 * (g0 + 2 * acv.sum()) ** 2
    b_true = (2 * G ** 2 / D) ** (1 / 3) * n ** (1 / 3)
    est = np.median([optimal_block_length(ar1(n, phi, s)) for s in range(20)])
    assert abs(est / b_true - 1) < 0.25


# --- stationary bootstrap ---------------------------------------------------


def test_block_plan():
    assert BlockPlan(4.0).geometric_p == 0.25
    with pytest.raises(InvalidInputError):
        BlockPlan(0.5)


def test_unit_blocks_are_iid_resampling(rng):
    idx = stationary_bootstrap_indices(50, 2000, 200, BlockPlan(1.0), rng)
    # every position is a fresh uniform draw: consecutive indices are unrelated
    succ = np.mean(idx[:, 1:] == (idx[:, :-1] + 1) % 50)
    assert succ < 0.03
    counts = np.bincount(idx.ravel(), minlength=50) / idx.size
    assert np.abs(counts - 1 / 50).max() < 0.002


def test_block_lengths_are_geometric(rng):
    idx = stationary_bootstrap_indices(10_000, 5000, 20, BlockPlan(5.0), rng)
    cont = np.mean(idx[:, 1:] == (idx[:, :-1] + 1) % 10_000)
    assert abs(cont - 0.8) < 0.01


def test_wraps_circularly(rng):
    idx = stationary_bootstrap_indices(7, 500, 50, BlockPlan(50.0), rng)
    assert idx.min() >= 0 and idx.max() <= 6
    jumps = idx[:, 1:] - idx[:, :-1]
    assert np.any(jumps == -6)


def test_bootstrap_constant_and_containment(rng):
    np.testing.assert_array_equal(stationary_bootstrap(np.full(30, 2.5), BlockPlan(3), rng),
                                  np.full(30, 2.5))
    x = rng.standard_normal(40)
    out = stationary_bootstrap(x, BlockPlan(4), rng)
    assert out.shape == x.shape and np.all(np.isin(out, x))


def test_bootstrap_determinism():
    x = np.arange(100.0)
    a = stationary_bootstrap(x, BlockPlan(6), make_rng(5))
    b = stationary_bootstrap(x, BlockPlan(6), make_rng(5))
    np.testing.assert_array_equal(a, b)


def test_bootstrap_mean_unbiased(rng):
    x = ar1(300, 0.5, 9)
    idx = stationary_bootstrap_indices(300, 300, 10_000, BlockPlan(8.0), rng)
    means = x[idx].mean(axis=1)
    assert abs(means.mean() - x.mean()) < 3 * means.std() / math.sqrt(10_000)


def test_bootstrap_pooled_distribution(rng):
    x = rng.standard_normal(10_000)
    idx = stationary_bootstrap_indices(10_000, 10_000, 1000, BlockPlan(10.0), rng)
    pooled = np.sort(x[idx].ravel())
    grid = np.quantile(x, np.linspace(0.01, 0.99, 99))
    ecdf_in = np.searchsorted(np.sort(x), grid, side="right") / x.size
    ecdf_out = np.searchsorted(pooled, grid, side="right") / pooled.size
    assert np.abs(ecdf_in - ecdf_out).max() <= 0.01


# --- long-run variance ------------------------------------------------------


def test_lag_window_k0_is_variance(rng):
    x = rng.standard_normal(200)
    assert math.isclose(lag_window_lrv(x, 0).variance, x.var(), rel_tol=1e-12)


def test_lag_window_brute_force(rng):
    x = rng.standard_normal(120)
    xc = x - x.mean()
    k = 6
    ref = sum(np.sum(xc[abs(h):] * xc[:120 - abs(h)]) / 120 for h in range(-k, k + 1))
    assert math.isclose(lag_window_lrv(x, k).variance, ref, rel_tol=1e-12)
    assert lag_window_lrv(x).method == "lag_window"


def test_lag_window_consistency():
    # one estimate has sd sqrt(2 (2k + 1) / T) ~ 0.029, so the band is
    # applied to the mean over seeds and each draw gets a 5 sd band
    vals = np.array([lag_window_lrv(make_rng(s).standard_normal(10 ** 5), 20).variance
                     for s in range(50)])
    assert 0.97 <= vals.mean() <= 1.03
    assert np.all(np.abs(vals - 1) < 5 * math.sqrt(2 * 41 / 10 ** 5))
    x = ar1(10 ** 5, 0.6, 2)
    assert abs(lag_window_lrv(x, 50).variance / 6.25 - 1) <= 0.05


def test_lag_window_negative_floored():
    x = np.tile([1.0, -1.0], 50)
    with pytest.warns(DegenerateEstimateWarning):
        est = lag_window_lrv(x, 1)
    assert est.sigma == 0.0
    with pytest.raises(InvalidInputError):
        lag_window_lrv(x, 100)


def test_carlstein_rule_examples(rng):
    assert carlstein_rule(0.6, 260) == 12
    raw = ((1.2 / 0.64) ** 2 * 390) ** (1 / 3)
    assert math.isclose(raw, 11.2, abs_tol=0.1)
    assert carlstein_rule(0.01, 260) == 2
    assert carlstein_rule(0.999999, 260) == 65
    assert carlstein_rule(1.0, 260) == 65
    assert carlstein_block_length(rng.standard_normal(5000)) == 2
    x = ar1(260, 0.99, 3)
    assert carlstein_block_length(x) >= 20


def test_subsample_lrv_iid_unbiased():
    vals = [subsample_lrv(make_rng(s).standard_normal(10 ** 5), 50).sigma for s in range(100)]
    assert 0.97 <= np.mean(vals) <= 1.03


def test_subsample_lrv_equal_blocks_formula(rng):
    x = rng.standard_normal(120)
    l = 10
    est = subsample_lrv(x, l)
    xc = x - x.mean()
    ref = math.sqrt(math.pi * l / 2) / 120 * sum(abs(xc[i:i + l].sum()) for i in range(0, 120, l))
    assert math.isclose(est.sigma, ref, rel_tol=1e-12)
    assert est.kappa == 12 and est.block_len == 10


def test_subsample_lrv_short_block_handling(rng):
    x = rng.standard_normal(103)
    assert subsample_lrv(x, 10).kappa == 10     # 3 leftover < 5 dropped
    assert subsample_lrv(x, 4).kappa == 26      # 3 leftover >= 2 kept
    assert subsample_lrv(np.zeros(50), 5).sigma == 0.0
    for bad in (1, 52):
        with pytest.raises(InvalidInputError):
            subsample_lrv(x[:100], bad)


def test_subsample_lrv_ar1_and_agreement():
    x = ar1(10 ** 5, 0.6, 4)
    sub = subsample_lrv(x, carlstein_block_length(x))
    assert abs(sub.variance / 6.25 - 1) <= 0.10
    lag = lag_window_lrv(x, 50)
    assert abs(sub.variance / lag.variance - 1) <= 0.15


# --- kernel quantiles -------------------------------------------------------


def test_kernel_quantile_fallback():
    x = np.arange(1.0, 101.0)
    assert kernel_quantile(x, 0.5, h=0.0) == 50.5
    assert kernel_quantile(x, 0.3, h=0.001) == np.quantile(x, 0.3)
    with pytest.raises(InvalidInputError):
        kernel_quantile([], 0.5)
    with pytest.raises(InvalidInputError):
        kernel_quantile(x, 1.0)
    with pytest.raises(InvalidInputError):
        kernel_quantile(x, 0.5, h=-1.0)


def test_kernel_quantile_weights_direct(rng):
    x = rng.standard_normal(50)
    xs = np.sort(x)
    q, h = 0.8, 0.1
    w = np.array([0.75 * max(0.0, 1 - ((i / 50 - q) / h) ** 2) for i in range(1, 51)])
    assert math.isclose(w.sum() / w.sum(), 1.0)
    assert math.isclose(kernel_quantile(x, q, h), w @ xs / w.sum(), rel_tol=1e-12)


def test_kernel_quantile_normal():
    x = make_rng(3).standard_normal(10 ** 5)
    assert 1.62 <= kernel_quantile(x, 0.95) <= 1.67


def test_kernel_quantile_vector_and_defaults():
    x = make_rng(4).standard_normal(500)
    qs = [0.05, 0.5, 0.95]
    v = kernel_quantile(x, qs)
    assert v.shape == (3,)
    assert all(math.isclose(v[i], kernel_quantile(x, q)) for i, q in enumerate(qs))
    np.testing.assert_allclose(default_bandwidth(0.5, 32), 0.5 * 32 ** -0.2)
    assert epanechnikov(0.0) == 0.75 and epanechnikov(1.0) == 0.0


@given(arrays(np.float64, st.integers(5, 80), elements=st.floats(-100, 100)),
       st.floats(0.0, 0.3))
def test_kernel_quantile_monotone_in_q(x, h):
    qs = np.linspace(0.02, 0.98, 25)
    v = kernel_quantile(x, qs, h)
    assert np.all(np.diff(v) >= -1e-9 * (1 + np.abs(x).max()))
