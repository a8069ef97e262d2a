import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from ltpi import mw
from ltpi.dgp import SCENARIOS, gen_scenario, make_rng
from ltpi.exceptions import DegenerateEstimateWarning, InvalidInputError


def test_constant_series():
    assert np.allclose(mw.cosine_transform(np.full(100, 3.0)).x, 0.0)
    with pytest.warns(DegenerateEstimateWarning):
        iv = mw.pi_naive(np.full(100, 3.0), 20)
    assert iv.lower == iv.upper == 3.0


def test_basis_is_orthonormal():
    n = 150
    basis = mw.cosine_basis(n, 12)
    np.testing.assert_allclose(basis.T @ basis / n, np.eye(12), atol=1e-12)
    np.testing.assert_allclose(basis.sum(axis=0), 0.0, atol=1e-10)
    for j in (1, 5):
        t = np.arange(1, n + 1) - 0.5
        col = math.sqrt(2) * np.cos(j * math.pi * t / n)
        x = mw.cosine_transform(col, 12).x
        assert math.isclose(x[j - 1], 1.0, rel_tol=1e-10)
        assert np.abs(np.delete(x, j - 1)).max() < 1e-10


def test_projection_variance_white_noise():
    T = 10 ** 4
    x1 = np.array([mw.cosine_transform(make_rng(s).standard_normal(T), 1).x[0]
                   for s in range(1000)])
    assert abs(x1.var() * T - 1) < 0.1


def test_interval_formula(rng):
    y = rng.standard_normal(260)
    proj = mw.cosine_transform(y, 12)
    iv = mw.pi_naive(y, 130, 12, 0.9)
    half = sps.t.ppf(0.95, 12) * math.sqrt((130 + 260) / (130 * 12) * proj.xtx)
    assert math.isclose(iv.width / 2, half, rel_tol=1e-12)
    assert math.isclose(iv.center, y.mean(), abs_tol=1e-12)


def test_invalid_arguments(rng):
    y = rng.standard_normal(30)
    for q in (0, 30):
        with pytest.raises(InvalidInputError):
            mw.cosine_transform(y, q)
    with pytest.raises(InvalidInputError):
        mw.pi_naive(y, 0)


@given(c=st.floats(-1e3, 1e3), lam=st.floats(1e-3, 1e3), seed=st.integers(0, 99))
def test_equivariance(c, lam, seed):
    y = gen_scenario(SCENARIOS["long-heavy"], 260, make_rng(seed))
    a = mw.pi_naive(y, 60)
    b = mw.pi_naive(lam * y + c, 60)
    tol = 1e-8 * (1 + abs(c) + lam * (abs(a.lower) + abs(a.upper)))
    assert abs(b.lower - (lam * a.lower + c)) < tol
    assert abs(b.upper - (lam * a.upper + c)) < tol


@given(seed=st.integers(0, 99))
def test_width_decreases_in_m_and_nests(seed):
    y = gen_scenario(SCENARIOS["short-light"], 260, make_rng(seed))
    widths = [mw.pi_naive(y, m).width for m in (1, 20, 60, 130, 260)]
    assert all(a >= b for a, b in zip(widths, widths[1:]))
    inner, outer = mw.pi_naive(y, 30, level=0.67), mw.pi_naive(y, 30, level=0.9)
    assert outer.lower <= inner.lower <= inner.upper <= outer.upper


def _coverage(spec_or_none, n):
    hits = 0
    for i in range(n):
        r = make_rng(3000 + i)
        x = r.standard_normal(390) if spec_or_none is None else gen_scenario(spec_or_none, 390, r)
        hits += mw.pi_naive(x[:260], 130, 12, 0.9).contains(x[260:].mean())
    return hits / n


def test_coverage_white_noise_and_ar1():
    white = _coverage(None, 2000)
    ar = _coverage(SCENARIOS["short-light"], 2000)
    assert 0.86 <= white <= 0.94
    assert 0.75 <= ar <= 0.92 and ar < white
