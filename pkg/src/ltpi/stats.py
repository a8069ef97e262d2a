"""Resampling and long-run variance primitives.

Stationary bootstrap with Politis-White expected block length, lag-window
and non-overlapping subsampling long-run variance estimators, the Carlstein
AR(1) block-length rule and the Epanechnikov kernel quantile estimator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import as_series
from .exceptions import DegenerateEstimateWarning, InvalidInputError

__all__ = [
    "BlockPlan",
    "LrvEstimate",
    "autocovariances",
    "optimal_block_length",
    "stationary_bootstrap",
    "stationary_bootstrap_indices",
    "lag_window_lrv",
    "default_lag_truncation",
    "carlstein_block_length",
    "carlstein_rule",
    "subsample_lrv",
    "epanechnikov",
    "default_bandwidth",
    "kernel_quantile",
]


@dataclass(frozen=True)
class BlockPlan:
    """Geometric block-length law for the stationary bootstrap."""

    expected_block_len: float

    def __post_init__(self):
        if not self.expected_block_len >= 1.0:
            raise InvalidInputError("expected block length must be >= 1")

    @property
    def geometric_p(self) -> float:
        return 1.0 / self.expected_block_len


@dataclass(frozen=True)
class LrvEstimate:
    """Long-run standard deviation estimate.

    ``kappa`` is the number of blocks for the subsampling estimator and
    ``None`` for the lag-window estimator.
    """

    sigma: float
    method: str
    kappa: int | None = None
    block_len: int | None = None

    @property
    def variance(self) -> float:
        return self.sigma ** 2


def autocovariances(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased sample autocovariances (divisor n) of a centred series, lags 0..max_lag."""
    n = x.shape[0]
    return np.array([x[k:] @ x[: n - k] / n for k in range(max_lag + 1)])


def _flat_top(v: np.ndarray) -> np.ndarray:
    a = np.abs(v)
    return np.where(a <= 0.5, 1.0, np.where(a <= 1.0, 2.0 * (1.0 - a), 0.0))


def optimal_block_length(s) -> float:
    """Expected block length for the stationary bootstrap (Politis-White, Patton corrected).

    The bandwidth is twice the first lag that starts a run of ``K_T``
    insignificant autocorrelations, capped at ``ceil(sqrt(T)) + K_T``.

    Parameters
    ----------
    s : array_like
        Series with at least 50 observations.

    Returns
    -------
    float
        ``(2 G^2 / D)^{1/3} T^{1/3}`` clamped to ``[1, 3 sqrt(T)]``.
    """
    x = as_series(s, min_length=50)
    n = x.shape[0]
    x = x - x.mean()
    b_max = 3.0 * math.sqrt(n)
    k_n = max(5, math.ceil(math.sqrt(math.log10(n))))
    m_max = math.ceil(math.sqrt(n)) + k_n
    acv = autocovariances(x, min(m_max + k_n, n - 1))
    if acv[0] <= 0.0:
        return 1.0
    rho = np.abs(acv[1:] / acv[0])
    crit = 2.0 * math.sqrt(math.log10(n) / n)
    insignificant = rho < crit
    m_hat = None
    for start in range(1, m_max - k_n + 2):
        if np.all(insignificant[start - 1:start - 1 + k_n]):
            m_hat = start
            break
    if m_hat is None:
        significant = np.flatnonzero(~insignificant[:m_max]) + 1
        m_hat = int(significant.max()) if significant.size else 1
    bw = min(2 * m_hat, m_max)
    lags = np.arange(1, bw + 1)
    lam = _flat_top(lags / bw)
    g_hat = acv[0] + 2.0 * np.sum(lam * acv[1:bw + 1])
    big_g = 2.0 * np.sum(lam * lags * acv[1:bw + 1])
    d_sb = 2.0 * g_hat ** 2
    if d_sb <= 0.0:
        return 1.0
    b = (2.0 * big_g ** 2 / d_sb) ** (1.0 / 3.0) * n ** (1.0 / 3.0)
    return float(min(max(b, 1.0), b_max))


def stationary_bootstrap_indices(n: int, length: int, reps: int, plan: BlockPlan,
                                 rng: np.random.Generator) -> np.ndarray:
    """Index paths of shape ``(reps, length)`` into a series of length ``n``.

    Every position either starts a new block (probability ``plan.geometric_p``)
    at a uniform index or continues the previous one, wrapping at ``n``.
    """
    starts = rng.integers(0, n, size=(reps, length), dtype=np.int64)
    u = rng.random((reps, length))
    return _kernels.sb_indices(starts, u, plan.geometric_p, n)


def stationary_bootstrap(s, plan: BlockPlan, rng: np.random.Generator) -> np.ndarray:
    """One stationary-bootstrap replicate with the same length as ``s``."""
    x = as_series(s, min_length=2)
    idx = stationary_bootstrap_indices(x.shape[0], x.shape[0], 1, plan, rng)[0]
    return x[idx]


def default_lag_truncation(n: int) -> int:
    return math.ceil(n ** (1.0 / 3.0))


def lag_window_lrv(s, k_T: int | None = None) -> LrvEstimate:
    """Truncated sum of sample autocovariances over lags -k_T..k_T.

    ``k_T`` defaults to ``ceil(T^{1/3})``.  A negative sum is floored at zero
    with a :class:`DegenerateEstimateWarning`.
    """
    x = as_series(s)
    n = x.shape[0]
    k_T = default_lag_truncation(n) if k_T is None else int(k_T)
    if not 0 <= k_T < n:
        raise InvalidInputError(f"k_T={k_T} outside [0, {n})")
    acv = autocovariances(x - x.mean(), k_T)
    var = acv[0] + 2.0 * acv[1:].sum()
    if var < 0.0:
        warnings.warn("negative lag-window long-run variance floored at 0",
                      DegenerateEstimateWarning, stacklevel=2)
        var = 0.0
    return LrvEstimate(sigma=math.sqrt(var), method="lag_window")


def carlstein_rule(rho: float, n: int) -> int:
    """``max(2, min(ceil(((2 rho / (1 - rho^2))^2 * 3n/2)^{1/3}), floor(n/4)))``.

    ``|rho| < 0.05`` gives 2 and ``|rho| >= 1`` the cap ``floor(n/4)``.
    """
    cap = max(2, n // 4)
    if abs(rho) < 0.05:
        return 2
    if abs(rho) >= 1.0:
        return cap
    raw = ((2.0 * rho / (1.0 - rho ** 2)) ** 2 * 1.5 * n) ** (1.0 / 3.0)
    return int(max(2, min(math.ceil(raw), cap)))


def carlstein_block_length(s) -> int:
    """Carlstein's AR(1)-plug-in block length for subsampling.

    The lag-1 autocorrelation of the centred series is plugged into
    :func:`carlstein_rule`.
    """
    x = as_series(s, min_length=20)
    x = x - x.mean()
    denom = x @ x
    rho = 0.0 if denom == 0.0 else float(x[1:] @ x[:-1] / denom)
    return carlstein_rule(rho, x.shape[0])


def subsample_lrv(s, l: int) -> LrvEstimate:
    """Long-run sd from absolute sums over non-overlapping blocks of length ``l``.

    Each block contributes ``sqrt(pi/2) |S_i| / sqrt(len_i)``, which for
    equal blocks is ``sqrt(pi l / 2) / T * sum |S_i|``.  A trailing block
    shorter than ``l / 2`` is dropped.
    """
    x = as_series(s)
    n = x.shape[0]
    l = int(l)
    if not 2 <= l <= n / 2:
        raise InvalidInputError(f"block length l={l} outside [2, T/2]")
    x = x - x.mean()
    kappa = math.ceil(n / l)
    edges = np.arange(0, n, l)
    sums = np.add.reduceat(x, edges)
    lens = np.diff(np.append(edges, n)).astype(np.float64)
    if lens[-1] < l / 2:
        sums, lens = sums[:-1], lens[:-1]
        kappa -= 1
    sigma = math.sqrt(math.pi / 2.0) * float(np.mean(np.abs(sums) / np.sqrt(lens)))
    return LrvEstimate(sigma=sigma, method="subsample", kappa=kappa, block_len=l)


def epanechnikov(u):
    u = np.asarray(u, dtype=np.float64)
    return np.where(np.abs(u) < 1.0, 0.75 * (1.0 - u * u), 0.0)


def default_bandwidth(q, n: int):
    """Normal-reference rate ``sqrt(q (1 - q)) n^{-1/5}``."""
    q = np.asarray(q, dtype=np.float64)
    return np.sqrt(q * (1.0 - q)) * n ** (-0.2)


def _kq_sorted(xs: np.ndarray, q: float, h: float) -> float:
    n = xs.shape[0]
    if h < 1.0 / n:
        return float(np.quantile(xs, q))
    w = epanechnikov((np.arange(1, n + 1) / n - q) / h)
    total = w.sum()
    if total <= 0.0:
        return float(np.quantile(xs, q))
    return float(w @ xs / total)


def kernel_quantile(sample, q, h=None):
    """Epanechnikov-weighted order-statistic quantile estimate.

    Parameters
    ----------
    sample : array_like
        Observations (any order).
    q : float or array_like
        Probabilities in (0, 1).
    h : float, optional
        Bandwidth on the probability scale.  ``None`` uses
        :func:`default_bandwidth`; values below ``1/n`` (including 0) fall back
        to the linearly interpolated empirical quantile.

    Returns
    -------
    float or ndarray
        Same shape as ``q``.
    """
    xs = np.sort(as_series(sample, name="sample"))
    qs = np.atleast_1d(np.asarray(q, dtype=np.float64))
    if np.any((qs <= 0.0) | (qs >= 1.0)):
        raise InvalidInputError("quantile levels must lie in (0, 1)")
    if h is None:
        hs = default_bandwidth(qs, xs.shape[0])
    else:
        if h < 0:
            raise InvalidInputError("bandwidth must be non-negative")
        hs = np.full(qs.shape, float(h))
    out = np.array([_kq_sorted(xs, qi, hi) for qi, hi in zip(qs, hs)])
    return float(out[0]) if np.ndim(q) == 0 else out
