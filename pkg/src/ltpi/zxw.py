"""Model-free prediction intervals for the mean of the next m observations.

Two original constructions (normal quantiles with a lag-window long-run sd,
and empirical quantiles of in-sample rolling means) and their small-sample
adjustments (Student-t quantiles with a subsampling long-run sd, and kernel
quantiles of stationary-bootstrap rolling means).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .core import Interval, aggregation_weights, as_series, frac_diff, rolling_means
from .exceptions import DegenerateEstimateWarning, InvalidInputError, NumericalError
from .stats import (
    BlockPlan,
    carlstein_block_length,
    kernel_quantile,
    lag_window_lrv,
    optimal_block_length,
    stationary_bootstrap_indices,
    subsample_lrv,
)

__all__ = [
    "ZxwConfig",
    "pi_clt_original",
    "pi_qtl_original",
    "pi_clt_tdist",
    "pi_kernel_boot",
    "bootstrap_means",
    "kernel_boot_draws",
    "interval_from_means",
    "location",
]

MIN_WINDOWS = 20


@dataclass(frozen=True)
class ZxwConfig:
    """Settings for the adjusted constructors.

    Attributes
    ----------
    d : float
        Differencing order applied before resampling, one of 0, 0.5, 1.
    B : int
        Bootstrap replicates.
    bandwidth : float or None
        Kernel-quantile bandwidth; ``None`` uses the normal-reference rule.
    block_len : float or None
        Expected stationary-bootstrap block length; ``None`` selects it from
        the data.
    trend : bool
        For ``d = 1`` shift the location by ``(m + 1)/2`` times the mean
        increment (deterministic drift).
    d1_scale : {"aggregate", "approx"}
        Long-run sd scaling for ``d = 1`` in the t-interval: the exact
        partial-sum aggregation, or ``sqrt((m + 1)/2)``.
    """

    d: float = 0.0
    B: int = 1000
    bandwidth: float | None = None
    block_len: float | None = None
    trend: bool = False
    d1_scale: str = "aggregate"

    def __post_init__(self):
        if self.d not in (0.0, 0.5, 1.0):
            raise InvalidInputError(f"d={self.d} must be one of 0, 0.5, 1")
        if self.B < 1:
            raise InvalidInputError("B must be positive")
        if self.d1_scale not in ("aggregate", "approx"):
            raise InvalidInputError(f"unknown d1_scale {self.d1_scale!r}")


def _tail_probs(level: float) -> tuple[float, float]:
    if not 0.0 < level < 1.0:
        raise InvalidInputError(f"level={level} outside (0, 1)")
    a = 1.0 - level
    return a / 2.0, 1.0 - a / 2.0


def _check_horizon(m: int) -> int:
    m = int(m)
    if m < 1:
        raise InvalidInputError("horizon m must be >= 1")
    return m


def location(y: np.ndarray, m: int, cfg: ZxwConfig) -> float:
    """Interval anchor: the sample mean, or the last level for unit-root data."""
    if cfg.d == 1.0:
        loc = float(y[-1])
        if cfg.trend:
            loc += (m + 1) / 2.0 * float(np.mean(np.diff(y)))
        return loc
    return float(y.mean())


def _prepared(s, cfg: ZxwConfig) -> tuple[np.ndarray, np.ndarray]:
    y = as_series(s, min_length=2)
    e = y - y.mean()
    de = frac_diff(e, cfg.d)
    if cfg.d > 0.0:
        de = de - de.mean()
    return y, de


def pi_clt_original(s, m: int, level: float = 0.9, k_T: int | None = None) -> Interval:
    """Sample mean plus normal quantiles times a lag-window long-run sd over sqrt(m)."""
    m = _check_horizon(m)
    y = as_series(s, min_length=50)
    lo, hi = _tail_probs(level)
    ybar = float(y.mean())
    sigma = lag_window_lrv(y, k_T).sigma
    if sigma == 0.0:
        warnings.warn("zero long-run sd; interval collapses to the mean",
                      DegenerateEstimateWarning, stacklevel=2)
    half = sps.norm.ppf(hi) * sigma / math.sqrt(m)
    return Interval(ybar - half, ybar + half, level, "clt-original", m)


def pi_qtl_original(s, m: int, level: float = 0.9, kernel: bool = False) -> Interval:
    """Sample mean plus quantiles of the demeaned in-sample rolling means.

    With ``kernel=True`` the empirical quantiles are replaced by
    Epanechnikov kernel quantiles (``qtl-kernel``).
    """
    m = _check_horizon(m)
    y = as_series(s)
    if y.shape[0] - m + 1 < MIN_WINDOWS:
        raise InvalidInputError(
            f"need at least {MIN_WINDOWS} rolling windows, got {y.shape[0] - m + 1}"
        )
    lo, hi = _tail_probs(level)
    ybar = float(y.mean())
    rm = rolling_means(y - ybar, m)
    if kernel:
        q_lo, q_hi = kernel_quantile(rm, [lo, hi])
        method = "qtl-kernel"
    else:
        q_lo, q_hi = np.quantile(rm, [lo, hi])
        method = "qtl-original"
    return Interval(ybar + q_lo, ybar + q_hi, level, method, m)


def tdist_scale(s, m: int, cfg: ZxwConfig | None = None):
    """Long-run sd of the m-step average and the t degrees of freedom.

    Returns
    -------
    scale : float
    df : int
    """
    cfg = cfg or ZxwConfig()
    m = _check_horizon(m)
    _, de = _prepared(s, cfg)
    est = subsample_lrv(de, carlstein_block_length(de))
    if est.kappa < 3:
        raise NumericalError(f"only {est.kappa} subsample blocks; t quantile undefined",
                             last_iterate=est)
    if cfg.d == 1.0 and cfg.d1_scale == "approx":
        factor = math.sqrt((m + 1) / 2.0)
    else:
        factor = float(np.sqrt(np.sum(aggregation_weights(cfg.d, m) ** 2)))
    return est.sigma * factor, est.kappa - 1


def pi_clt_tdist(s, m: int, level: float = 0.9, cfg: ZxwConfig | None = None) -> Interval:
    """Anchor plus Student-t quantiles (kappa - 1 df) times a subsampling long-run sd.

    For ``d = 0`` the half-width is ``t * sigma / sqrt(m)``.  For ``d > 0``
    the long-run sd of the differenced series is mapped to the sd of the
    m-step average through the (1 - L)^{-d} weights.
    """
    cfg = cfg or ZxwConfig()
    m = _check_horizon(m)
    y = as_series(s, min_length=50)
    lo, hi = _tail_probs(level)
    scale, df = tdist_scale(y, m, cfg)
    if scale == 0.0:
        warnings.warn("zero long-run sd; interval collapses to its anchor",
                      DegenerateEstimateWarning, stacklevel=2)
    half = sps.t.ppf(hi, df) * scale
    c = location(y, m, cfg)
    return Interval(c - half, c + half, level, "clt-tdist", m)


def bootstrap_means(s, m: int, cfg: ZxwConfig, rng: np.random.Generator) -> np.ndarray:
    """``B`` bootstrap draws of the centred m-step average.

    The (differenced, centred) series is resampled with the stationary
    bootstrap; each replicate's last ``m`` values are integrated back with
    (1 - L)^{-d} and averaged.  Returned sorted.
    """
    m = _check_horizon(m)
    _, de = _prepared(s, cfg)
    if de.shape[0] < m:
        raise InvalidInputError("differenced series is shorter than the horizon")
    if np.all(de == de[0]):
        return np.zeros(cfg.B)
    b = cfg.block_len if cfg.block_len is not None else optimal_block_length(de)
    idx = stationary_bootstrap_indices(de.shape[0], m, cfg.B, BlockPlan(b), rng)
    w = aggregation_weights(cfg.d, m)
    return np.sort(de[idx] @ w)


def kernel_boot_draws(s, m: int, cfg: ZxwConfig, rng: np.random.Generator):
    """Checked bootstrap draws and anchor shared by kernel-boot and qtl-boot.

    Returns
    -------
    means : ndarray
        Sorted bootstrap m-step averages.
    anchor : float
        Interval location.
    """
    if cfg.B < 100:
        raise InvalidInputError("kernel-boot needs B >= 100")
    m = _check_horizon(m)
    y = as_series(s)
    if y.shape[0] - m + 1 < MIN_WINDOWS:
        raise InvalidInputError(
            f"need at least {MIN_WINDOWS} rolling windows, got {y.shape[0] - m + 1}"
        )
    return bootstrap_means(y, m, cfg, rng), location(y, m, cfg)


def pi_kernel_boot(s, m: int, level: float = 0.9, cfg: ZxwConfig | None = None,
                   rng: np.random.Generator | None = None, kernel: bool = True) -> Interval:
    """Anchor plus kernel quantiles of stationary-bootstrap m-step averages.

    ``kernel=False`` uses empirical quantiles instead (``qtl-boot``).
    """
    cfg = cfg or ZxwConfig()
    if rng is None:
        rng = np.random.default_rng()
    means, anchor = kernel_boot_draws(s, m, cfg, rng)
    return interval_from_means(means, anchor, int(m), level, cfg, kernel)


def interval_from_means(means: np.ndarray, anchor: float, m: int, level: float,
                        cfg: ZxwConfig, kernel: bool = True) -> Interval:
    """Anchor plus (kernel or empirical) quantiles of bootstrap averages."""
    lo, hi = _tail_probs(level)
    if kernel:
        q_lo, q_hi = kernel_quantile(means, [lo, hi], cfg.bandwidth)
        method = "kernel-boot"
    else:
        q_lo, q_hi = np.quantile(means, [lo, hi])
        method = "qtl-boot"
    return Interval(anchor + q_lo, anchor + q_hi, level, method, m)
