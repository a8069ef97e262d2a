"""Low-frequency cosine projections and the naive Student-t interval.

The series is projected on ``q`` orthonormal cosine columns.  Under white
noise each projection has variance ``sigma^2 / T``, so ``X'X / q`` estimates
``sigma^2 / T`` with ``q`` degrees of freedom.  That gives a t-interval for
the mean of the next ``m`` values.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .core import Interval, as_series
from .exceptions import DegenerateEstimateWarning, InvalidInputError

__all__ = ["CosineProjection", "cosine_basis", "cosine_transform", "pi_naive"]

DEFAULT_Q = 12


@dataclass(frozen=True)
class CosineProjection:
    """Projection coefficients ``x`` on the first ``q`` cosine frequencies."""

    q: int
    x: np.ndarray

    @property
    def xtx(self) -> float:
        return float(self.x @ self.x)


def cosine_basis(n: int, q: int) -> np.ndarray:
    """Columns ``sqrt(2) cos(j pi (t - 1/2) / n)``, ``t = 1..n``, ``j = 1..q``.

    Returns
    -------
    ndarray
        Shape ``(n, q)``.  Each column sums to zero and has squared norm ``n``.
    """
    t = np.arange(1, n + 1, dtype=np.float64) - 0.5
    j = np.arange(1, q + 1, dtype=np.float64)
    return math.sqrt(2.0) * np.cos(np.pi * np.outer(t, j) / n)


def cosine_transform(s, q: int = DEFAULT_Q) -> CosineProjection:
    """``X_j = T^{-1} sum_t sqrt(2) cos(j pi (t - 1/2) / T) y_t`` for ``j = 1..q``.

    Parameters
    ----------
    s : array_like
        Observations.
    q : int, optional
        Number of frequencies, ``1 <= q < T``.

    Returns
    -------
    CosineProjection
    """
    y = as_series(s, min_length=2)
    n = y.shape[0]
    q = int(q)
    if not 1 <= q < n:
        raise InvalidInputError(f"q={q} outside [1, {n})")
    # the columns annihilate constants; centring first makes that exact
    x = cosine_basis(n, q).T @ (y - y.mean()) / n
    return CosineProjection(q=q, x=x)


def pi_naive(s, m: int, q: int = DEFAULT_Q, level: float = 0.9) -> Interval:
    """Sample mean plus t_q quantiles times ``sqrt((m + T) / (m q) X'X)``.

    Parameters
    ----------
    s : array_like
        In-sample observations.
    m : int
        Horizon of the future average.
    q : int, optional
        Number of cosine frequencies and t degrees of freedom.
    level : float, optional
        Nominal coverage.

    Returns
    -------
    Interval
        Method tag ``"mw-naive"``.
    """
    m = int(m)
    if m < 1:
        raise InvalidInputError("horizon m must be >= 1")
    if not 0.0 < level < 1.0:
        raise InvalidInputError(f"level={level} outside (0, 1)")
    y = as_series(s, min_length=2)
    n = y.shape[0]
    proj = cosine_transform(y, q)
    xtx = proj.xtx
    if xtx == 0.0:
        warnings.warn("cosine projections vanish; interval collapses to the mean",
                      DegenerateEstimateWarning, stacklevel=2)
    scale = math.sqrt((m + n) / (m * proj.q) * xtx)
    half = sps.t.ppf(0.5 + level / 2.0, proj.q) * scale
    ybar = float(y.mean())
    return Interval(ybar - half, ybar + half, level, "mw-naive", m)
