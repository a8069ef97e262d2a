"""Series validation, demeaning, rolling means and fractional (1 - L)^d filters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import convolve

from .exceptions import InvalidInputError

__all__ = [
    "Interval",
    "as_series",
    "demean",
    "rolling_means",
    "frac_coeffs",
    "frac_diff",
    "frac_integrate",
    "aggregation_weights",
]


@dataclass(frozen=True)
class Interval:
    """Prediction interval for the mean of the next ``horizon`` observations."""

    lower: float
    upper: float
    level: float
    method: str
    horizon: int

    def __post_init__(self):
        for name in ("lower", "upper", "level"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "horizon", int(self.horizon))
        if not 0.0 < self.level < 1.0:
            raise InvalidInputError(f"level={self.level} outside (0, 1)")
        if self.lower > self.upper:
            raise InvalidInputError("interval lower bound exceeds upper bound")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def as_series(values, *, min_length: int = 1, name: str = "series") -> np.ndarray:
    """Validate ``values`` as a finite 1-d float64 array.

    Parameters
    ----------
    values : array_like
        Observations in time order.
    min_length : int, optional
        Smallest acceptable length.
    name : str, optional
        Used in error messages.

    Returns
    -------
    ndarray
        A contiguous float64 copy of the input.
    """
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_length:
        raise InvalidInputError(
            f"{name} needs at least {min_length} observations, got {arr.shape[0]}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains NaN or infinite values")
    return arr


def demean(s) -> tuple[np.ndarray, float]:
    """Subtract the sample mean.

    Returns
    -------
    centered : ndarray
    mean : float
    """
    x = as_series(s)
    mu = float(x.mean())
    return x - mu, mu


def rolling_means(s, m: int) -> np.ndarray:
    """Means of every window of ``m`` consecutive values.

    Element ``k`` of the result is ``mean(s[k:k + m])``; the output has
    ``len(s) - m + 1`` entries.
    """
    x = as_series(s)
    m = int(m)
    if not 1 <= m <= x.shape[0]:
        raise InvalidInputError(f"window m={m} outside [1, {x.shape[0]}]")
    if m == 1:
        return x
    return sliding_window_view(x, m).mean(axis=1)


def _check_d(d: float) -> float:
    d = float(d)
    if not 0.0 <= d <= 1.0:
        raise InvalidInputError(f"differencing order d={d} outside [0, 1]")
    return d


def frac_coeffs(d: float, n: int) -> np.ndarray:
    """First ``n`` coefficients of the binomial expansion of (1 - L)^d.

    Uses ``c_j = c_{j-1} (j - 1 - d) / j`` so no factorials are formed.
    Negative ``d`` gives the inverse filter (1 - L)^{-|d|}.
    """
    n = int(n)
    if n < 1:
        raise InvalidInputError("need at least one coefficient")
    c = np.empty(n)
    c[0] = 1.0
    if n > 1:
        j = np.arange(1, n, dtype=np.float64)
        c[1:] = np.cumprod((j - 1.0 - d) / j)
    return c


def frac_diff(s, d: float) -> np.ndarray:
    """Apply (1 - L)^d.

    ``d = 1`` returns first differences (one observation shorter).  For
    ``0 < d < 1`` the expansion is truncated at the available history, so the
    output keeps the input length.  ``d = 0`` returns a copy.
    """
    d = _check_d(d)
    x = as_series(s, min_length=2)
    if d == 0.0:
        return x
    if d == 1.0:
        return np.diff(x)
    return convolve(x, frac_coeffs(d, x.shape[0]))[: x.shape[0]]


def frac_integrate(s, d: float, window: int | None = None, initial: float = 0.0) -> np.ndarray:
    """Apply (1 - L)^{-d} to the last ``window`` values of ``s``.

    Values before the window are treated as zero.  For ``d = 1`` this is a
    cumulative sum, and ``initial`` is the level preceding the window, so
    ``frac_integrate(frac_diff(x, 1), 1, initial=x[0])`` recovers ``x[1:]``.
    """
    d = _check_d(d)
    x = as_series(s)
    n = x.shape[0]
    window = n if window is None else int(window)
    if not 1 <= window <= n:
        raise InvalidInputError(f"window={window} outside [1, {n}]")
    tail = x[n - window:]
    if d == 0.0:
        return tail.copy()
    if d == 1.0:
        return np.cumsum(tail) + initial
    return convolve(tail, frac_coeffs(-d, window))[:window]


def aggregation_weights(d: float, m: int) -> np.ndarray:
    """Weights that map m shocks to the mean of their (1 - L)^{-d} integral.

    With ``psi`` the coefficients of (1 - L)^{-d}, shock ``i`` (0-based, oldest
    first) enters the average of the integrated window with weight
    ``sum(psi[:m - i]) / m``.
    """
    d = _check_d(d)
    psi = frac_coeffs(-d, m)
    return np.cumsum(psi)[::-1] / m
