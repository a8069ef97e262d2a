"""Hot inner loops, each in a numba flavour and a vectorised numpy flavour.

The public names at the bottom dispatch on :data:`ltpi._accel.USE_NUMBA`.
Both flavours consume the same pre-drawn random numbers, so they return
identical results (up to floating point summation order) for a given seed.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# stationary bootstrap index chains
# ---------------------------------------------------------------------------


@njit
def _sb_indices_numba(starts, u, p, n):
    reps, length = starts.shape
    out = np.empty((reps, length), dtype=np.int64)
    for b in range(reps):
        idx = starts[b, 0]
        out[b, 0] = idx
        for t in range(1, length):
            if u[b, t] < p:
                idx = starts[b, t]
            else:
                idx += 1
                if idx >= n:
                    idx = 0
            out[b, t] = idx
    return out


def _sb_indices_numpy(starts, u, p, n):
    reps, length = starts.shape
    fresh = u < p
    fresh[:, 0] = True
    pos = np.where(fresh, np.arange(length), 0)
    block_start = np.maximum.accumulate(pos, axis=1)
    rows = np.arange(reps)[:, None]
    offset = np.arange(length)[None, :] - block_start
    return (starts[rows, block_start] + offset) % n


# ---------------------------------------------------------------------------
# ARMA filtering
# ---------------------------------------------------------------------------


@njit
def _arma_filter_numba(eps, phi, theta):
    n = eps.shape[0]
    p = phi.shape[0]
    q = theta.shape[0]
    out = np.empty(n)
    for t in range(n):
        acc = eps[t]
        for i in range(p):
            if t - 1 - i >= 0:
                acc += phi[i] * out[t - 1 - i]
        for j in range(q):
            if t - 1 - j >= 0:
                acc += theta[j] * eps[t - 1 - j]
        out[t] = acc
    return out


def _arma_filter_numpy(eps, phi, theta):
    b = np.concatenate(([1.0], theta))
    a = np.concatenate(([1.0], -phi))
    return lfilter(b, a, eps)


@njit
def _arma_residuals_numba(y, phi, theta):
    n = y.shape[0]
    p = phi.shape[0]
    q = theta.shape[0]
    e = np.empty(n)
    for t in range(n):
        acc = y[t]
        for i in range(p):
            if t - 1 - i >= 0:
                acc -= phi[i] * y[t - 1 - i]
        for j in range(q):
            if t - 1 - j >= 0:
                acc -= theta[j] * e[t - 1 - j]
        e[t] = acc
    return e


def _arma_residuals_numpy(y, phi, theta):
    b = np.concatenate(([1.0], -phi))
    a = np.concatenate(([1.0], theta))
    return lfilter(b, a, y)


# ---------------------------------------------------------------------------
# GARCH(1,1) variance recursion and Gaussian quasi log-likelihood
# ---------------------------------------------------------------------------


@njit
def _garch_variance_numba(e, omega, alpha, beta, h0):
    n = e.shape[0]
    h = np.empty(n)
    h[0] = h0
    for t in range(1, n):
        h[t] = omega + alpha * e[t - 1] * e[t - 1] + beta * h[t - 1]
    return h


def _garch_variance_numpy(e, omega, alpha, beta, h0):
    h = np.empty(e.shape[0])
    h[0] = h0
    if e.shape[0] > 1:
        x = omega + alpha * e[:-1] ** 2
        h[1:], _ = lfilter([1.0], [1.0, -beta], x, zi=[beta * h0])
    return h


@njit
def _gaussian_nll_numba(e, h):
    acc = 0.0
    for t in range(e.shape[0]):
        acc += np.log(h[t]) + e[t] * e[t] / h[t]
    return 0.5 * (acc + e.shape[0] * np.log(2.0 * np.pi))


def _gaussian_nll_numpy(e, h):
    return 0.5 * (np.sum(np.log(h) + e * e / h) + e.shape[0] * np.log(2.0 * np.pi))


@njit
def _arma_garch_nll_numba(z, mu, phi, theta, omega, alpha, beta, garch):
    e = _arma_residuals_numba(z - mu, phi, theta)
    n = e.shape[0]
    s2 = 0.0
    for t in range(n):
        s2 += e[t] * e[t]
    s2 /= n
    if s2 <= 0.0:
        return np.inf
    if not garch:
        return 0.5 * n * (np.log(2.0 * np.pi * s2) + 1.0)
    h = s2
    acc = 0.0
    for t in range(n):
        if t > 0:
            h = omega + alpha * e[t - 1] * e[t - 1] + beta * h
        acc += np.log(h) + e[t] * e[t] / h
    return 0.5 * (acc + n * np.log(2.0 * np.pi))


def _arma_garch_nll_numpy(z, mu, phi, theta, omega, alpha, beta, garch):
    e = _arma_residuals_numpy(z - mu, phi, theta)
    n = e.shape[0]
    s2 = e @ e / n
    if s2 <= 0.0:
        return np.inf
    if not garch:
        return 0.5 * n * (np.log(2.0 * np.pi * s2) + 1.0)
    h = _garch_variance_numpy(e, omega, alpha, beta, s2)
    return _gaussian_nll_numpy(e, h)


# ---------------------------------------------------------------------------
# bootstrap future paths for a fitted ARMA-GARCH model
# ---------------------------------------------------------------------------


@njit
def _simulate_paths_numba(z, mu, phi, theta, omega, alpha, beta,
                          y_hist, e_hist, h_next):
    reps, m = z.shape
    p = phi.shape[0]
    q = theta.shape[0]
    out = np.empty((reps, m))
    ylag = np.empty(p + m)
    elag = np.empty(q + m)
    for b in range(reps):
        # history stored oldest first, so ylag[p + t - 1 - i] is y_{T+t-i}
        for i in range(p):
            ylag[i] = y_hist[i]
        for j in range(q):
            elag[j] = e_hist[j]
        h = h_next
        for t in range(m):
            e = np.sqrt(h) * z[b, t]
            acc = e
            for i in range(p):
                acc += phi[i] * ylag[p + t - 1 - i]
            for j in range(q):
                acc += theta[j] * elag[q + t - 1 - j]
            ylag[p + t] = acc
            elag[q + t] = e
            out[b, t] = acc + mu
            h = omega + alpha * e * e + beta * h
    return out


def _simulate_paths_numpy(z, mu, phi, theta, omega, alpha, beta,
                          y_hist, e_hist, h_next):
    reps, m = z.shape
    p = phi.shape[0]
    q = theta.shape[0]
    ylag = np.empty((reps, p + m))
    elag = np.empty((reps, q + m))
    ylag[:, :p] = y_hist
    elag[:, :q] = e_hist
    h = np.full(reps, h_next)
    for t in range(m):
        e = np.sqrt(h) * z[:, t]
        acc = e.copy()
        for i in range(p):
            acc += phi[i] * ylag[:, p + t - 1 - i]
        for j in range(q):
            acc += theta[j] * elag[:, q + t - 1 - j]
        ylag[:, p + t] = acc
        elag[:, q + t] = e
        h = omega + alpha * e * e + beta * h
    return ylag[:, p:] + mu


_IMPLS = {
    "sb_indices": (_sb_indices_numba, _sb_indices_numpy),
    "arma_filter": (_arma_filter_numba, _arma_filter_numpy),
    "arma_residuals": (_arma_residuals_numba, _arma_residuals_numpy),
    "garch_variance": (_garch_variance_numba, _garch_variance_numpy),
    "gaussian_nll": (_gaussian_nll_numba, _gaussian_nll_numpy),
    "arma_garch_nll": (_arma_garch_nll_numba, _arma_garch_nll_numpy),
    "simulate_paths": (_simulate_paths_numba, _simulate_paths_numpy),
}


def implementation(name: str, use_numba: bool | None = None):
    """Return one flavour of a kernel; ``use_numba=None`` follows the env flag."""
    fast, slow = _IMPLS[name]
    if use_numba is None:
        use_numba = USE_NUMBA
    return fast if use_numba else slow


sb_indices = implementation("sb_indices")
arma_filter = implementation("arma_filter")
arma_residuals = implementation("arma_residuals")
garch_variance = implementation("garch_variance")
gaussian_nll = implementation("gaussian_nll")
arma_garch_nll = implementation("arma_garch_nll")
simulate_paths = implementation("simulate_paths")
