"""Data generating processes for the coverage experiments.

All samplers take a :class:`numpy.random.Generator`.  Experiments build
generators with :func:`make_rng`, which pins the bit generator to Philox
(a counter-based 64-bit generator) so a seed maps to the same stream on
every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import fftconvolve

from . import _kernels
from .exceptions import InvalidInputError

__all__ = [
    "DgpSpec",
    "SCENARIOS",
    "make_rng",
    "sample_mixture_normal",
    "sample_stable",
    "gen_scenario",
    "gen_arma_garch",
    "long_memory_weights",
]

KINDS = ("ar1", "longmem", "local_level", "local_to_unity", "arma_garch")
TAILS = ("mixture_normal", "stable", "normal")
BURN_IN = 500


def make_rng(seed: int) -> np.random.Generator:
    """Philox-backed generator for a non-negative integer seed."""
    seed = int(seed)
    if seed < 0:
        raise InvalidInputError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(seed))


def sample_mixture_normal(n: int, rng: np.random.Generator, second_var: float = 1.25) -> np.ndarray:
    """Equal-weight mixture of N(0, 1) and N(0, ``second_var``).

    ``second_var`` is a variance, so the default mixture has variance 1.125.
    """
    pick = rng.random(n) < 0.5
    z = rng.standard_normal(n)
    return np.where(pick, z, z * np.sqrt(second_var))


def sample_stable(n: int, alpha: float, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Symmetric alpha-stable draws (Chambers-Mallows-Stuck).

    For ``alpha = 2`` the draws are N(0, 2 scale^2).
    """
    if not 0.0 < alpha <= 2.0:
        raise InvalidInputError(f"alpha={alpha} outside (0, 2]")
    if scale <= 0:
        raise InvalidInputError("scale must be positive")
    v = rng.uniform(-np.pi / 2, np.pi / 2, n)
    w = rng.standard_exponential(n)
    if alpha == 1.0:
        return scale * np.tan(v)
    x = (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
         * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))
    return scale * x


@dataclass(frozen=True)
class DgpSpec:
    """Scenario descriptor.

    ``kind`` picks the dependence structure and ``tail`` the innovation law.
    ``b`` and ``c`` parametrise the local-level and local-to-unity models.
    """

    kind: str = "ar1"
    tail: str = "mixture_normal"
    sigma: float = 1.0
    phi: float = 0.6
    decay: float = 0.8
    alpha_stable: float = 1.5
    b: float = 1.0
    c: float = 0.0
    trunc_len: int = 10_000
    mixture_var: float = 1.25

    def validate(self) -> "DgpSpec":
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown kind {self.kind!r}")
        if self.tail not in TAILS:
            raise InvalidInputError(f"unknown tail {self.tail!r}")
        if self.kind == "ar1" and not abs(self.phi) < 1:
            raise InvalidInputError("ar1 needs |phi| < 1")
        if not 0 < self.alpha_stable <= 2:
            raise InvalidInputError("alpha_stable outside (0, 2]")
        if self.kind == "longmem" and self.trunc_len < 1000:
            raise InvalidInputError("longmem needs trunc_len >= 1000")
        if self.kind == "local_level" and self.b <= 0:
            raise InvalidInputError("local_level needs b > 0")
        if self.sigma <= 0:
            raise InvalidInputError("sigma must be positive")
        return self

    def with_(self, **changes) -> "DgpSpec":
        return replace(self, **changes)


SCENARIOS: dict[str, DgpSpec] = {
    "short-light": DgpSpec(kind="ar1", tail="mixture_normal", sigma=1.31, phi=0.6),
    "long-light": DgpSpec(kind="longmem", tail="mixture_normal", sigma=1.31),
    "short-heavy": DgpSpec(kind="ar1", tail="stable", sigma=1.31, phi=0.6),
    "long-heavy": DgpSpec(kind="longmem", tail="stable", sigma=1.31),
}


def _innovations(spec: DgpSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.tail == "mixture_normal":
        return sample_mixture_normal(n, rng, spec.mixture_var)
    if spec.tail == "stable":
        return sample_stable(n, spec.alpha_stable, 1.0, rng)
    return rng.standard_normal(n)


def long_memory_weights(decay: float, trunc_len: int) -> np.ndarray:
    """MA weights (j + 1)^{-decay}, j = 0 .. trunc_len - 1."""
    return np.arange(1, trunc_len + 1, dtype=np.float64) ** (-decay)


def gen_scenario(spec: DgpSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Simulate ``n`` observations from ``spec``."""
    spec.validate()
    n = int(n)
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    if spec.kind == "ar1":
        eps = spec.sigma * _innovations(spec, n + BURN_IN, rng)
        x = _kernels.arma_filter(eps, np.array([spec.phi]), np.empty(0))
        return x[BURN_IN:]
    if spec.kind == "longmem":
        a = long_memory_weights(spec.decay, spec.trunc_len)
        eps = _innovations(spec, n + spec.trunc_len - 1, rng)
        return spec.sigma * fftconvolve(eps, a, mode="valid")
    if spec.kind == "local_level":
        y1 = rng.standard_normal(n)
        y2 = rng.standard_normal(n)
        return spec.sigma * (y1 + np.cumsum(y2) / (spec.b * n))
    if spec.kind == "local_to_unity":
        y1 = spec.sigma * rng.standard_normal(n)
        return _kernels.arma_filter(y1, np.array([1.0 - spec.c / n]), np.empty(0))
    # arma_garch: constant-variance ARMA(1,0) with the scenario's phi and sigma
    return gen_arma_garch(spec.phi, 0.0, spec.sigma ** 2, 0.0, 0.0, n, rng)


def _as_coeffs(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=np.float64))


def ar_is_stationary(phi) -> bool:
    phi = _as_coeffs(phi)
    phi = np.trim_zeros(phi, "b")
    if phi.size == 0:
        return True
    roots = np.roots(np.concatenate((-phi[::-1], [1.0])))
    return bool(np.all(np.abs(roots) > 1.0))


def gen_arma_garch(phi, theta, omega: float, alpha_g: float, beta_g: float, n: int,
                   rng: np.random.Generator, innovation_dist="normal") -> np.ndarray:
    """Simulate an ARMA-GARCH(1,1) path after a 500-observation burn-in.

    Parameters
    ----------
    phi, theta : float or sequence
        AR and MA coefficients.
    omega, alpha_g, beta_g : float
        GARCH(1,1) parameters; ``alpha_g = beta_g = 0`` gives constant
        innovation variance ``omega``.
    innovation_dist : {"normal"} or float
        A float is read as Student-t degrees of freedom (> 2); draws are
        rescaled to unit variance.
    """
    phi = _as_coeffs(phi)
    theta = _as_coeffs(theta)
    if not ar_is_stationary(phi):
        raise InvalidInputError("AR part is not stationary")
    if omega <= 0 or alpha_g < 0 or beta_g < 0 or alpha_g + beta_g >= 1:
        raise InvalidInputError("GARCH parameters must satisfy omega > 0, alpha + beta < 1")
    total = int(n) + BURN_IN
    if innovation_dist == "normal":
        z = rng.standard_normal(total)
    else:
        df = float(innovation_dist)
        if df <= 2:
            raise InvalidInputError("t innovations need df > 2")
        z = rng.standard_t(df, total) * np.sqrt((df - 2) / df)
    h0 = omega / (1.0 - alpha_g - beta_g)
    path = _kernels.simulate_paths(
        z[None, :], 0.0, phi, theta, omega, alpha_g, beta_g,
        np.zeros(phi.shape[0]), np.zeros(theta.shape[0]), h0,
    )[0]
    return path[BURN_IN:]
