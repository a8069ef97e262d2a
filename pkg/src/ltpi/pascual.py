"""ARMA(p, q)-GARCH(1, 1) fitting, forecasting and intervals for future averages.

Models are fitted by Gaussian quasi maximum likelihood with a restarted
Nelder-Mead simplex on standardised data, and orders are picked by AIC.
Two interval families follow:

* ``pi_avg_forecasts`` averages the 1..m step forecasts of the series;
* ``pi_avg_series`` models the rolling m-means and forecasts them m steps
  ahead.

Each has an analytic form (standardised Student-t quantiles with an ML
degrees-of-freedom estimate) and a residual bootstrap with the parameters
held at their point estimates.

A fixed differencing order ``d`` is handled by fitting the model to
``(1 - L)^d y`` and integrating forecasts and simulated paths back.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy import stats as sps
from scipy.linalg import toeplitz

from . import _kernels
from .core import Interval, as_series, frac_coeffs, frac_diff, frac_integrate, rolling_means
from .dgp import ar_is_stationary
from .exceptions import DegenerateEstimateWarning, InvalidInputError, NumericalError

__all__ = [
    "ArmaGarchModel",
    "MAX_ORDER",
    "fit",
    "select",
    "psi_weights",
    "forecast",
    "agg_error_sd",
    "pi_avg_forecasts",
    "pi_avg_series",
]

MAX_ORDER = 2
MIN_OBS = 60
N_RESTARTS = 5
DF_CAP = 100.0
# MA inverse roots are kept inside this radius; on the unit circle the
# conditional likelihood can absorb a sinusoid and overfit white noise
MA_ROOT_MAX = 0.98
_PENALTY = 1e10


@dataclass(frozen=True)
class ArmaGarchModel:
    """Fitted ARMA(p, q) model with constant or GARCH(1, 1) innovation variance.

    ``y`` is the series the user supplied; the model itself describes
    ``x = (1 - L)^d y``.  For constant variance ``alpha_g = beta_g = 0`` and
    ``omega`` is the innovation variance.
    """

    phi: np.ndarray
    theta: np.ndarray
    mean: float
    omega: float
    alpha_g: float
    beta_g: float
    innov_df: float
    residuals: np.ndarray
    cond_var: np.ndarray
    loglik: float
    garch: bool
    d: float = 0.0
    y: np.ndarray = field(default=None, repr=False)
    x: np.ndarray = field(default=None, repr=False)

    @classmethod
    def from_params(cls, phi=(), theta=(), omega: float = 1.0, alpha_g: float = 0.0,
                    beta_g: float = 0.0, mean: float = 0.0, innov_df: float = math.inf,
                    history=None) -> "ArmaGarchModel":
        """Model with given parameters, e.g. for simulation or oracle checks.

        ``history`` (default: ``max(p, q, 1)`` values at the mean) supplies
        the observations the forecasts condition on; residuals are
        recomputed from it and the conditional variance starts at the
        unconditional level.
        """
        phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        if not (_stable(phi) and _stable(-theta)):
            raise InvalidInputError("parameters must be stationary and invertible")
        garch = alpha_g > 0.0 or beta_g > 0.0
        if omega <= 0.0 or alpha_g < 0.0 or beta_g < 0.0 or alpha_g + beta_g >= 1.0:
            raise InvalidInputError("need omega > 0, alpha, beta >= 0, alpha + beta < 1")
        if history is None:
            history = np.full(max(phi.shape[0], theta.shape[0], 1), float(mean))
        y = as_series(history)
        e = _kernels.arma_residuals(y - mean, phi, theta)
        h = _kernels.garch_variance(e, omega, alpha_g, beta_g,
                                    omega / (1.0 - alpha_g - beta_g))
        return cls(phi=phi, theta=theta, mean=float(mean), omega=float(omega),
                   alpha_g=float(alpha_g), beta_g=float(beta_g), innov_df=float(innov_df),
                   residuals=e, cond_var=h, loglik=math.nan, garch=garch, d=0.0,
                   y=y, x=y.copy())

    @property
    def p(self) -> int:
        return self.phi.shape[0]

    @property
    def q(self) -> int:
        return self.theta.shape[0]

    @property
    def n_params(self) -> int:
        return 1 + self.p + self.q + (3 if self.garch else 1)

    @property
    def aic(self) -> float:
        return -2.0 * self.loglik + 2.0 * self.n_params

    @property
    def next_var(self) -> float:
        """Conditional variance of the first out-of-sample innovation."""
        return (self.omega + self.alpha_g * self.residuals[-1] ** 2
                + self.beta_g * self.cond_var[-1])

    @property
    def unconditional_var(self) -> float:
        return self.omega / (1.0 - self.alpha_g - self.beta_g)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def _stable(c, radius: float = 1.0) -> bool:
    # inverse roots of 1 - c1 L - c2 L^2 (orders <= 2) strictly inside ``radius``
    if c.shape[0] == 0:
        return True
    if c.shape[0] == 1:
        return abs(c[0]) < radius
    c1, c2 = c[0] / radius, c[1] / radius ** 2
    return abs(c2) < 1.0 and c1 + c2 < 1.0 and c2 - c1 < 1.0


def _ma_invertible(theta: np.ndarray) -> bool:
    return _stable(-theta, MA_ROOT_MAX)


def _unpack(v, p, q, garch):
    mu = v[0]
    phi = v[1:1 + p]
    theta = v[1 + p:1 + p + q]
    if garch:
        omega, alpha, beta = v[1 + p + q:]
        return mu, phi, theta, omega, alpha, beta
    return mu, phi, theta, None, 0.0, 0.0


def _objective(v, z, p, q, garch):
    mu, phi, theta, omega, alpha, beta = _unpack(v, p, q, garch)
    if not (_stable(phi) and _ma_invertible(theta)):
        return _PENALTY
    if not garch:
        # innovation variance concentrated out
        nll = _kernels.arma_garch_nll(z, mu, phi, theta, 0.0, 0.0, 0.0, False)
        return nll if np.isfinite(nll) else _PENALTY
    # box projection: evaluate at the nearest feasible point, charge the distance
    w, a, b = max(omega, 1e-8), max(alpha, 0.0), max(beta, 0.0)
    if a + b > 0.999:
        a, b = 0.999 * a / (a + b), 0.999 * b / (a + b)
    dist = (omega - w) ** 2 + (alpha - a) ** 2 + (beta - b) ** 2
    nll = _kernels.arma_garch_nll(z, mu, phi, theta, w, a, b, True)
    if not np.isfinite(nll):
        return _PENALTY
    return nll + 1e4 * dist


def _project_stationary(phi: np.ndarray) -> np.ndarray:
    if ar_is_stationary(phi):
        return phi
    warnings.warn("AR estimate outside the stationary region; shrunk towards zero",
                  DegenerateEstimateWarning, stacklevel=3)
    while not ar_is_stationary(phi):
        phi = 0.95 * phi
    return phi


def _standardized_t_nll(nu, u):
    s = math.sqrt((nu - 2.0) / nu)
    return -np.sum(sps.t.logpdf(u / s, nu) - math.log(s))


def estimate_df(u: np.ndarray) -> float:
    """ML degrees of freedom of a unit-variance Student-t for ``u``.

    Estimates above 100 are returned as ``inf`` (normal).
    """
    res = optimize.minimize_scalar(_standardized_t_nll, bounds=(2.05, 2.0 * DF_CAP),
                                   args=(u,), method="bounded")
    nu = float(res.x)
    return math.inf if nu > DF_CAP else nu


def _starts(theta0, p, q, garch, rng):
    yield theta0
    for _ in range(N_RESTARTS - 1):
        v = theta0.copy()
        v[1:1 + p + q] += rng.normal(0.0, 0.2, p + q)
        if garch:
            a = rng.uniform(0.01, 0.2)
            b = rng.uniform(0.5, 0.98 - a)
            v[-3:] = (1.0 - a - b), a, b
        yield v


def _nelder_mead(fun, x0, args):
    k = x0.shape[0]
    return optimize.minimize(
        fun, x0, args=args, method="Nelder-Mead",
        options={"maxiter": 600 * k, "maxfev": 1000 * k, "xatol": 1e-4,
                 "fatol": 1e-6, "adaptive": k > 4},
    )


def _constant_model(y, x, d, p, q, garch):
    n = x.shape[0]
    return ArmaGarchModel(
        phi=np.zeros(p), theta=np.zeros(q), mean=float(x[0]), omega=0.0, alpha_g=0.0,
        beta_g=0.0, innov_df=math.inf, residuals=np.zeros(n), cond_var=np.zeros(n),
        loglik=math.inf, garch=garch, d=d, y=y, x=x,
    )


def fit(s, p: int = 1, q: int = 0, garch_on: bool = False, d: float = 0.0,
        seed: int = 0) -> ArmaGarchModel:
    """Fit an ARMA(p, q) model, optionally with GARCH(1, 1) errors.

    Parameters
    ----------
    s : array_like
        Observations, at least 60.
    p, q : int
        AR and MA orders, each at most :data:`MAX_ORDER`.
    garch_on : bool
        Fit GARCH(1, 1) conditional variances jointly with the mean.
    d : float
        Differencing order applied before fitting (0, 0.5 or 1).
    seed : int
        Seed for the restart perturbations, so fits are reproducible.

    Returns
    -------
    ArmaGarchModel

    Raises
    ------
    NumericalError
        If no restart converges; ``last_iterate`` holds the best optimiser
        result.

    Notes
    -----
    The ARMA part is first estimated by conditional sum of squares.  That
    estimate seeds a Gaussian quasi-likelihood search over all parameters,
    restarted from ``N_RESTARTS`` points.
    """
    p, q = int(p), int(q)
    if not (0 <= p <= MAX_ORDER and 0 <= q <= MAX_ORDER):
        raise InvalidInputError(f"orders must lie in [0, {MAX_ORDER}]")
    y = as_series(s, min_length=MIN_OBS)
    x = frac_diff(y, d) if d else y.copy()
    if x.shape[0] < MIN_OBS:
        raise InvalidInputError(f"need at least {MIN_OBS} observations after differencing")
    loc, scale = float(x.mean()), float(x.std())
    if scale == 0.0:
        return _constant_model(y, x, d, p, q, garch_on)
    z = (x - loc) / scale
    rng = np.random.default_rng(seed)

    css = None
    for v0 in _starts(np.zeros(1 + p + q), p, q, False, rng):
        r = _nelder_mead(_objective, v0, (z, p, q, False))
        if css is None or r.fun < css.fun:
            css = r
    best = css
    if garch_on:
        e = _kernels.arma_residuals(z - css.x[0], css.x[1:1 + p], css.x[1 + p:])
        v0 = np.concatenate((css.x, [0.1 * (e @ e) / e.shape[0], 0.05, 0.85]))
        best = None
        for start in _starts(v0, p, q, True, rng):
            r = _nelder_mead(_objective, start, (z, p, q, True))
            if best is None or (r.success, -r.fun) > (best.success, -best.fun):
                best = r
    if not best.success or best.fun >= _PENALTY:
        raise NumericalError(f"ARMA({p},{q}) garch={garch_on} fit did not converge",
                             last_iterate=best)

    mu, phi, theta, omega, alpha, beta = _unpack(best.x, p, q, garch_on)
    phi = _project_stationary(np.array(phi, dtype=np.float64))
    theta = np.array(theta, dtype=np.float64)
    e = _kernels.arma_residuals(z - mu, phi, theta)
    s2 = e @ e / e.shape[0]
    if garch_on:
        omega, alpha, beta = max(omega, 1e-8), max(alpha, 0.0), max(beta, 0.0)
        if alpha + beta > 0.999:
            alpha, beta = (0.999 * alpha / (alpha + beta), 0.999 * beta / (alpha + beta))
        h = _kernels.garch_variance(e, omega, alpha, beta, s2)
    else:
        omega, alpha, beta = s2, 0.0, 0.0
        h = np.full(e.shape[0], s2)
    nll = float(_kernels.gaussian_nll(e, h)) + e.shape[0] * math.log(scale)
    df = estimate_df(e / np.sqrt(h))
    return ArmaGarchModel(
        phi=phi, theta=theta, mean=loc + scale * mu, omega=omega * scale ** 2,
        alpha_g=alpha, beta_g=beta, innov_df=df, residuals=e * scale,
        cond_var=h * scale ** 2, loglik=-nll, garch=garch_on, d=d, y=y, x=x,
    )


def select(s, d: float = 0.0, seed: int = 0) -> ArmaGarchModel:
    """Minimum-AIC model over ``p, q`` in 0..2 with and without GARCH(1, 1).

    Ties go to the model with fewer parameters.  Candidates whose fit fails
    are skipped.
    """
    best, best_key, last_err = None, None, None
    for garch_on in (False, True):
        for p in range(MAX_ORDER + 1):
            for q in range(MAX_ORDER + 1):
                try:
                    mdl = fit(s, p, q, garch_on, d=d, seed=seed)
                except NumericalError as exc:
                    last_err = exc
                    continue
                if mdl.omega == 0.0:
                    return mdl
                key = (mdl.aic, mdl.n_params)
                if best_key is None or key < best_key:
                    best, best_key = mdl, key
    if best is None:
        raise NumericalError("no candidate model could be fitted",
                             last_iterate=getattr(last_err, "last_iterate", None))
    return best


def fitted_values(model: ArmaGarchModel) -> np.ndarray:
    """One-step predictions of the fitted series ``x`` (pre-sample values zero)."""
    x = model.x - model.mean
    e = model.residuals
    n = x.shape[0]
    out = np.full(n, model.mean)
    for i, c in enumerate(model.phi, start=1):
        out[i:] += c * x[:n - i]
    for j, c in enumerate(model.theta, start=1):
        out[j:] += c * e[:n - j]
    return out


# ---------------------------------------------------------------------------
# forecasting
# ---------------------------------------------------------------------------


def psi_weights(model: ArmaGarchModel, n: int) -> np.ndarray:
    """First ``n`` coefficients of the causal MA(inf) form, ``psi[0] = 1``."""
    n = int(n)
    if n < 1:
        raise InvalidInputError("need at least one weight")
    impulse = np.zeros(n)
    impulse[0] = 1.0
    return _kernels.arma_filter(impulse, model.phi, model.theta)


def _history(model: ArmaGarchModel):
    p, q = model.p, model.q
    x = model.x - model.mean
    y_hist = x[x.shape[0] - p:] if p else np.zeros(0)
    e_hist = model.residuals[model.residuals.shape[0] - q:] if q else np.zeros(0)
    return np.ascontiguousarray(y_hist), np.ascontiguousarray(e_hist)


def variance_forecast(model: ArmaGarchModel, m: int) -> np.ndarray:
    """Innovation variances for horizons 1..m."""
    k = np.arange(m)
    if not model.garch:
        return np.full(m, model.omega)
    s_bar = model.unconditional_var
    return s_bar + (model.alpha_g + model.beta_g) ** k * (model.next_var - s_bar)


def _x_forecast(model: ArmaGarchModel, m: int) -> np.ndarray:
    y_hist, e_hist = _history(model)
    return _kernels.simulate_paths(
        np.zeros((1, m)), model.mean, model.phi, model.theta, model.omega,
        model.alpha_g, model.beta_g, y_hist, e_hist, model.next_var,
    )[0]


def _integrate(model: ArmaGarchModel, x_future: np.ndarray) -> np.ndarray:
    """Map future values of ``x`` back to future values of ``y``."""
    if model.d == 0.0:
        return x_future
    full = np.concatenate((model.x, x_future))
    return frac_integrate(full, model.d, initial=float(model.y[0]))[-x_future.shape[0]:]


def forecast(model: ArmaGarchModel, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Point forecasts of ``y`` and innovation variance forecasts, horizons 1..m.

    Returns
    -------
    mean : ndarray
        ``y`` forecasts with future innovations set to zero.
    var : ndarray
        Conditional innovation variances.
    """
    m = int(m)
    if m < 1:
        raise InvalidInputError("horizon m must be >= 1")
    return _integrate(model, _x_forecast(model, m)), variance_forecast(model, m)


def _total_psi(model: ArmaGarchModel, m: int) -> np.ndarray:
    psi = psi_weights(model, m)
    if model.d == 0.0:
        return psi
    return np.convolve(psi, frac_coeffs(-model.d, m))[:m]


def agg_error_sd(model: ArmaGarchModel, m: int) -> float:
    """Standard deviation of the error of the averaged m-step forecast.

    ``(1/m) sqrt(sum_i (sigma_{T+i} c_{m-i})^2)`` with ``c_k`` the partial
    sums of the causal weights.
    """
    m = int(m)
    if m < 1:
        raise InvalidInputError("horizon m must be >= 1")
    c = np.cumsum(_total_psi(model, m))
    sig = np.sqrt(variance_forecast(model, m))
    return float(np.sqrt(np.sum((sig * c[::-1]) ** 2)) / m)


def horizon_error_sd(model: ArmaGarchModel, m: int) -> float:
    """Standard deviation of the m-step-ahead forecast error."""
    psi = _total_psi(model, m)
    var = variance_forecast(model, m)
    return float(np.sqrt(np.sum(var * psi[::-1] ** 2)))


def _t_quantile(model: ArmaGarchModel, prob: float) -> float:
    nu = model.innov_df
    if not math.isfinite(nu):
        return float(sps.norm.ppf(prob))
    return float(sps.t.ppf(prob, nu) * math.sqrt((nu - 2.0) / nu))


def simulate_future(model: ArmaGarchModel, m: int, B: int,
                    rng: np.random.Generator) -> np.ndarray:
    """``B`` future paths of ``y`` driven by resampled standardised residuals.

    Residuals are standardised by their conditional sd, centred and scaled
    to unit mean square before resampling.
    """
    u = model.residuals / np.sqrt(model.cond_var)
    u = u - u.mean()
    u = u / math.sqrt(u @ u / u.shape[0])
    z = u[rng.integers(0, u.shape[0], size=(B, m))]
    y_hist, e_hist = _history(model)
    xs = _kernels.simulate_paths(
        np.ascontiguousarray(z), model.mean, model.phi, model.theta, model.omega,
        model.alpha_g, model.beta_g, y_hist, e_hist, model.next_var,
    )
    if model.d == 0.0:
        return xs
    # integration is linear: add the filtered deviations to the integrated point path
    x_point = _x_forecast(model, m)
    lower = toeplitz(frac_coeffs(-model.d, m), np.zeros(m))
    return _integrate(model, x_point) + (xs - x_point) @ lower.T


def _check_mode(mode: str, B: int):
    if mode not in ("analytic", "bootstrap"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    if mode == "bootstrap" and B < 500:
        raise InvalidInputError("bootstrap intervals need B >= 500")


def _degenerate(model: ArmaGarchModel) -> bool:
    return model.omega == 0.0


def pi_avg_forecasts(model: ArmaGarchModel, m: int, level: float = 0.9,
                     mode: str = "analytic", B: int = 1000,
                     rng: np.random.Generator | None = None) -> Interval:
    """Interval for the mean of the next ``m`` values from averaged forecasts.

    Parameters
    ----------
    model : ArmaGarchModel
        Fitted model.
    m : int
        Horizon.
    level : float
        Nominal coverage.
    mode : {"analytic", "bootstrap"}
        Analytic t-interval around the averaged point forecast, or the
        empirical quantiles of ``B`` simulated path averages.
    B : int
        Bootstrap paths (at least 500).
    rng : Generator, optional
        Source of the residual draws.
    """
    m = int(m)
    if m < 1:
        raise InvalidInputError("horizon m must be >= 1")
    if not 0.0 < level < 1.0:
        raise InvalidInputError(f"level={level} outside (0, 1)")
    _check_mode(mode, B)
    tag = "4cast-anlt" if mode == "analytic" else "4cast-boot"
    point, _ = forecast(model, m)
    center = float(point.mean())
    if _degenerate(model):
        return Interval(center, center, level, tag, m)
    if mode == "analytic":
        half = _t_quantile(model, 0.5 + level / 2.0) * agg_error_sd(model, m)
        return Interval(center - half, center + half, level, tag, m)
    rng = rng if rng is not None else np.random.default_rng()
    means = simulate_future(model, m, B, rng).mean(axis=1)
    a = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [a, 1.0 - a])
    return Interval(float(lo), float(hi), level, tag, m)


def pi_avg_series(s, m: int, level: float = 0.9, mode: str = "analytic", B: int = 1000,
                  rng: np.random.Generator | None = None, d: float = 0.0,
                  seed: int = 0) -> Interval:
    """Interval from a model of the rolling m-means, forecast m steps ahead.

    The series of rolling means ends at ``T``; its value ``m`` steps later is
    exactly the mean of the next ``m`` observations.
    """
    m = int(m)
    if m < 1:
        raise InvalidInputError("horizon m must be >= 1")
    y = as_series(s)
    if y.shape[0] - m + 1 < MIN_OBS:
        raise InvalidInputError(
            f"need at least {MIN_OBS} rolling means, got {y.shape[0] - m + 1}"
        )
    if not 0.0 < level < 1.0:
        raise InvalidInputError(f"level={level} outside (0, 1)")
    _check_mode(mode, B)
    tag = "series-anlt" if mode == "analytic" else "series-boot"
    model = select(rolling_means(y, m), d=d, seed=seed)
    point, _ = forecast(model, m)
    center = float(point[-1])
    if _degenerate(model):
        return Interval(center, center, level, tag, m)
    if mode == "analytic":
        half = _t_quantile(model, 0.5 + level / 2.0) * horizon_error_sd(model, m)
        return Interval(center - half, center + half, level, tag, m)
    rng = rng if rng is not None else np.random.default_rng()
    ends = simulate_future(model, m, B, rng)[:, -1]
    a = (1.0 - level) / 2.0
    lo, hi = np.quantile(ends, [a, 1.0 - a])
    return Interval(float(lo), float(hi), level, tag, m)
