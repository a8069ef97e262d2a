"""Prediction intervals for the average of the next m observations of a series.

Submodules
----------
core      validation, rolling means, fractional differencing
dgp       simulators for the coverage experiments
stats     stationary bootstrap, long-run variance, kernel quantiles
zxw       model-free intervals (normal/t and quantile based)
mw        low-frequency cosine projection interval
pascual   ARMA-GARCH model-based intervals
harness   Monte-Carlo and rolling out-of-sample evaluation, reports
cli       command line interface
"""

from ._accel import backend
from .core import Interval, demean, frac_diff, frac_integrate, rolling_means
from .exceptions import DegenerateEstimateWarning, InvalidInputError, NumericalError

__version__ = "0.1.0"

__all__ = [
    "Interval",
    "demean",
    "rolling_means",
    "frac_diff",
    "frac_integrate",
    "backend",
    "InvalidInputError",
    "NumericalError",
    "DegenerateEstimateWarning",
    "__version__",
]
