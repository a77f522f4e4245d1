"""Conditional log-likelihood, exact score recursion, and information matrices.

The log-likelihood omits the ``log(Y_t!)`` constant throughout:
``l_t = -lam_t + Y_t log(lam_t)``.  The intensity is rebuilt recursively from
an explicit initial value; the derivative state starts at zero, so the t = 1
term contributes to the likelihood but not to the score.
"""

from __future__ import annotations

import math
from typing import Iterator, NamedTuple

import numpy as np

from . import _kernels
from .params import CountSeries, SetparParams

__all__ = [
    "ScoreState",
    "default_series_lambda_init",
    "log_likelihood",
    "score",
    "g_hat",
    "observed_information",
    "iter_score_states",
]

PARAM_NAMES = ("d1", "a1", "b1", "d2", "a2", "b2")


class ScoreState(NamedTuple):
    """Intensity and its parameter gradient carried along the recursion."""

    lam: float
    dlam_dtheta: np.ndarray


def default_series_lambda_init(series: CountSeries) -> float:
    """Sample mean of the counts, floored away from zero for all-zero series."""
    return max(series.mean, 1e-3)


def _resolve_init(series: CountSeries, lambda_init: float | None) -> float:
    if lambda_init is None:
        return default_series_lambda_init(series)
    if not (math.isfinite(lambda_init) and lambda_init > 0.0):
        raise ValueError(f"lambda_init must be finite and > 0, got {lambda_init!r}")
    return float(lambda_init)


def log_likelihood(
    series: CountSeries, params: SetparParams, lambda_init: float | None = None
) -> float:
    """Total conditional log-likelihood, apart from the factorial constant."""
    lam1 = _resolve_init(series, lambda_init)
    return float(_kernels.loglik(series.values, np.int64(params.r), params.theta, lam1))


def score(
    series: CountSeries, params: SetparParams, lambda_init: float | None = None
) -> np.ndarray:
    """Gradient of the log-likelihood in the six continuous parameters at fixed r."""
    lam1 = _resolve_init(series, lambda_init)
    _, s = _kernels.loglik_score(series.values, np.int64(params.r), params.theta, lam1)
    return s


def g_hat(
    series: CountSeries, params: SetparParams, lambda_init: float | None = None
) -> np.ndarray:
    """Sample information matrix; symmetric and positive semidefinite."""
    lam1 = _resolve_init(series, lambda_init)
    return _kernels.ghat(series.values, np.int64(params.r), params.theta, lam1)


def observed_information(
    series: CountSeries, params: SetparParams, lambda_init: float | None = None
) -> np.ndarray:
    """Negative averaged Hessian of the log-likelihood (observed information)."""
    lam1 = _resolve_init(series, lambda_init)
    return _kernels.observed_information(series.values, np.int64(params.r), params.theta, lam1)


def iter_score_states(
    series: CountSeries, params: SetparParams, lambda_init: float | None = None
) -> Iterator[ScoreState]:
    """Yield the per-time (lam_t, dlam_t/dtheta) states in plain Python.

    Reference implementation of the derivative recursion: the gradient of
    lam_t picks up the regressor ``(1, lam_{t-1}, Y_{t-1})`` on the active
    regime's block and is damped by the active ``a`` coefficient.  Kept free
    of the compiled code paths so tests can cross-check them against it.
    """
    lam1 = _resolve_init(series, lambda_init)
    y = series.values
    r = params.r
    d1, a1, b1 = params.lower.d, params.lower.a, params.lower.b
    d2, a2, b2 = params.upper.d, params.upper.a, params.upper.b

    lam = lam1
    grad = np.zeros(6, dtype=np.float64)
    yield ScoreState(lam=lam, dlam_dtheta=grad.copy())
    for t in range(1, y.shape[0]):
        yp = int(y[t - 1])
        lp = lam
        if yp <= r:
            lam = d1 + a1 * lp + b1 * yp
            a, base = a1, 0
        else:
            lam = d2 + a2 * lp + b2 * yp
            a, base = a2, 3
        grad = a * grad
        grad[base] += 1.0
        grad[base + 1] += lp
        grad[base + 2] += yp
        yield ScoreState(lam=lam, dlam_dtheta=grad.copy())
