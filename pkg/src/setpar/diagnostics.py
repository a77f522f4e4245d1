"""Residuals, autocorrelation, dispersion summaries, and one-step forecasts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .likelihood import default_series_lambda_init
from .model import intensity_path, intensity_step
from .params import CountSeries, SetparParams

__all__ = [
    "ResidualReport",
    "AcfReport",
    "OverdispersionSummary",
    "pearson_residuals",
    "acf",
    "one_step_forecasts",
    "in_sample_mse",
    "overdispersion_summary",
]


@dataclass(frozen=True)
class ResidualReport:
    """Pearson residuals with their summary moments.

    ``std_error`` is the unbiased sample standard deviation; skewness and
    excess kurtosis are the moment ratios g1 and g2 built from 1/n-averaged
    central moments.
    """

    residuals: np.ndarray
    mean: float
    std_error: float
    skewness: float
    excess_kurtosis: float


@dataclass(frozen=True)
class AcfReport:
    """Sample autocorrelations for lags 0..max_lag with a white-noise band."""

    lags: np.ndarray
    values: np.ndarray
    n: int
    band: float


class OverdispersionSummary(NamedTuple):
    mean: float
    variance: float
    ratio: float


def _moment_summary(x: np.ndarray) -> tuple[float, float, float, float]:
    n = x.size
    mean = float(x.mean())
    centered = x - mean
    if n > 1:
        sd = float(np.sqrt(centered @ centered / (n - 1)))
    else:
        sd = 0.0
    m2 = float(np.mean(centered**2))
    if m2 > 0.0:
        skew = float(np.mean(centered**3) / m2**1.5)
        kurt = float(np.mean(centered**4) / m2**2 - 3.0)
    else:
        skew = 0.0
        kurt = 0.0
    return mean, sd, skew, kurt


def pearson_residuals(
    series: CountSeries, params: SetparParams, lambda_init: float | None = None
) -> ResidualReport:
    """Residuals (Y_t - lam_t) / sqrt(lam_t) along the fitted intensity path."""
    lam1 = default_series_lambda_init(series) if lambda_init is None else lambda_init
    lam = intensity_path(series, params, lam1).values
    resid = (series.values - lam) / np.sqrt(lam)
    mean, sd, skew, kurt = _moment_summary(resid)
    return ResidualReport(
        residuals=resid, mean=mean, std_error=sd, skewness=skew, excess_kurtosis=kurt
    )


def acf(x, max_lag: int) -> AcfReport:
    """Sample autocorrelation with 1/n-normalized autocovariances.

    The 1/n normalization keeps the autocovariance sequence positive
    semidefinite.  Lag 0 is exactly 1.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"series must be one-dimensional, got shape {x.shape}")
    n = x.size
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")
    if max_lag >= n:
        raise ValueError(f"max_lag must be smaller than the series length, got {max_lag} >= {n}")
    centered = x - x.mean()
    c0 = float(centered @ centered) / n
    values = np.empty(max_lag + 1)
    values[0] = 1.0
    if c0 == 0.0:
        # Constant series: no variation, autocorrelation undefined beyond lag 0.
        values[1:] = 0.0
    else:
        for h in range(1, max_lag + 1):
            values[h] = float(centered[:-h] @ centered[h:]) / n / c0
    return AcfReport(
        lags=np.arange(max_lag + 1), values=values, n=n, band=1.96 / np.sqrt(n)
    )


def one_step_forecasts(
    history: CountSeries,
    params: SetparParams,
    lambda_init: float | None = None,
    horizon_series: CountSeries | None = None,
) -> np.ndarray:
    """One-step-ahead intensity forecasts over the horizon.

    The fitted parameters stay frozen; each forecast for time t uses all
    realized observations up to t - 1, continuing the intensity recursion
    from the end of the history.
    """
    if horizon_series is None or len(horizon_series) == 0:
        raise ValueError("forecast horizon must contain at least one observation")
    lam1 = default_series_lambda_init(history) if lambda_init is None else lambda_init
    lam_hist = intensity_path(history, params, lam1).values
    lam = float(lam_hist[-1])
    y_prev = int(history.values[-1])
    forecasts = np.empty(len(horizon_series))
    for i, y_next in enumerate(horizon_series.values):
        lam = intensity_step(lam, y_prev, params)
        forecasts[i] = lam
        y_prev = int(y_next)
    return forecasts


def in_sample_mse(
    series: CountSeries, params: SetparParams, lambda_init: float | None = None
) -> float:
    """Mean squared gap between observations and the fitted intensity, all t included."""
    lam1 = default_series_lambda_init(series) if lambda_init is None else lambda_init
    lam = intensity_path(series, params, lam1).values
    return float(np.mean((series.values - lam) ** 2))


def overdispersion_summary(series: CountSeries) -> OverdispersionSummary:
    """Sample mean, unbiased variance, and their ratio."""
    values = series.values.astype(np.float64)
    if values.size < 2:
        raise ValueError("overdispersion summary needs at least two observations")
    mean = float(values.mean())
    variance = float(values.var(ddof=1))
    ratio = variance / mean if mean > 0.0 else 0.0
    return OverdispersionSummary(mean=mean, variance=variance, ratio=ratio)
