"""Intensity recursion and exact simulation of the threshold Poisson autoregression."""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .params import CountSeries, IntensityPath, MultiRegimeParams, SetparParams

__all__ = [
    "intensity_step",
    "intensity_step_multi",
    "intensity_path",
    "default_lambda_init",
    "simulate",
    "simulate_multi",
]

DEFAULT_BURN_IN = 500


def _check_lambda(lambda_prev: float) -> float:
    if not (math.isfinite(lambda_prev) and lambda_prev > 0.0):
        raise ValueError(f"intensity must be finite and > 0, got {lambda_prev!r}")
    return float(lambda_prev)


def intensity_step(lambda_prev: float, y_prev: int, params: SetparParams) -> float:
    """One step of the two-regime recursion.

    Returns ``d1 + a1*lambda_prev + b1*y_prev`` when ``y_prev <= r`` and the
    upper-regime counterpart otherwise.
    """
    lam = _check_lambda(lambda_prev)
    if y_prev < 0:
        raise ValueError(f"count must be >= 0, got {y_prev}")
    reg = params.lower if y_prev <= params.r else params.upper
    return reg.d + reg.a * lam + reg.b * y_prev


def intensity_step_multi(lambda_prev: float, y_prev: int, params: MultiRegimeParams) -> float:
    """One step of the multi-regime recursion with half-open bins [r_{i-1}, r_i)."""
    lam = _check_lambda(lambda_prev)
    reg = params.regimes[params.regime_index(y_prev)]
    return reg.d + reg.a * lam + reg.b * y_prev


def intensity_path(series: CountSeries, params: SetparParams, lambda_init: float) -> IntensityPath:
    """Deterministic intensity sequence driven by ``series`` from ``lambda_init``."""
    lam1 = _check_lambda(lambda_init)
    lam = _kernels.intensity_recursion(series.values, np.int64(params.r), params.theta, lam1)
    return IntensityPath(values=lam, initial_value=lam1)


def default_lambda_init(params: SetparParams) -> float:
    """Reachable fixed point ``d1 / (1 - a1)`` of the all-zero lower-regime map.

    Falls back to ``d1`` when the lower regime has ``a1 >= 1`` and the fixed
    point does not exist.
    """
    if params.lower.a < 1.0:
        return params.lower.d / (1.0 - params.lower.a)
    return params.lower.d


def _make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def simulate(
    params: SetparParams,
    n: int,
    seed,
    burn_in: int = DEFAULT_BURN_IN,
    lambda_init: float | None = None,
) -> tuple[CountSeries, IntensityPath]:
    """Draw ``n`` observations of (Y_t, lambda_t) after discarding ``burn_in`` pairs.

    Counts are conditionally Poisson given the current intensity; the
    intensity then advances through :func:`intensity_step`.  The draw is fully
    reproducible from ``seed`` (an int, a ``SeedSequence`` or a ``Generator``;
    integer seeds select a counter-based Philox stream, so disjoint seeds give
    independent streams for parallel replication).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    lam1 = default_lambda_init(params) if lambda_init is None else _check_lambda(lambda_init)
    rng = _make_rng(seed)
    d1, a1, b1 = params.lower.d, params.lower.a, params.lower.b
    d2, a2, b2 = params.upper.d, params.upper.a, params.upper.b
    r = params.r

    total = n + burn_in
    ys = np.empty(total, dtype=np.int64)
    lams = np.empty(total, dtype=np.float64)
    lam = lam1
    for t in range(total):
        lams[t] = lam
        yt = int(rng.poisson(lam))
        ys[t] = yt
        if yt <= r:
            lam = d1 + a1 * lam + b1 * yt
        else:
            lam = d2 + a2 * lam + b2 * yt
    ys = ys[burn_in:]
    lams = lams[burn_in:]
    return CountSeries(ys), IntensityPath(values=lams, initial_value=float(lams[0]))


def simulate_multi(
    params: MultiRegimeParams,
    n: int,
    seed,
    burn_in: int = DEFAULT_BURN_IN,
    lambda_init: float | None = None,
) -> tuple[CountSeries, IntensityPath]:
    """Multi-regime counterpart of :func:`simulate` (half-open bin convention)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    first = params.regimes[0]
    if lambda_init is None:
        lam1 = first.d / (1.0 - first.a) if first.a < 1.0 else first.d
    else:
        lam1 = _check_lambda(lambda_init)
    rng = _make_rng(seed)

    total = n + burn_in
    ys = np.empty(total, dtype=np.int64)
    lams = np.empty(total, dtype=np.float64)
    lam = lam1
    for t in range(total):
        lams[t] = lam
        yt = int(rng.poisson(lam))
        ys[t] = yt
        lam = intensity_step_multi(lam, yt, params)
    ys = ys[burn_in:]
    lams = lams[burn_in:]
    return CountSeries(ys), IntensityPath(values=lams, initial_value=float(lams[0]))
