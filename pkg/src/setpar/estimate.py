"""Two-step maximum likelihood estimation: threshold grid plus inner ascent.

For every threshold candidate the six continuous parameters are maximized by
:func:`setpar.optimize.maximize` with the analytic score; the threshold
estimate is the profile-likelihood argmax over the candidate set (ties go to
the smallest threshold).  The candidate set defaults to the integer range
between two empirical quantiles of the observed counts and can be overridden
explicitly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import EstimationError, IllPosedRegimeError
from .likelihood import PARAM_NAMES, default_series_lambda_init
from .optimize import FeasibleRegion, OptimResult, maximize
from .params import CountSeries, SetparParams

__all__ = [
    "FitConfig",
    "ProfileRow",
    "FitResult",
    "quantile_bounds",
    "fit_fixed_threshold",
    "fit",
    "fit_par",
    "fit_setpar_b2_zero",
]

MIN_REGIME_COUNT = 5

# Deterministic spreads applied to the moment start; chosen to straddle it in
# both feedback coefficients so the multi-start sees distinct basins.
_JITTER_1 = np.array([1.6, 0.7, 1.4])
_JITTER_2 = np.array([0.55, 1.25, 0.6])


@dataclass(frozen=True)
class FitConfig:
    """Settings of the two-step estimator.

    ``thresholds`` overrides the quantile-bounded candidate range when given.
    ``lambda_init`` of ``None`` selects the sample mean of the series.
    """

    alpha1: float = 0.2
    alpha2: float = 0.8
    thresholds: tuple[int, ...] | None = None
    lambda_init: float | None = None
    region: FeasibleRegion | None = None
    tol: float = 1e-8
    max_iter: int = 500
    multi_start: int = 3
    warm_start: bool = True
    min_regime_count: int = MIN_REGIME_COUNT
    eps: float = 1e-3

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha1 < self.alpha2 < 1.0):
            raise ValueError(
                f"quantile levels must satisfy 0 < alpha1 < alpha2 < 1, "
                f"got ({self.alpha1}, {self.alpha2})"
            )
        if self.thresholds is not None:
            ts = tuple(sorted({int(t) for t in self.thresholds}))
            if not ts or any(t < 0 for t in ts):
                raise ValueError(f"threshold override must be nonnegative integers, got {self.thresholds}")
            object.__setattr__(self, "thresholds", ts)
        if self.multi_start < 1:
            raise ValueError("multi_start must be >= 1")


@dataclass(frozen=True)
class ProfileRow:
    """Outcome of the inner maximization at one threshold candidate."""

    r: int
    theta: np.ndarray | None
    loglik: float
    converged: bool
    grad_inf_norm: float
    iterations: int
    n_lower: int
    n_upper: int
    skipped: bool = False
    message: str = ""


@dataclass(frozen=True)
class FitResult:
    """Fitted model with standard errors and the threshold profile."""

    model: str
    theta: np.ndarray
    param_names: tuple[str, ...]
    r: int | None
    loglik: float
    aic: float
    bic: float
    se: np.ndarray
    g_hat: np.ndarray
    g_hat_inv: np.ndarray
    profile: tuple[ProfileRow, ...]
    lambda_init: float
    n: int
    converged: bool

    @property
    def k(self) -> int:
        return int(self.theta.size)

    @property
    def params(self) -> SetparParams:
        """Parameters as a two-regime object.

        The no-threshold model is represented with both regimes equal (the
        branch is then irrelevant) and the reduced model carries ``b2 = 0``.
        """
        if self.model == "setpar":
            return SetparParams.from_theta(self.r, self.theta)
        if self.model == "setpar-b2zero":
            return SetparParams.from_theta(self.r, np.append(self.theta, 0.0))
        d, a, b = self.theta
        return SetparParams.from_theta(0, np.array([d, a, b, d, a, b]))


def quantile_bounds(series: CountSeries, alpha1: float = 0.2, alpha2: float = 0.8) -> tuple[int, int]:
    """Empirical quantiles of the counts at the two levels (type-1 inverse CDF)."""
    if not (0.0 < alpha1 < 1.0 and 0.0 < alpha2 < 1.0):
        raise ValueError(f"quantile levels must lie in (0, 1), got ({alpha1}, {alpha2})")
    values = np.sort(series.values)
    n = values.size

    def type1(alpha: float) -> int:
        k = max(int(math.ceil(n * alpha)), 1)
        return int(values[min(k, n) - 1])

    return type1(alpha1), type1(alpha2)


def _regime_counts(y: np.ndarray, r: int) -> tuple[int, int]:
    # Transitions are driven by Y_1 .. Y_{n-1}.
    driving = y[:-1]
    n_lower = int(np.count_nonzero(driving <= r))
    return n_lower, driving.size - n_lower


def _default_region(series: CountSeries, eps: float) -> FeasibleRegion:
    d_max = max(100.0, 20.0 * (series.mean + 1.0))
    return FeasibleRegion.setpar_default(eps=eps, d_max=d_max)


def _default_par_region(series: CountSeries, eps: float) -> FeasibleRegion:
    d_max = max(100.0, 20.0 * (series.mean + 1.0))
    return FeasibleRegion.par_default(eps=eps, d_max=d_max)


def _moment_start(mean_y: float, region: FeasibleRegion) -> np.ndarray:
    block = np.array([0.5 * mean_y * (1.0 - 0.5 - 0.3), 0.5, 0.3])
    start = np.tile(block, 2)[: region.dim]
    return _interior(region, start)


def _interior(region: FeasibleRegion, x: np.ndarray) -> np.ndarray:
    p = region.project(np.asarray(x, dtype=np.float64))
    width = region.upper - region.lower
    p = np.clip(p, region.lower + 1e-9 * width, region.upper - 1e-9 * width)
    if region.cap_indices is not None:
        i, j = region.cap_indices
        excess = p[i] + p[j] - (region.cap_total - 1e-9)
        if excess > 0:
            p[i] -= excess / 2.0
            p[j] -= excess / 2.0
    return p


def _start_points(region: FeasibleRegion, mean_y: float, multi_start: int) -> list[np.ndarray]:
    s0 = _moment_start(mean_y, region)
    starts = [s0]
    for jitter in (_JITTER_1, _JITTER_2):
        factors = np.tile(jitter, 2)[: region.dim]
        starts.append(_interior(region, s0 * factors))
    return starts[:multi_start]


def _best_of(
    objective: Callable[[np.ndarray], tuple[float, np.ndarray]],
    region: FeasibleRegion,
    starts: Sequence[np.ndarray],
    tol: float,
    max_iter: int,
) -> OptimResult:
    best: OptimResult | None = None
    for start in starts:
        res = maximize(objective, region, start, tol=tol, max_iter=max_iter)
        if best is None:
            best = res
            continue
        if res.value > best.value + 1e-10:
            best = res
        elif abs(res.value - best.value) <= 1e-10:
            # Ties prefer a certified optimum, then the lexicographically
            # smaller parameter vector.
            if res.converged and not best.converged:
                best = res
            elif res.converged == best.converged:
                for a, b in zip(res.x, best.x):
                    if a < b:
                        best = res
                        break
                    if a > b:
                        break
    assert best is not None
    if not best.converged:
        # A stalled run can quit at a better point than any certified one;
        # restarting there with a fresh curvature model usually certifies it.
        retry = maximize(objective, region, best.x, tol=tol, max_iter=max_iter)
        if retry.value >= best.value - 1e-10 and (
            retry.converged or retry.grad_inf_norm < best.grad_inf_norm
        ):
            best = retry
    return best


def _dedup_starts(starts: Sequence[np.ndarray]) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for s in starts:
        if not any(np.allclose(s, t, rtol=0.0, atol=1e-12) for t in out):
            out.append(s)
    return out


def _setpar_objective(y: np.ndarray, r: int, lam1: float):
    r64 = np.int64(r)

    def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
        ll, s = _kernels.loglik_score(y, r64, theta, lam1)
        return ll, s

    return objective


def _b2zero_objective(y: np.ndarray, r: int, lam1: float):
    r64 = np.int64(r)

    def objective(theta5: np.ndarray) -> tuple[float, np.ndarray]:
        theta = np.append(theta5, 0.0)
        ll, s = _kernels.loglik_score(y, r64, theta, lam1)
        return ll, s[:5]

    return objective


def _par_objective(y: np.ndarray, lam1: float):
    def objective(theta3: np.ndarray) -> tuple[float, np.ndarray]:
        theta = np.concatenate([theta3, theta3])
        ll, s = _kernels.loglik_score(y, _kernels.NO_THRESHOLD, theta, lam1)
        return ll, s[:3]

    return objective


def fit_fixed_threshold(
    series: CountSeries, r: int, config: FitConfig | None = None
) -> ProfileRow:
    """Maximize the likelihood at a fixed threshold; raises when a regime is empty."""
    config = config or FitConfig()
    y = series.values
    n_lower, n_upper = _regime_counts(y, r)
    if n_lower == 0:
        raise IllPosedRegimeError("lower", r, n_lower)
    if n_upper == 0:
        raise IllPosedRegimeError("upper", r, n_upper)
    lam1 = config.lambda_init if config.lambda_init is not None else default_series_lambda_init(series)
    region = config.region or _default_region(series, config.eps)
    starts = _start_points(region, series.mean, config.multi_start)
    res = _best_of(_setpar_objective(y, r, lam1), region, _dedup_starts(starts), config.tol, config.max_iter)
    return ProfileRow(
        r=int(r),
        theta=res.x,
        loglik=res.value,
        converged=res.converged,
        grad_inf_norm=res.grad_inf_norm,
        iterations=res.iterations,
        n_lower=n_lower,
        n_upper=n_upper,
    )


def _candidate_thresholds(series: CountSeries, config: FitConfig) -> list[int]:
    if config.thresholds is not None:
        return list(config.thresholds)
    q1, q2 = quantile_bounds(series, config.alpha1, config.alpha2)
    return list(range(q1, q2 + 1))


def _information_block(
    y: np.ndarray, r_eff: int, theta6: np.ndarray, lam1: float, k: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    G_full = _kernels.ghat(y, np.int64(r_eff), theta6, lam1)
    G = G_full[:k, :k]
    try:
        G_inv = np.linalg.inv(G)
    except np.linalg.LinAlgError as exc:
        raise EstimationError(f"information matrix is singular: {exc}") from exc
    diag = np.diag(G_inv).copy()
    if np.any(diag < -1e-8):
        raise EstimationError("information matrix inverse has a negative diagonal entry")
    se = np.sqrt(np.maximum(diag, 0.0) / y.shape[0])
    return G, G_inv, se


def _profile_fit(
    series: CountSeries,
    config: FitConfig,
    region: FeasibleRegion,
    objective_factory: Callable[[np.ndarray, int, float], Callable],
    model: str,
    k: int,
) -> FitResult:
    y = series.values
    n = y.shape[0]
    lam1 = config.lambda_init if config.lambda_init is not None else default_series_lambda_init(series)
    candidates = _candidate_thresholds(series, config)
    base_starts = _start_points(region, series.mean, config.multi_start)

    rows: list[ProfileRow] = []
    warm: np.ndarray | None = None
    for r in candidates:
        n_lower, n_upper = _regime_counts(y, r)
        if min(n_lower, n_upper) < config.min_regime_count:
            side = "lower" if n_lower < n_upper else "upper"
            msg = (
                f"threshold {r} skipped: {side} regime has "
                f"{min(n_lower, n_upper)} < {config.min_regime_count} observations"
            )
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
            rows.append(
                ProfileRow(
                    r=r, theta=None, loglik=-np.inf, converged=False, grad_inf_norm=np.nan,
                    iterations=0, n_lower=n_lower, n_upper=n_upper, skipped=True, message=msg,
                )
            )
            continue
        if config.warm_start and warm is not None:
            # Warm-starting exists to cut grid cost: after the first candidate
            # runs the full multi-start set, later candidates continue from the
            # previous optimum plus the moment start as insurance.
            starts = [warm, base_starts[0]]
        else:
            starts = list(base_starts)
        res = _best_of(
            objective_factory(y, r, lam1), region, _dedup_starts(starts), config.tol, config.max_iter
        )
        rows.append(
            ProfileRow(
                r=r, theta=res.x, loglik=res.value, converged=res.converged,
                grad_inf_norm=res.grad_inf_norm, iterations=res.iterations,
                n_lower=n_lower, n_upper=n_upper,
            )
        )
        warm = res.x

    usable = [row for row in rows if not row.skipped]
    if not usable:
        raise EstimationError(
            "no usable threshold candidate: every candidate leaves a regime "
            f"with fewer than {config.min_regime_count} observations"
        )
    best = usable[0]
    for row in usable[1:]:
        if row.loglik > best.loglik:
            best = row

    theta = best.theta
    theta6 = theta if k == 6 else np.append(theta, 0.0)
    G, G_inv, se = _information_block(y, best.r, theta6, lam1, k)
    loglik = best.loglik
    aic = -2.0 * loglik + 2.0 * k
    bic = -2.0 * loglik + k * math.log(n)
    return FitResult(
        model=model,
        theta=theta,
        param_names=PARAM_NAMES[:k],
        r=best.r,
        loglik=loglik,
        aic=aic,
        bic=bic,
        se=se,
        g_hat=G,
        g_hat_inv=G_inv,
        profile=tuple(rows),
        lambda_init=lam1,
        n=n,
        converged=best.converged,
    )


def fit(series: CountSeries, config: FitConfig | None = None) -> FitResult:
    """Two-step estimate: profile over thresholds, then pick the argmax."""
    config = config or FitConfig()
    region = config.region or _default_region(series, config.eps)
    return _profile_fit(series, config, region, _setpar_objective, "setpar", k=6)


def fit_setpar_b2_zero(series: CountSeries, config: FitConfig | None = None) -> FitResult:
    """Threshold fit with the upper-regime observation feedback pinned at zero."""
    config = config or FitConfig()
    region = (config.region or _default_region(series, config.eps)).drop_last()
    return _profile_fit(series, config, region, _b2zero_objective, "setpar-b2zero", k=5)


def fit_par(series: CountSeries, config: FitConfig | None = None) -> FitResult:
    """No-threshold Poisson autoregression fit with the a + b <= 1 - eps cap."""
    config = config or FitConfig()
    y = series.values
    n = y.shape[0]
    lam1 = config.lambda_init if config.lambda_init is not None else default_series_lambda_init(series)
    region = _default_par_region(series, config.eps) if config.region is None else config.region
    starts = _start_points(region, series.mean, config.multi_start)
    res = _best_of(_par_objective(y, lam1), region, _dedup_starts(starts), config.tol, config.max_iter)

    theta6 = np.concatenate([res.x, res.x])
    G_full = _kernels.ghat(y, _kernels.NO_THRESHOLD, theta6, lam1)
    G = G_full[:3, :3]
    try:
        G_inv = np.linalg.inv(G)
    except np.linalg.LinAlgError as exc:
        raise EstimationError(f"information matrix is singular: {exc}") from exc
    se = np.sqrt(np.maximum(np.diag(G_inv), 0.0) / n)
    k = 3
    return FitResult(
        model="par",
        theta=res.x,
        param_names=("d", "a", "b"),
        r=None,
        loglik=res.value,
        aic=-2.0 * res.value + 2.0 * k,
        bic=-2.0 * res.value + k * math.log(n),
        se=se,
        g_hat=G,
        g_hat_inv=G_inv,
        profile=(),
        lambda_init=lam1,
        n=n,
        converged=res.converged,
    )
