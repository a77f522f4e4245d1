"""Constrained smooth maximization over a box with one linear sum cap.

The feasible region is a coordinate box with strictly positive lower bounds,
optionally intersected with ``x_i + x_j <= cap`` for one coordinate pair.
Maximization runs quasi-Newton (L-BFGS-B) on a smooth bijection of the open
region onto unconstrained space (logistic transform per coordinate, a
two-dimensional logistic-simplex transform for the capped pair), followed by
a projected-gradient polish in the original coordinates that certifies the
first-order condition and lands boundary solutions exactly on their bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .errors import InfeasibleStartError, NumericObjectiveError

__all__ = ["FeasibleRegion", "OptimResult", "maximize"]

_ARMIJO_SLOPE = 1e-4
_ARMIJO_SHRINK = 0.5


@dataclass(frozen=True)
class FeasibleRegion:
    """Box bounds plus an optional sum cap on one coordinate pair.

    ``cap_indices`` names the pair subject to ``x_i + x_j <= cap_total``;
    ``eps`` is the slack used when constructing the default regions (lower
    bounds and the distance of caps from 1).
    """

    lower: np.ndarray
    upper: np.ndarray
    cap_indices: tuple[int, int] | None = None
    cap_total: float | None = None
    eps: float = 1e-3

    def __post_init__(self) -> None:
        lo = np.asarray(self.lower, dtype=np.float64).copy()
        hi = np.asarray(self.upper, dtype=np.float64).copy()
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper bounds must be 1-d arrays of equal length")
        if np.any(lo <= 0.0):
            raise ValueError("all lower bounds must be strictly positive")
        if np.any(hi <= lo):
            raise ValueError("upper bounds must exceed lower bounds")
        if self.eps <= 0.0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if (self.cap_indices is None) != (self.cap_total is None):
            raise ValueError("cap_indices and cap_total must be given together")
        if self.cap_indices is not None:
            i, j = self.cap_indices
            if i == j or not (0 <= i < lo.size and 0 <= j < lo.size):
                raise ValueError(f"invalid cap indices {self.cap_indices}")
            c = float(self.cap_total)
            if lo[i] + lo[j] >= c:
                raise ValueError("sum cap leaves no feasible slack above the lower bounds")
            # The simplex transform covers {x_i > lo_i, x_j > lo_j, x_i+x_j < cap};
            # individual upper bounds must not cut into that set.
            if hi[i] < c - lo[j] or hi[j] < c - lo[i]:
                raise ValueError("upper bounds on the capped pair must be redundant with the cap")
            object.__setattr__(self, "cap_indices", (int(i), int(j)))
            object.__setattr__(self, "cap_total", c)
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return int(self.lower.size)

    @classmethod
    def setpar_default(cls, eps: float = 1e-3, d_max: float = 100.0) -> "FeasibleRegion":
        """Region for (d1, a1, b1, d2, a2, b2): positive box, a2 + b2 capped."""
        lo = np.full(6, eps)
        hi = np.array([d_max, 1.0 - eps, 1.0 - eps, d_max, 1.0 - eps, 1.0 - eps])
        return cls(lower=lo, upper=hi, cap_indices=(4, 5), cap_total=1.0 - eps, eps=eps)

    @classmethod
    def par_default(cls, eps: float = 1e-3, d_max: float = 100.0) -> "FeasibleRegion":
        """Region for (d, a, b) with a + b capped."""
        lo = np.full(3, eps)
        hi = np.array([d_max, 1.0 - eps, 1.0 - eps])
        return cls(lower=lo, upper=hi, cap_indices=(1, 2), cap_total=1.0 - eps, eps=eps)

    def drop_last(self) -> "FeasibleRegion":
        """Region with the final coordinate removed (used to pin b2)."""
        if self.cap_indices is not None and (self.dim - 1) in self.cap_indices:
            other = [k for k in self.cap_indices if k != self.dim - 1][0]
            lo = self.lower[:-1].copy()
            hi = self.upper[:-1].copy()
            # With the partner pinned at zero the cap reduces to a box bound.
            hi[other] = min(hi[other], float(self.cap_total))
            return FeasibleRegion(lower=lo, upper=hi, eps=self.eps)
        return FeasibleRegion(
            lower=self.lower[:-1],
            upper=self.upper[:-1],
            cap_indices=self.cap_indices,
            cap_total=self.cap_total,
            eps=self.eps,
        )

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.lower.shape:
            return False
        if np.any(x < self.lower - tol) or np.any(x > self.upper + tol):
            return False
        if self.cap_indices is not None:
            i, j = self.cap_indices
            if x[i] + x[j] > self.cap_total + tol:
                return False
        return True

    def project(self, x: np.ndarray) -> np.ndarray:
        """Exact Euclidean projection onto the region."""
        x = np.asarray(x, dtype=np.float64)
        p = np.clip(x, self.lower, self.upper)
        if self.cap_indices is not None:
            i, j = self.cap_indices
            c = self.cap_total
            if p[i] + p[j] > c:
                # Projection onto the segment {u + v = c} within the box:
                # project the original pair onto the line, then clip along it.
                u = 0.5 * (x[i] - x[j] + c)
                u_min = max(self.lower[i], c - self.upper[j])
                u_max = min(self.upper[i], c - self.lower[j])
                u = min(max(u, u_min), u_max)
                p[i] = u
                p[j] = c - u
        return p

    def projected_gradient_norm(self, x: np.ndarray, grad: np.ndarray) -> float:
        """First-order ascent measure ||P(x + g) - x||_inf; zero at a KKT point."""
        return float(np.max(np.abs(self.project(x + grad) - x)))

    def active_constraints(self, x: np.ndarray, tol: float = 1e-6) -> tuple[str, ...]:
        out: list[str] = []
        for k in range(self.dim):
            scale = 1.0 + abs(self.lower[k]) + abs(self.upper[k])
            if x[k] - self.lower[k] <= tol * scale:
                out.append(f"x{k}:lower")
            elif self.upper[k] - x[k] <= tol * scale:
                out.append(f"x{k}:upper")
        if self.cap_indices is not None:
            i, j = self.cap_indices
            if self.cap_total - (x[i] + x[j]) <= tol * (1.0 + abs(self.cap_total)):
                out.append("sum_cap")
        return tuple(out)


@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray
    value: float
    grad_inf_norm: float
    iterations: int
    converged: bool
    active_set: tuple[str, ...]
    n_evals: int


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class _Transform:
    """Smooth bijection from R^k onto the open interior of a FeasibleRegion."""

    def __init__(self, region: FeasibleRegion):
        self.region = region
        self.box_idx = np.array(
            [k for k in range(region.dim) if region.cap_indices is None or k not in region.cap_indices],
            dtype=np.int64,
        )

    def to_x(self, z: np.ndarray) -> np.ndarray:
        reg = self.region
        x = np.empty(reg.dim)
        bi = self.box_idx
        s = _sigmoid(z[bi])
        x[bi] = reg.lower[bi] + (reg.upper[bi] - reg.lower[bi]) * s
        if reg.cap_indices is not None:
            i, j = reg.cap_indices
            wi, wj = self._simplex_weights(z[i], z[j])
            slack = reg.cap_total - reg.lower[i] - reg.lower[j]
            x[i] = reg.lower[i] + slack * wi
            x[j] = reg.lower[j] + slack * wj
        return x

    def pull_gradient(self, z: np.ndarray, grad_x: np.ndarray) -> np.ndarray:
        """Chain rule: gradient with respect to z given the x-space gradient."""
        reg = self.region
        gz = np.empty(reg.dim)
        bi = self.box_idx
        s = _sigmoid(z[bi])
        gz[bi] = grad_x[bi] * (reg.upper[bi] - reg.lower[bi]) * s * (1.0 - s)
        if reg.cap_indices is not None:
            i, j = reg.cap_indices
            wi, wj = self._simplex_weights(z[i], z[j])
            slack = reg.cap_total - reg.lower[i] - reg.lower[j]
            gz[i] = slack * (wi * (1.0 - wi) * grad_x[i] - wi * wj * grad_x[j])
            gz[j] = slack * (wj * (1.0 - wj) * grad_x[j] - wi * wj * grad_x[i])
        return gz

    def to_z(self, x: np.ndarray) -> np.ndarray:
        """Inverse map; the point is first nudged strictly inside the region."""
        reg = self.region
        margin = 1e-10
        z = np.empty(reg.dim)
        bi = self.box_idx
        width = reg.upper[bi] - reg.lower[bi]
        frac = (x[bi] - reg.lower[bi]) / width
        frac = np.clip(frac, margin, 1.0 - margin)
        z[bi] = np.log(frac) - np.log1p(-frac)
        if reg.cap_indices is not None:
            i, j = reg.cap_indices
            slack = reg.cap_total - reg.lower[i] - reg.lower[j]
            wi = max((x[i] - reg.lower[i]) / slack, margin)
            wj = max((x[j] - reg.lower[j]) / slack, margin)
            total = wi + wj
            if total > 1.0 - margin:
                shrink = (1.0 - margin) / total
                wi *= shrink
                wj *= shrink
            w0 = 1.0 - wi - wj
            z[i] = np.log(wi) - np.log(w0)
            z[j] = np.log(wj) - np.log(w0)
        return z

    @staticmethod
    def _simplex_weights(zi: float, zj: float) -> tuple[float, float]:
        m = max(0.0, zi, zj)
        e0 = np.exp(-m)
        ei = np.exp(zi - m)
        ej = np.exp(zj - m)
        denom = e0 + ei + ej
        return ei / denom, ej / denom


def maximize(
    objective,
    region: FeasibleRegion,
    start,
    tol: float = 1e-8,
    max_iter: int = 500,
) -> OptimResult:
    """Maximize a smooth objective with analytic gradient over ``region``.

    ``objective`` maps a feasible point to ``(value, gradient)``.  Returns a
    point whose projected-gradient infinity norm is below ``tol`` with
    ``converged=True``, or the best point found within ``max_iter`` iterations
    with ``converged=False``.  Deterministic: identical inputs give identical
    results.  Every point at which the objective is evaluated lies in the
    region.
    """
    x0 = np.asarray(start, dtype=np.float64)
    if not region.contains(x0):
        raise InfeasibleStartError(f"start point {x0!r} is outside the feasible region")

    evals = [0]

    def _eval(x: np.ndarray) -> tuple[float, np.ndarray]:
        evals[0] += 1
        value, grad = objective(x)
        grad = np.asarray(grad, dtype=np.float64)
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            raise NumericObjectiveError(
                f"objective returned a non-finite value at x={x!r}", point=x.copy()
            )
        return float(value), grad

    transform = _Transform(region)

    cache: dict = {}

    def fun_z(z: np.ndarray):
        x = transform.to_x(z)
        value, grad = _eval(x)
        cache["x"] = x
        cache["value"] = value
        cache["grad"] = grad
        return -value, -transform.pull_gradient(z, grad)

    z0 = transform.to_z(x0)
    res = _scipy_minimize(
        fun_z,
        z0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": min(max_iter, 100), "ftol": 1e-13, "gtol": 1e-10, "maxls": 40},
    )
    iterations = int(res.nit)
    x = transform.to_x(np.asarray(res.x, dtype=np.float64))
    value, grad = _eval(x)

    x, value, grad, iterations = _projected_bfgs_polish(
        _eval, region, x, value, grad, tol, max_iter, iterations
    )

    pg = region.projected_gradient_norm(x, grad)
    return OptimResult(
        x=x,
        value=value,
        grad_inf_norm=pg,
        iterations=iterations,
        converged=bool(pg <= tol),
        active_set=region.active_constraints(x),
        n_evals=evals[0],
    )


def _projected_bfgs_polish(evaluate, region, x, value, grad, tol, max_iter, iterations):
    """Feasible quasi-Newton polish in the original coordinates.

    Certifies the first-order condition and snaps boundary solutions exactly
    onto their bounds.  Near the optimum the objective increments fall far
    below the rounding noise of the objective itself, so acceptance is driven
    by the projected-gradient norm (nonmonotone over a short window) with the
    Armijo test applied only while the predicted gain is still measurable.
    Returns the best-certified point seen.
    """

    def pg_norm(point, gradient):
        return float(np.max(np.abs(region.project(point + gradient) - point)))

    def outward_active(point, gradient):
        scale = 1e-14 * (1.0 + np.abs(region.lower) + np.abs(region.upper))
        at_lower = point - region.lower <= scale
        at_upper = region.upper - point <= scale
        return (at_lower & (gradient < 0.0)) | (at_upper & (gradient > 0.0))

    dim = x.size
    H: np.ndarray | None = None
    pg = pg_norm(x, grad)
    recent = [pg]
    best = (pg, x, value, grad)
    mask = outward_active(x, grad)
    fallback_grad_dir = False
    stall = 0
    while pg > tol and iterations < max_iter and stall < 25:
        iterations += 1
        g_eff = np.where(mask, 0.0, grad)
        if not np.any(g_eff):
            break
        if H is not None and not fallback_grad_dir:
            d = H @ g_eff
            d[mask] = 0.0
            if float(d @ g_eff) <= 1e-14 * float(np.linalg.norm(d)) * float(np.linalg.norm(g_eff)):
                d = g_eff / (1.0 + float(np.max(np.abs(g_eff))))
        else:
            d = g_eff / (1.0 + float(np.max(np.abs(g_eff))))
        noise = 32.0 * np.finfo(float).eps * (1.0 + abs(value))
        accepted = False
        step = 1.0
        for _ in range(30):
            cand = region.project(x + step * d)
            move = cand - x
            if not np.any(move):
                break
            pred = float(grad @ move)
            cand_value, cand_grad = evaluate(cand)
            cand_pg = pg_norm(cand, cand_grad)
            armijo = pred > 0.0 and (cand_value - value) >= _ARMIJO_SLOPE * pred - noise
            residual_drop = cand_pg <= 0.9999 * max(recent)
            if (armijo or residual_drop) and cand_pg <= 1e3 * best[0]:
                cand_mask = outward_active(cand, cand_grad)
                if np.array_equal(cand_mask, mask) and not np.any(move[mask]):
                    # Curvature pair lies in the free subspace; safe to update.
                    s = move
                    yv = g_eff - np.where(mask, 0.0, cand_grad)
                    sy = float(s @ yv)
                    if sy > 1e-14 * math.sqrt(float(s @ s) * float(yv @ yv)):
                        if H is None:
                            H = (sy / float(yv @ yv)) * np.eye(dim)
                        rho = 1.0 / sy
                        Hy = H @ yv
                        H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s)) + (
                            rho * rho * float(yv @ Hy) + rho
                        ) * np.outer(s, s)
                else:
                    H = None
                mask = cand_mask
                x, value, grad, pg = cand, cand_value, cand_grad, cand_pg
                recent.append(pg)
                if len(recent) > 8:
                    recent.pop(0)
                if pg < 0.99 * best[0]:
                    stall = 0
                else:
                    stall += 1
                if pg < best[0]:
                    best = (pg, x, value, grad)
                accepted = True
                fallback_grad_dir = False
                break
            step *= _ARMIJO_SHRINK
        if not accepted:
            if fallback_grad_dir or H is None:
                break
            # Quasi-Newton direction failed; retry once along the gradient.
            fallback_grad_dir = True
    _, x, value, grad = best
    return x, value, grad, iterations
