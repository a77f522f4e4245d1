"""Independent reference computations used as test oracles.

These deliberately avoid the package's compiled code paths: the recursions
are re-implemented in plain Python (and in arbitrary precision via mpmath)
so that agreement with the package is a genuine cross-check.
"""

from __future__ import annotations

import numpy as np
from mpmath import mp, mpf


def intensity_path_python(y, r, theta, lam_init):
    """Plain-Python intensity recursion."""
    d1, a1, b1, d2, a2, b2 = [float(v) for v in theta]
    lam = [float(lam_init)]
    for t in range(1, len(y)):
        yp = int(y[t - 1])
        prev = lam[-1]
        if yp <= r:
            lam.append(d1 + a1 * prev + b1 * yp)
        else:
            lam.append(d2 + a2 * prev + b2 * yp)
    return np.array(lam)


def loglik_python(y, r, theta, lam_init):
    lam = intensity_path_python(y, r, theta, lam_init)
    return float(np.sum(-lam + np.asarray(y) * np.log(lam)))


def loglik_mp(y, r, theta, lam_init, dps=50):
    """Log-likelihood recomputed in arbitrary-precision arithmetic."""
    with mp.workdps(dps):
        d1, a1, b1, d2, a2, b2 = [mpf(repr(float(v))) for v in theta]
        lam = mpf(repr(float(lam_init)))
        total = -lam + int(y[0]) * mp.log(lam)
        for t in range(1, len(y)):
            yp = int(y[t - 1])
            if yp <= r:
                lam = d1 + a1 * lam + b1 * yp
            else:
                lam = d2 + a2 * lam + b2 * yp
            total += -lam + int(y[t]) * mp.log(lam)
        return total


def score_fd(y, r, theta, lam_init, h=1e-6, small_threshold=None):
    """Central finite differences of the log-likelihood.

    Components whose float64 difference quotient is too small to be trusted
    (cancellation noise of a |loglik| ~ 1e3 objective) are recomputed in
    arbitrary precision, keeping the check strict for every component.
    """
    theta = np.asarray(theta, dtype=float)
    out = np.empty(6)
    for j in range(6):
        tp = theta.copy()
        tm = theta.copy()
        tp[j] += h
        tm[j] -= h
        out[j] = (loglik_python(y, r, tp, lam_init) - loglik_python(y, r, tm, lam_init)) / (2 * h)
    if small_threshold is None:
        small_threshold = 0.01 * max(np.max(np.abs(out)), 1.0)
    for j in range(6):
        if abs(out[j]) < small_threshold:
            tp = theta.copy()
            tm = theta.copy()
            tp[j] += h
            tm[j] -= h
            diff = loglik_mp(y, r, tp, lam_init) - loglik_mp(y, r, tm, lam_init)
            out[j] = float(diff / (2 * mpf(repr(h))))
    return out


def quantile_type1(values, alpha):
    """Inverse of the empirical CDF, enumerated directly."""
    xs = sorted(values)
    n = len(xs)
    for x in xs:
        if sum(1 for v in xs if v <= x) >= alpha * n:
            return x
    return xs[-1]


def acf_direct(x, max_lag):
    """Textbook sample ACF with 1/n-normalized autocovariances."""
    x = np.asarray(x, dtype=float)
    n = x.size
    xbar = x.mean()
    c0 = np.sum((x - xbar) ** 2) / n
    out = [1.0]
    for h in range(1, max_lag + 1):
        ch = np.sum((x[: n - h] - xbar) * (x[h:] - xbar)) / n
        out.append(ch / c0)
    return np.array(out)


def draw_feasible_theta(rng, explosive_lower_ok=True):
    """Random parameter vector inside the assumption region.

    d_i positive, a1 < 1, b1 < 1, a2 + b2 < 1; the lower regime may be
    explosive in the a1 + b1 > 1 sense.
    """
    d1 = rng.uniform(0.2, 2.0)
    d2 = rng.uniform(0.2, 2.0)
    a1 = rng.uniform(0.1, 0.9)
    if explosive_lower_ok:
        b1 = rng.uniform(0.1, 0.9)
    else:
        b1 = rng.uniform(0.05, max(0.9 - a1, 0.1))
    a2 = rng.uniform(0.05, 0.85)
    b2 = rng.uniform(0.05, 0.9 - a2)
    return np.array([d1, a1, b1, d2, a2, b2])
