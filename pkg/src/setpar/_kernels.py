"""Compiled one-pass recursions for the two-regime intensity model.

Every kernel takes the raw count array ``y`` (int64), the integer threshold
``r``, the six continuous parameters ``th = (d1, a1, b1, d2, a2, b2)`` and the
initial intensity ``lam1``.  The derivative state ``dlam/dtheta`` starts at
zero, so the t = 1 term never contributes to score or information sums.

A single-regime (ordinary Poisson autoregression) evaluation is obtained by
passing ``r = NO_THRESHOLD`` with the three coefficients duplicated into both
regime slots; the upper-regime components of all outputs are then identically
zero and can be sliced away.
"""

import numpy as np
from numba import njit

NO_THRESHOLD = np.int64(2**62)


@njit(cache=True)
def intensity_recursion(y, r, th, lam1):
    n = y.shape[0]
    lam = np.empty(n, dtype=np.float64)
    lam[0] = lam1
    for t in range(1, n):
        yp = y[t - 1]
        if yp <= r:
            lam[t] = th[0] + th[1] * lam[t - 1] + th[2] * yp
        else:
            lam[t] = th[3] + th[4] * lam[t - 1] + th[5] * yp
    return lam


@njit(cache=True)
def loglik(y, r, th, lam1):
    n = y.shape[0]
    lam = lam1
    ll = -lam + y[0] * np.log(lam)
    for t in range(1, n):
        yp = y[t - 1]
        if yp <= r:
            lam = th[0] + th[1] * lam + th[2] * yp
        else:
            lam = th[3] + th[4] * lam + th[5] * yp
        ll += -lam + y[t] * np.log(lam)
    return ll


@njit(cache=True)
def loglik_score(y, r, th, lam1):
    n = y.shape[0]
    g = np.zeros(6, dtype=np.float64)
    s = np.zeros(6, dtype=np.float64)
    lam = lam1
    ll = -lam + y[0] * np.log(lam)
    for t in range(1, n):
        yp = y[t - 1]
        lp = lam
        if yp <= r:
            lam = th[0] + th[1] * lp + th[2] * yp
            a = th[1]
            base = 0
        else:
            lam = th[3] + th[4] * lp + th[5] * yp
            a = th[4]
            base = 3
        for j in range(6):
            g[j] *= a
        g[base] += 1.0
        g[base + 1] += lp
        g[base + 2] += yp
        ll += -lam + y[t] * np.log(lam)
        w = y[t] / lam - 1.0
        for j in range(6):
            s[j] += w * g[j]
    return ll, s


@njit(cache=True)
def ghat(y, r, th, lam1):
    """Sample information matrix (1/n) sum_t lam_t^-1 (dlam_t)(dlam_t)^T."""
    n = y.shape[0]
    g = np.zeros(6, dtype=np.float64)
    G = np.zeros((6, 6), dtype=np.float64)
    lam = lam1
    for t in range(1, n):
        yp = y[t - 1]
        lp = lam
        if yp <= r:
            lam = th[0] + th[1] * lp + th[2] * yp
            a = th[1]
            base = 0
        else:
            lam = th[3] + th[4] * lp + th[5] * yp
            a = th[4]
            base = 3
        for j in range(6):
            g[j] *= a
        g[base] += 1.0
        g[base + 1] += lp
        g[base + 2] += yp
        inv_lam = 1.0 / lam
        for i in range(6):
            gi = g[i] * inv_lam
            for j in range(i, 6):
                G[i, j] += gi * g[j]
    for i in range(6):
        for j in range(i + 1, 6):
            G[j, i] = G[i, j]
    return G / n


@njit(cache=True)
def observed_information(y, r, th, lam1):
    """Negative averaged Hessian of the log-likelihood at ``th``.

    Propagates the second-derivative state M_t = d^2 lam_t / dtheta dtheta^T:
    M_t = a_prev * M_{t-1} + (e_a g_{t-1}^T + g_{t-1} e_a^T) on the active
    regime's ``a`` axis, with M_1 = 0.
    """
    n = y.shape[0]
    g = np.zeros(6, dtype=np.float64)
    M = np.zeros((6, 6), dtype=np.float64)
    H = np.zeros((6, 6), dtype=np.float64)
    lam = lam1
    for t in range(1, n):
        yp = y[t - 1]
        lp = lam
        if yp <= r:
            lam = th[0] + th[1] * lp + th[2] * yp
            a = th[1]
            base = 0
        else:
            lam = th[3] + th[4] * lp + th[5] * yp
            a = th[4]
            base = 3
        ia = base + 1
        for i in range(6):
            for j in range(6):
                M[i, j] *= a
        for j in range(6):
            M[ia, j] += g[j]
            M[j, ia] += g[j]
        for j in range(6):
            g[j] *= a
        g[base] += 1.0
        g[base + 1] += lp
        g[base + 2] += yp
        w = y[t] / lam - 1.0
        q = y[t] / (lam * lam)
        for i in range(6):
            for j in range(6):
                H[i, j] += w * M[i, j] - q * g[i] * g[j]
    return -H / n


@njit(cache=True)
def score_state_path(y, r, th, lam1):
    """Full (lam_t, dlam_t/dtheta) trajectory; used by diagnostics and tests."""
    n = y.shape[0]
    lam = np.empty(n, dtype=np.float64)
    grads = np.zeros((n, 6), dtype=np.float64)
    lam[0] = lam1
    for t in range(1, n):
        yp = y[t - 1]
        lp = lam[t - 1]
        if yp <= r:
            lam[t] = th[0] + th[1] * lp + th[2] * yp
            a = th[1]
            base = 0
        else:
            lam[t] = th[3] + th[4] * lp + th[5] * yp
            a = th[4]
            base = 3
        for j in range(6):
            grads[t, j] = a * grads[t - 1, j]
        grads[t, base] += 1.0
        grads[t, base + 1] += lp
        grads[t, base + 2] += yp
    return lam, grads


@njit(cache=True)
def _poisson_inverse_cdf(lam, u):
    # Sequential search from zero; adequate for the moderate intensities the
    # coupled moment check visits.  The cap guards against pathological lam.
    p = np.exp(-lam)
    cdf = p
    x = 0
    cap = int(lam + 40.0 * np.sqrt(lam) + 100.0)
    while u > cdf and x < cap:
        x += 1
        p *= lam / x
        cdf += p
    return x


@njit(cache=True)
def coupled_moment_means(u, r, th, lam_inits, powers):
    """Time-averages of lam_t^k for paths sharing one uniform innovation stream.

    Each initial intensity is advanced with counts drawn by inverting the
    Poisson law at the path's own intensity but with the shared uniforms
    ``u``, coupling the paths so that differences reflect the initial value
    only.
    """
    n = u.shape[0]
    n_init = lam_inits.shape[0]
    n_pow = powers.shape[0]
    means = np.zeros((n_init, n_pow), dtype=np.float64)
    for i in range(n_init):
        lam = lam_inits[i]
        acc = np.zeros(n_pow, dtype=np.float64)
        for t in range(n):
            for k in range(n_pow):
                acc[k] += lam ** powers[k]
            yt = _poisson_inverse_cdf(lam, u[t])
            if yt <= r:
                lam = th[0] + th[1] * lam + th[2] * yt
            else:
                lam = th[3] + th[4] * lam + th[5] * yt
        for k in range(n_pow):
            means[i, k] = acc[k] / n
    return means
