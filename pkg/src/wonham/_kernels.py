"""Numba kernels for the sequential inner loops.

Everything here is scalar float64 arithmetic with fixed evaluation order
(no fastmath, no parallel reductions), so results are bit-reproducible and
``nogil`` lets replicas run on threads.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_OPTS = dict(cache=True, nogil=True)


@njit(**_OPTS)
def euler_filter_pi(dy, dt, lam, p, gamma, pi0, clamp_eps, milstein):
    """Euler-Maruyama for dpi = -lam*(pi - p)*dt + gamma*pi*(1-pi)*(dy - pi*dt).

    With ``milstein`` the multiplicative-noise correction
    (gamma/2)*pi*(1-pi)*(1-2 pi)*(dW^2 - dt), dW = sqrt(gamma)*(dy - pi dt),
    is added.  Returns (pi path, clamp count, first bad step or -1).
    """
    n = dy.shape[0]
    pi = np.empty(n + 1)
    pi[0] = pi0
    clamps = 0
    x = pi0
    for k in range(n):
        innov = dy[k] - x * dt
        step = (-lam * (x - p)) * dt + gamma * x * (1.0 - x) * innov
        if milstein:
            dw2 = gamma * innov * innov
            step += 0.5 * gamma * x * (1.0 - x) * (1.0 - 2.0 * x) * (dw2 - dt)
        x = x + step
        if not np.isfinite(x):
            pi[k + 1] = x
            return pi, clamps, k
        if x < clamp_eps:
            x = clamp_eps
            clamps += 1
        elif x > 1.0 - clamp_eps:
            x = 1.0 - clamp_eps
            clamps += 1
        pi[k + 1] = x
    return pi, clamps, -1


@njit(**_OPTS)
def euler_filter_logistic(dy, dt, lam, p, gamma, y0, y_max):
    """Euler step of dY = gamma*(dy - dt/2) + (lam*(2p-1) + lam*p*e^-Y - lam*(1-p)*e^Y)*dt.

    |Y| is capped at y_max.  Returns (Y path, first bad step or -1).
    """
    n = dy.shape[0]
    y = np.empty(n + 1)
    y[0] = y0
    v = y0
    c0 = lam * (2.0 * p - 1.0)
    cm = lam * p
    cp = lam * (1.0 - p)
    for k in range(n):
        v = v + gamma * (dy[k] - 0.5 * dt) + (c0 + cm * math.exp(-v) - cp * math.exp(v)) * dt
        if not np.isfinite(v):
            y[k + 1] = v
            return y, k
        if v > y_max:
            v = y_max
        elif v < -y_max:
            v = -y_max
        y[k + 1] = v
    return y, -1


@njit(**_OPTS)
def prefix_trapezoid(values, dt):
    """Cumulative trapezoid integral with Kahan compensation (length n+1)."""
    n = values.shape[0] - 1
    out = np.empty(n + 1)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    for k in range(n):
        term = 0.5 * dt * (values[k] + values[k + 1]) - c
        t = s + term
        c = (t - s) - term
        s = t
        out[k + 1] = s
    return out


@njit(**_OPTS)
def window_exp_integral(f, step_a, w, dt, exact_decay):
    """Trailing-window integrals of f_u * exp(-int_s^u a) with s = max(t - w*dt, 0).

    ``step_a[k]`` is the trapezoid increment of a on step k.  Returns
    (corr, decay) where corr[t] approximates int_s^t f_u e^{-(A_u - A_s)} du
    and decay[t] = exp(-(A_t - A_s)) as the product of per-step factors.

    With ``exact_decay`` each step contributes
    r_k * (1 - e^{-z_k}) * (f_k + f_{k+1}) * dt / (2 z_k); the k-sum then obeys
    corr <= (1 - decay) * max(f/a) exactly, so probabilities stay in [0, 1].
    Without it, the contribution is the plain trapezoid of the sampled
    integrand, which overshoots by O((a dt)^2) once the window damps hard.
    """
    n = step_a.shape[0]
    corr = np.zeros(n + 1)
    decay = np.ones(n + 1)
    d = np.empty(n)
    g = np.empty(n)
    for k in range(n):
        z = step_a[k]
        d[k] = math.exp(-z)
        if z > 1e-12:
            g[k] = -math.expm1(-z) / z
        else:
            g[k] = 1.0
    for t in range(1, n + 1):
        s = t - w if t >= w else 0
        r = 1.0
        acc = 0.0
        if exact_decay:
            for k in range(s, t):
                acc += r * g[k] * 0.5 * dt * (f[k] + f[k + 1])
                r *= d[k]
        else:
            for k in range(s, t):
                rn = r * d[k]
                acc += 0.5 * dt * (f[k] * r + f[k + 1] * rn)
                r = rn
        corr[t] = acc
        decay[t] = r
    return corr, decay


@njit(**_OPTS)
def span_exp_integral(f, step_a, i, j, dt, exact_decay):
    """Single-window version of window_exp_integral over steps [i, j)."""
    r = 1.0
    acc = 0.0
    for k in range(i, j):
        z = step_a[k]
        dk = math.exp(-z)
        if exact_decay:
            if z > 1e-12:
                gk = -math.expm1(-z) / z
            else:
                gk = 1.0
            acc += r * gk * 0.5 * dt * (f[k] + f[k + 1])
            r *= dk
        else:
            rn = r * dk
            acc += 0.5 * dt * (f[k] * r + f[k + 1] * rn)
            r = rn
    return acc, r


@njit(**_OPTS)
def smooth_backward_rk4(pi, a, f, w, dt):
    """RK4 integration, backward in s over the trailing window, of

        d/ds P(s) = -f(s) + P(s) * a(s),      P(t) = pi[t],

    with a and f linearly interpolated at half steps.  Returns P(max(t-w*dt,0))
    for every t.
    """
    n = pi.shape[0] - 1
    out = np.empty(n + 1)
    h = -dt
    for t in range(n + 1):
        s0 = t - w if t >= w else 0
        P = pi[t]
        for k in range(t, s0, -1):
            a1 = a[k]
            f1 = f[k]
            a0 = a[k - 1]
            f0 = f[k - 1]
            am = 0.5 * (a1 + a0)
            fm = 0.5 * (f1 + f0)
            k1 = -f1 + P * a1
            k2 = -fm + (P + 0.5 * h * k1) * am
            k3 = -fm + (P + 0.5 * h * k2) * am
            k4 = -f0 + (P + h * k3) * a0
            P = P + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[t] = P
    return out


@njit(**_OPTS)
def excursion_scan(values, eps):
    """Alternating stopping-time scan.

    Starting outside the band, record T at the first index with
    eps <= v <= 1-eps, then S at the first later index with v <= eps/2 or
    v >= 1-eps/2, and repeat.  Returns index arrays of completed [T, S] pairs.
    """
    n = values.shape[0]
    t_idx = np.empty(n, dtype=np.int64)
    s_idx = np.empty(n, dtype=np.int64)
    m = 0
    inside = False
    half = 0.5 * eps
    for k in range(n):
        v = values[k]
        if not inside:
            if eps <= v <= 1.0 - eps:
                t_idx[m] = k
                inside = True
        else:
            if v <= half or v >= 1.0 - half:
                s_idx[m] = k
                m += 1
                inside = False
    return t_idx[:m].copy(), s_idx[:m].copy()
