"""Coordinate toolbox: logistic transform, scale function, residual
decomposition, and the backward/forward path-transform formulas.

In the logistic coordinate ``Y = logit(pi)`` the filter has constant
volatility ``sqrt(gamma)``, and the damping rate becomes
``a(pi) = lam*(1-p)*e^Y + lam*p*e^-Y``.  Writing ``A_t = Y_t - log(lam*p)``
and splitting the drift into a Brownian-plus-residual part ``b`` turns the
dynamics into

    dA_t = db_t + e^{-A_t} dt,

which integrates in closed form both ways (``A_{s,t} = A_t - A_s``):

    backward:  A_{s,t} = b_{s,t} - log(1 - e^{-A_t} * int_s^t e^{b_{u,t}} du)
    forward:   A_{s,t} = b_{s,t} + log(1 + e^{-A_s} * int_s^t e^{-b_{s,u}} du)

The inner integrals are guarded in log space since ``b`` carries the
``sqrt(gamma) W - gamma t / 2`` part and can swing by O(log gamma) over a
window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad
from scipy.special import expit as _expit, logit as _logit

from .config import ExperimentConfig
from .errors import DomainError, QuadratureError, SingularWindowError
from .filtering import FilterPath
from .model import SamplePath

__all__ = [
    "logit",
    "logistic",
    "scale_g",
    "scale_h",
    "ResidualDecomposition",
    "residual_decompose",
    "backward_transform",
    "forward_transform",
]


def logit(x):
    """log(x / (1 - x)) for x in (0, 1); scalar or array."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("logit needs arguments strictly inside (0, 1)")
    out = _logit(arr)
    return float(out) if np.isscalar(x) else out


def logistic(y):
    """Inverse of logit: 1 / (1 + e^-y); scalar or array."""
    out = _expit(np.asarray(y, dtype=float))
    return float(out) if np.isscalar(y) else out


def scale_g(x, p: float):
    """Exponent profile of the scale function:

    g(y) = p*(1/y + log((1-y)/y)) + (1-p)*(1/(1-y) + log(y/(1-y))).
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must be in (0, 1), got {p}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("scale_g needs arguments strictly inside (0, 1)")
    ratio = np.log((1.0 - arr) / arr)
    out = p * (1.0 / arr + ratio) + (1.0 - p) * (1.0 / (1.0 - arr) - ratio)
    return float(out) if np.isscalar(x) else out


_SCALE_H_TOL = 1e-9


def scale_h(x: float, config: ExperimentConfig, x0: float = 0.5) -> float:
    """Scale function ``h(x) = x0 + int_{x0}^x exp((2 lam / gamma) g(y)) dy``.

    Adaptive quadrature to absolute tolerance 1e-9; ``x0`` is the free base
    point (the function is only canonical up to affine maps).
    """
    for name, val in (("x", x), ("x0", x0)):
        if not 0.0 < val < 1.0:
            raise DomainError(f"{name} must be in (0, 1), got {val}")
    scale = 2.0 * config.lam / config.gamma
    p = config.p

    def integrand(y: float) -> float:
        return math.exp(scale * scale_g(y, p))

    value, abserr = quad(integrand, x0, x, epsabs=_SCALE_H_TOL, epsrel=_SCALE_H_TOL, limit=200)
    if abserr > 100 * _SCALE_H_TOL * max(1.0, abs(value)):
        raise QuadratureError(
            f"scale_h quadrature did not converge (abserr {abserr:.2e})"
        )
    return x0 + value


@dataclass(frozen=True)
class ResidualDecomposition:
    """Paths (A, b, r) of the shifted-logit decomposition dA = db + e^-A dt."""

    a_path: SamplePath
    b_path: SamplePath
    r_path: SamplePath


def residual_decompose(filt: FilterPath, config: ExperimentConfig) -> ResidualDecomposition:
    """Decompose a filter path into ``A = Y - log(lam p)``, residual ``r``, and ``b``.

    ``r`` is the cumulative trapezoid of
    ``lam*(2p-1) - lam*(1-p)*e^Y + (gamma/2)*(1 + tanh(Y/2))``, where the last
    factor is evaluated as ``2*pi`` (algebraically ``1 + tanh(Y/2) = 2 pi``).
    ``b`` collects the remaining ``sqrt(gamma) W - (gamma/2) t + r`` part,
    recovered grid-consistently from ``b = (A - A_0) - cumint e^{-A}``.
    """
    y = filt.y_logit.values
    grid = filt.y_logit.grid
    lam, p, gamma = config.lam, config.p, config.gamma
    a = y - math.log(lam * p)
    exp_neg_a = lam * p * np.exp(-y)
    r_integrand = lam * (2.0 * p - 1.0) - lam * (1.0 - p) * np.exp(y) + gamma * _expit(y)
    r = cumulative_trapezoid(r_integrand, dx=grid.dt, initial=0.0)
    b = (a - a[0]) - cumulative_trapezoid(exp_neg_a, dx=grid.dt, initial=0.0)
    return ResidualDecomposition(
        a_path=SamplePath(grid, a),
        b_path=SamplePath(grid, b),
        r_path=SamplePath(grid, r),
    )


def _window_indices(path: SamplePath, s: float, t: float) -> tuple[int, int]:
    i = path.grid.index_of(s)
    j = path.grid.index_of(t)
    if j < i:
        raise DomainError(f"need s <= t, got s={s}, t={t}")
    return i, j


def backward_transform(b: SamplePath, a_terminal: float, s: float, t: float) -> float:
    """Increment ``A_t - A_s`` from the terminal value ``A_t`` and ``b`` on [s, t].

    Raises :class:`SingularWindowError` when the logarithm argument
    ``1 - e^{-A_t} int_s^t e^{b_{u,t}} du`` is not positive.
    """
    i, j = _window_indices(b, s, t)
    if j == i:
        return 0.0
    b_ut = b.values[j] - b.values[i : j + 1]
    m = b_ut.max()
    integral = np.trapezoid(np.exp(b_ut - m), dx=b.grid.dt)
    log_arg = m + math.log(integral) - a_terminal
    if log_arg >= 0.0:
        raise SingularWindowError(
            f"backward transform window [{s}, {t}] is singular "
            f"(log argument exponent {log_arg:.3e} >= 0)"
        )
    return float(b.values[j] - b.values[i] - math.log1p(-math.exp(log_arg)))


def forward_transform(b: SamplePath, a_initial: float, s: float, t: float) -> float:
    """Increment ``A_t - A_s`` from the initial value ``A_s`` and ``b`` on [s, t].

    The logarithm argument ``1 + e^{-A_s} int_s^t e^{-b_{s,u}} du`` exceeds 1,
    so this direction has no singularity.
    """
    i, j = _window_indices(b, s, t)
    if j == i:
        return 0.0
    b_su = b.values[i : j + 1] - b.values[i]
    m = (-b_su).max()
    integral = np.trapezoid(np.exp(-b_su - m), dx=b.grid.dt)
    log_term = np.logaddexp(0.0, m + math.log(integral) - a_initial)
    return float(b.values[j] - b.values[i] + log_term)
