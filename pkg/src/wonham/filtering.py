"""Twin integrators for the filter SDE.

Substituting the innovation ``dW = sqrt(gamma) * (dy - pi dt)`` into the
filter SDE gives the observation-driven update

    dpi = -lam * (pi - p) * dt + gamma * pi * (1 - pi) * (dy - pi * dt),

integrated by Euler-Maruyama either directly in probability space or in the
logistic coordinate ``Y = log(pi / (1 - pi))``, where the volatility is the
constant ``sqrt(gamma)`` and the update reads

    dY = gamma * (dy - dt/2) + (lam*(2p - 1) + lam*p*e^-Y - lam*(1-p)*e^Y) dt.

The logistic integrator is primary: the strong-noise regime parks ``pi``
exponentially close to the boundary, where probability-space Euler needs
clamping.  The probability-space integrator is kept as its cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit as _logit

from . import _kernels
from .config import ExperimentConfig
from .errors import DomainError, GridMismatchError, IntegrationError
from .model import SamplePath
from .observation import ObservationIncrements

__all__ = [
    "FilterPath",
    "integrate_filter_pi",
    "integrate_filter_logistic",
    "innovation_increments",
    "DEFAULT_CLAMP_EPS",
    "DEFAULT_Y_MAX",
]

DEFAULT_CLAMP_EPS = 1e-12
DEFAULT_Y_MAX = 500.0


@dataclass(frozen=True)
class FilterPath:
    """Filter trajectory in both coordinates plus the boundary-clamp count."""

    pi: SamplePath
    y_logit: SamplePath
    clamp_events: int


def _check_pi0(pi0: float | None, config: ExperimentConfig) -> float:
    if pi0 is None:
        pi0 = config.p  # stationary guess
    if not 0.0 < pi0 < 1.0:
        raise DomainError(f"pi0 must be in (0, 1), got {pi0}")
    return float(pi0)


def integrate_filter_pi(
    dy: ObservationIncrements,
    config: ExperimentConfig,
    pi0: float | None = None,
    clamp_eps: float = DEFAULT_CLAMP_EPS,
    gamma: float | None = None,
    scheme: str = "euler",
) -> FilterPath:
    """Probability-space Euler path, clamped to ``[clamp_eps, 1 - clamp_eps]``.

    ``gamma`` overrides the configured noise scale (``gamma=0`` is the
    noise-free ODE test hook: dpi = -lam*(pi - p)*dt regardless of dy).
    ``scheme="milstein"`` adds the multiplicative-noise correction term.
    """
    pi0 = _check_pi0(pi0, config)
    if scheme not in ("euler", "milstein"):
        raise DomainError(f"scheme must be 'euler' or 'milstein', got {scheme!r}")
    g = config.gamma if gamma is None else float(gamma)
    pi, clamps, bad = _kernels.euler_filter_pi(
        dy.dy, dy.grid.dt, config.lam, config.p, g, pi0, clamp_eps, scheme == "milstein"
    )
    if bad >= 0:
        raise IntegrationError("probability-space integration diverged", bad)
    return FilterPath(
        pi=SamplePath(dy.grid, pi),
        y_logit=SamplePath(dy.grid, _logit(pi)),
        clamp_events=int(clamps),
    )


def integrate_filter_logistic(
    dy: ObservationIncrements,
    config: ExperimentConfig,
    pi0: float | None = None,
    y_max: float = DEFAULT_Y_MAX,
) -> FilterPath:
    """Logistic-coordinate Euler path; no clamping, ``|Y|`` capped at ``y_max``."""
    pi0 = _check_pi0(pi0, config)
    y0 = float(_logit(pi0))
    y, bad = _kernels.euler_filter_logistic(
        dy.dy, dy.grid.dt, config.lam, config.p, config.gamma, y0, y_max
    )
    if bad >= 0:
        raise IntegrationError("logistic integration diverged", bad)
    return FilterPath(
        pi=SamplePath(dy.grid, expit(y)),
        y_logit=SamplePath(dy.grid, y),
        clamp_events=0,
    )


def innovation_increments(
    dy: ObservationIncrements, pi: SamplePath, config: ExperimentConfig
) -> np.ndarray:
    """Innovation increments ``dW_k = sqrt(gamma) * (dy_k - pi_k * dt)``.

    Uses the left-endpoint filter value (Ito convention); the cumulative sum
    is a standard Brownian motion in the observation filtration.
    """
    if not dy.grid.same_as(pi.grid):
        raise GridMismatchError("observation and filter paths are on different grids")
    return np.sqrt(config.gamma) * (dy.dy - pi.values[:-1] * dy.grid.dt)
