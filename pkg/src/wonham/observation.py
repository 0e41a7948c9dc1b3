"""Synthesis of the observation process as grid increments.

The observation accumulates drift equal to the hidden state plus Brownian
noise of standard deviation ``gamma**-0.5``:

    dy_k = x_{t_k} * dt + gamma**-0.5 * dB_k,      dB_k ~ Normal(0, dt)

Increments, not levels, are the stored representation: the filter consumes
increments only, and levels are reconstructed by prefix sum solely for
plotting, which avoids cancellation at large gamma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, STREAM_NOISE
from .errors import DomainError
from .model import JumpPath, TimeGrid

__all__ = ["ObservationIncrements", "simulate_observation"]


@dataclass(frozen=True)
class ObservationIncrements:
    """Grid increments ``dy`` (length ``n``) of the observation process."""

    grid: TimeGrid
    dy: np.ndarray

    def __post_init__(self):
        dy = np.asarray(self.dy, dtype=float)
        object.__setattr__(self, "dy", dy)
        if dy.shape != (self.grid.n,):
            raise DomainError(f"dy shape {dy.shape} does not match grid steps {self.grid.n}")
        if not np.all(np.isfinite(dy)):
            raise DomainError("dy must be finite")
        dy.flags.writeable = False

    def levels(self) -> np.ndarray:
        """Observation levels ``y_{t_k}`` with ``y_0 = 0`` (length ``n + 1``)."""
        out = np.empty(self.grid.n + 1)
        out[0] = 0.0
        np.cumsum(self.dy, out=out[1:])
        return out


def simulate_observation(
    path: JumpPath,
    config: ExperimentConfig,
    grid: TimeGrid,
    rng: np.random.Generator | None = None,
    noise_scale: float | None = None,
) -> ObservationIncrements:
    """Observation increments along one hidden trajectory.

    The drift uses the left-endpoint (cadlag, Ito) state.  ``noise_scale``
    overrides ``gamma**-0.5``; passing 0 is the noiseless test hook giving
    ``dy_k = x_{t_k} * dt`` exactly.
    """
    if grid.t0 < 0 or grid.end > path.horizon * (1 + 1e-12):
        raise DomainError("grid must lie within [0, horizon] of the jump path")
    if rng is None:
        rng = config.streams().stream(STREAM_NOISE)
    if noise_scale is None:
        noise_scale = config.gamma ** -0.5
    x_left = path.states_at(grid.times()[:-1]).astype(float)
    dy = x_left * grid.dt
    if noise_scale != 0.0:
        dy = dy + noise_scale * rng.normal(0.0, np.sqrt(grid.dt), grid.n)
    return ObservationIncrements(grid, dy)
