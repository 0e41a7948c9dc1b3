"""Exact sampling of the hidden two-state Markov jump process.

Rate convention: the chain leaves state 0 at rate ``lambda * p`` and state 1
at rate ``lambda * (1 - p)``, which makes ``p`` the stationary probability of
state 1 and ``-lambda * (pi - p)`` the filter drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, STREAM_CHAIN
from .errors import ConfigurationError, DomainError
from .model import JumpPath

__all__ = ["RatePair", "sample_jump_path", "stationary_law", "conditioned_no_jump_path"]


@dataclass(frozen=True)
class RatePair:
    """Jump rates ``rate01`` (out of state 0) and ``rate10`` (out of state 1)."""

    rate01: float
    rate10: float

    def __post_init__(self):
        if self.rate01 <= 0 or self.rate10 <= 0:
            raise ConfigurationError("jump rates must be > 0")

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "RatePair":
        return cls(rate01=config.lam * config.p, rate10=config.lam * (1.0 - config.p))

    @property
    def total(self) -> float:
        return self.rate01 + self.rate10

    def out_of(self, state: int) -> float:
        return self.rate01 if state == 0 else self.rate10


def _exponential(rng: np.random.Generator, rate: float) -> float:
    # inverse-CDF draw; U in [0, 1) so log1p(-U) is finite
    return -math.log1p(-rng.random()) / rate


def sample_jump_path(
    config: ExperimentConfig,
    initial: int | None = None,
    rng: np.random.Generator | None = None,
) -> JumpPath:
    """Exact trajectory on ``[0, horizon]``.

    ``initial`` is 0, 1, or None for a stationary draw (state 1 with
    probability ``p``).  Holding times are exponential with the rate of the
    current state; jump times are exact reals, never grid-projected.
    """
    rates = RatePair.from_config(config)
    if rng is None:
        rng = config.streams().stream(STREAM_CHAIN)
    if initial is None:
        initial = int(rng.random() < config.p)
    elif initial not in (0, 1):
        raise DomainError(f"initial state must be 0, 1 or None, got {initial}")
    state = initial
    t = 0.0
    jumps = []
    while True:
        t += _exponential(rng, rates.out_of(state))
        if t > config.horizon:
            break
        jumps.append(t)
        state = 1 - state
    return JumpPath(initial, np.array(jumps), config.horizon)


def stationary_law(config: ExperimentConfig) -> float:
    """Stationary probability of state 1, which is ``p`` under our convention."""
    rates = RatePair.from_config(config)
    return rates.rate01 / rates.total


def conditioned_no_jump_path(
    initial: int,
    t: float,
    config: ExperimentConfig,
    rng: np.random.Generator | None = None,
) -> JumpPath:
    """Trajectory conditioned to stay in ``initial`` on ``[0, t]``.

    The conditional law of the path given no jump before ``t`` is the constant
    path there; by lack of memory the continuation after ``t`` is ordinary
    sampling started afresh from ``initial``.
    """
    if initial not in (0, 1):
        raise DomainError(f"initial state must be 0 or 1, got {initial}")
    if not 0 <= t <= config.horizon:
        raise DomainError(f"conditioning time {t} outside [0, {config.horizon}]")
    rates = RatePair.from_config(config)
    if rng is None:
        rng = config.streams().stream(STREAM_CHAIN)
    state = initial
    tau = t
    jumps = []
    while True:
        tau += _exponential(rng, rates.out_of(state))
        if tau > config.horizon:
            break
        jumps.append(tau)
        state = 1 - state
    return JumpPath(initial, np.array(jumps), config.horizon)
