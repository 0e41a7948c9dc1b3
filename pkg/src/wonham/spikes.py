"""Sampler and statistics of the limiting spike point process.

Conditionally on the hidden trajectory, spike marks form a Poisson process on
``[0, H] x (0, 1]`` with intensity

    (p * 1{x_t = 0} + (1 - p) * 1{x_t = 1}) * lam * dt (x) dm / m^2,

truncated to lengths ``m > epsilon_min`` (the full intensity is not integrable
at 0, so the untruncated process has infinitely many spikes; below display
resolution they are invisible to the Hausdorff metric anyway).  A spike of
length ``m`` decorates the graph with the vertical segment ``[0, m]`` when the
chain sits at 0 and ``[1 - m, 1]`` when it sits at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, STREAM_SPIKES
from .errors import DomainError
from .model import JumpPath, PlanarGraph, TimeGrid, graph_of_cadlag, _vertical_bar

__all__ = [
    "SpikeSet",
    "SliceMark",
    "sample_spike_process",
    "max_spike",
    "limit_estimator_slices",
    "spike_graph",
    "truncated_count_rate",
    "max_spike_cdf",
]

FROM_0 = 0
FROM_1 = 1


@dataclass(frozen=True)
class SpikeSet:
    """Marked spike set ``{(t_i, m_i, side_i)}`` over a base trajectory."""

    base: JumpPath
    times: np.ndarray
    heights: np.ndarray
    sides: np.ndarray
    epsilon_min: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        m = np.asarray(self.heights, dtype=float)
        s = np.asarray(self.sides, dtype=np.int64)
        for name, arr in (("times", t), ("heights", m), ("sides", s)):
            object.__setattr__(self, name, arr)
            if arr.shape != t.shape:
                raise DomainError(f"{name} shape mismatch")
            arr.flags.writeable = False
        if not 0.0 < self.epsilon_min < 1.0:
            raise DomainError(f"epsilon_min must be in (0, 1), got {self.epsilon_min}")
        if t.size:
            if not np.all(np.diff(t) > 0):
                raise DomainError("spike times must be strictly increasing")
            if t[0] <= 0 or t[-1] >= self.base.horizon:
                raise DomainError("spike times must lie strictly inside (0, horizon)")
            if np.any(m <= self.epsilon_min) or np.any(m > 1.0):
                raise DomainError("spike heights must lie in (epsilon_min, 1]")
            if np.any(self.base.states_at(t) != s):
                raise DomainError("spike sides must match the base state at their times")
            if np.isin(t, self.base.jump_times).any():
                raise DomainError("spike times must avoid the base jump times")

    @property
    def n_spikes(self) -> int:
        return int(self.times.size)


def truncated_count_rate(epsilon_min: float) -> float:
    """Mass of dm/m^2 over (epsilon_min, 1], i.e. 1/epsilon_min - 1."""
    if not 0.0 < epsilon_min <= 1.0:
        raise DomainError(f"epsilon_min must be in (0, 1], got {epsilon_min}")
    return 1.0 / epsilon_min - 1.0


def sample_spike_process(
    base: JumpPath,
    epsilon_min: float,
    config: ExperimentConfig,
    rng: np.random.Generator | None = None,
) -> SpikeSet:
    """Draw the truncated spike process conditionally on ``base``.

    Within a constancy window of duration L in state sigma the spike count is
    Poisson with mean ``lam * w_sigma * L * (1/eps - 1)`` (``w_0 = p``,
    ``w_1 = 1 - p``), times are uniform over the window, and lengths are
    i.i.d. with density ``m^-2 / (1/eps - 1)`` on ``(eps, 1]``.
    """
    if not 0.0 < epsilon_min < 1.0:
        raise DomainError(f"epsilon_min must be in (0, 1), got {epsilon_min}")
    if rng is None:
        rng = config.streams().stream(STREAM_SPIKES)
    mass = truncated_count_rate(epsilon_min)
    times, heights, sides = [], [], []
    for a, b, state in base.constancy_intervals():
        weight = config.p if state == 0 else 1.0 - config.p
        count = rng.poisson(config.lam * weight * (b - a) * mass)
        if count == 0:
            continue
        t = rng.uniform(a, b, count)
        u = rng.random(count)
        m = 1.0 / (1.0 / epsilon_min - u * mass)  # inverse CDF of m^-2 on (eps, 1]
        times.append(t)
        heights.append(m)
        sides.append(np.full(count, state, dtype=np.int64))
    if times:
        t = np.concatenate(times)
        order = np.argsort(t)
        return SpikeSet(
            base=base,
            times=t[order],
            heights=np.concatenate(heights)[order],
            sides=np.concatenate(sides)[order],
            epsilon_min=epsilon_min,
        )
    empty = np.empty(0)
    return SpikeSet(base, empty, empty.copy(), np.empty(0, dtype=np.int64), epsilon_min)


def max_spike(spikes: SpikeSet) -> float:
    """Largest spike length, 0 for an empty set."""
    return float(spikes.heights.max()) if spikes.n_spikes else 0.0


def max_spike_cdf(eta: float, base: JumpPath, p: float, lam: float) -> float:
    """Closed form of ``P(M* <= 1 - eta)`` conditionally on the base path.

    The spikes longer than ``1 - eta`` form a Poisson count with mean
    ``(lam * eta / (1 - eta)) * int_0^H (p 1{x=0} + (1-p) 1{x=1}) dt``.
    """
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta must be in (0, 1), got {eta}")
    weighted_time = 0.0
    for a, b, state in base.constancy_intervals():
        weighted_time += (b - a) * (p if state == 0 else 1.0 - p)
    return math.exp(-(lam * eta / (1.0 - eta)) * weighted_time)


@dataclass(frozen=True)
class SliceMark:
    """Estimator-set label at one special time (a spike or a jump)."""

    time: float
    label: frozenset
    kind: str  # "spike" or "jump"


def limit_estimator_slices(spikes: SpikeSet) -> list[SliceMark]:
    """Per-time classification of the limiting estimator set.

    At a spike from state 0 the slice is {0, 1} when the spike crosses 1/2
    (length > 1/2) and {0} otherwise; symmetrically from state 1.  Jumps of
    the base always produce {0, 1}.  Away from these times the slice is the
    singleton of the base state.
    """
    marks = []
    for t, m, side in zip(spikes.times, spikes.heights, spikes.sides):
        if m > 0.5:
            label = frozenset({0, 1})
        else:
            label = frozenset({int(side)})
        marks.append(SliceMark(float(t), label, "spike"))
    for j in spikes.base.jump_times:
        marks.append(SliceMark(float(j), frozenset({0, 1}), "jump"))
    marks.sort(key=lambda mk: mk.time)
    return marks


def spike_graph(spikes: SpikeSet, res: float, grid: TimeGrid | None = None) -> PlanarGraph:
    """Base graph decorated with one vertical spike segment per mark.

    Spikes from 0 occupy ``[0, m]``; spikes from 1 occupy ``[1 - m, 1]``.
    ``grid`` sets the horizontal sampling (default: spacing ``res`` over the
    base horizon).
    """
    if res <= 0:
        raise DomainError(f"res must be > 0, got {res}")
    if grid is None:
        steps = max(1, int(math.ceil(spikes.base.horizon / res)))
        grid = TimeGrid(0.0, spikes.base.horizon / steps, steps)  # ends exactly at horizon
    base_graph = graph_of_cadlag(spikes.base, grid, res)
    pieces = [base_graph.points]
    for t, m, side in zip(spikes.times, spikes.heights, spikes.sides):
        lo, hi = (0.0, m) if side == FROM_0 else (1.0 - m, 1.0)
        pieces.append(_vertical_bar(float(t), lo, hi, res))
    return PlanarGraph(np.vstack(pieces), res)
