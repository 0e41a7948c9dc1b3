"""Core domain types: time grids, jump paths, grid paths, and planar graphs.

Planar graphs are finite samplings of closed subsets of ``[0, H] x [0, 1]``.
A cadlag path contributes its horizontal levels plus one full vertical bar per
jump; a continuous path contributes its polyline.  Every graph carries the
resolution ``res`` it was sampled at, and is within Hausdorff distance ``res``
of the ideal set it represents.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ConfigurationError

__all__ = [
    "TimeGrid",
    "JumpPath",
    "SamplePath",
    "PlanarGraph",
    "GridCoverageWarning",
    "build_grid",
    "state_at",
    "graph_of_cadlag",
    "graph_of_continuous",
]


class GridCoverageWarning(UserWarning):
    """The rounded grid does not land on the requested horizon."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t0 + k*dt`` for ``k = 0..n``."""

    t0: float
    dt: float
    n: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if self.n < 1:
            raise ConfigurationError(f"grid needs n >= 1, got {self.n}")

    @property
    def end(self) -> float:
        return self.time_of(self.n)

    def time_of(self, k: int) -> float:
        return self.t0 + k * self.dt

    def index_of(self, t: float) -> int:
        """Nearest grid index, rounding half-up; exact inverse of time_of."""
        k = math.floor((t - self.t0) / self.dt + 0.5)
        if k < 0 or k > self.n:
            raise DomainError(f"time {t} outside grid [{self.t0}, {self.end}]")
        return k

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n + 1)

    def same_as(self, other: "TimeGrid") -> bool:
        return (
            self.n == other.n
            and math.isclose(self.t0, other.t0, rel_tol=0.0, abs_tol=1e-12)
            and math.isclose(self.dt, other.dt, rel_tol=1e-12)
        )


def build_grid(t0: float, horizon: float, dt: float) -> TimeGrid:
    """Uniform grid over ``[t0, horizon]`` with ``n = round((horizon - t0)/dt)``.

    Warns when the rounded endpoint misses the horizon by more than float
    slack (the grid then stops within ``dt`` of it).
    """
    if dt <= 0:
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    if horizon <= t0:
        raise ConfigurationError(f"horizon {horizon} must exceed t0 {t0}")
    n = int(math.floor((horizon - t0) / dt + 0.5))
    n = max(n, 1)
    grid = TimeGrid(t0, dt, n)
    gap = abs(grid.end - horizon)
    if gap > 1e-9 * max(1.0, abs(horizon)):
        warnings.warn(
            f"grid ends at {grid.end:g}, {'short of' if grid.end < horizon else 'past'} "
            f"horizon {horizon:g} (|gap| = {gap:g} < dt)",
            GridCoverageWarning,
            stacklevel=2,
        )
    if gap >= dt:
        raise ConfigurationError("grid rounding failed to land within dt of horizon")
    return grid


@dataclass(frozen=True)
class JumpPath:
    """Exact trajectory of the hidden two-state chain on ``[0, horizon]``.

    The state at time ``t`` is ``initial_state`` flipped once per jump time
    ``<= t`` (cadlag: at a jump time the value is the post-jump state).
    """

    initial_state: int
    jump_times: np.ndarray
    horizon: float

    def __post_init__(self):
        if self.initial_state not in (0, 1):
            raise DomainError(f"initial_state must be 0 or 1, got {self.initial_state}")
        if self.horizon <= 0:
            raise DomainError(f"horizon must be > 0, got {self.horizon}")
        jt = np.asarray(self.jump_times, dtype=float)
        object.__setattr__(self, "jump_times", jt)
        if jt.ndim != 1:
            raise DomainError("jump_times must be one-dimensional")
        if jt.size:
            if not np.all(np.diff(jt) > 0):
                raise DomainError("jump_times must be strictly increasing")
            if jt[0] <= 0 or jt[-1] > self.horizon:
                raise DomainError("jump_times must lie in (0, horizon]")
        jt.flags.writeable = False

    @property
    def n_jumps(self) -> int:
        return int(self.jump_times.size)

    def states_at(self, t: np.ndarray) -> np.ndarray:
        """Vectorised cadlag evaluation; no bound checks."""
        flips = np.searchsorted(self.jump_times, t, side="right")
        return (self.initial_state + flips) % 2

    def states_on_grid(self, grid: TimeGrid) -> np.ndarray:
        return self.states_at(grid.times())

    def constancy_intervals(self) -> list[tuple[float, float, int]]:
        """Maximal ``(start, end, state)`` intervals partitioning ``[0, horizon]``."""
        bounds = np.concatenate([[0.0], self.jump_times, [self.horizon]])
        out = []
        for i in range(len(bounds) - 1):
            if bounds[i + 1] > bounds[i]:
                out.append((bounds[i], bounds[i + 1], (self.initial_state + i) % 2))
        return out


def state_at(path: JumpPath, t: float) -> int:
    """Cadlag state of the chain at one time in ``[0, horizon]``."""
    if not 0 <= t <= path.horizon:
        raise DomainError(f"time {t} outside [0, {path.horizon}]")
    return int(path.states_at(np.asarray(t)))


@dataclass(frozen=True)
class SamplePath:
    """Values of a scalar process on a uniform grid (length ``n + 1``)."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n + 1,):
            raise DomainError(
                f"values shape {v.shape} does not match grid length {self.grid.n + 1}"
            )
        if not np.all(np.isfinite(v)):
            raise DomainError("values must be finite")
        v.flags.writeable = False


@dataclass(frozen=True)
class PlanarGraph:
    """Point sampling of a closed subset of ``[0, H] x [0, 1]`` at resolution ``res``."""

    points: np.ndarray
    res: float

    def __post_init__(self):
        if self.res <= 0:
            raise DomainError(f"res must be > 0, got {self.res}")
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DomainError("points must be an (m, 2) array")
        if pts.size and (pts[:, 1].min() < -1e-12 or pts[:, 1].max() > 1 + 1e-12):
            raise DomainError("graph values must lie in [0, 1]")
        pts.flags.writeable = False

    @property
    def size(self) -> int:
        return int(self.points.shape[0])


def _vertical_bar(t: float, lo: float, hi: float, res: float) -> np.ndarray:
    k = max(1, int(math.ceil((hi - lo) / res)))
    v = np.linspace(lo, hi, k + 1)
    return np.column_stack([np.full_like(v, t), v])


def graph_of_cadlag(path: JumpPath, grid: TimeGrid, res: float) -> PlanarGraph:
    """Graph of the chain: horizontal levels sampled on the grid plus one
    vertical bar ``{J} x [0, 1]`` per jump, all at spacing <= res."""
    if res <= 0:
        raise DomainError(f"res must be > 0, got {res}")
    times = grid.times()
    states = path.states_at(times).astype(float)
    pieces = [np.column_stack([times, states])]
    if grid.dt > res:
        # subdivide horizontal runs so consecutive samples stay within res
        k = int(math.ceil(grid.dt / res))
        for j in range(1, k):
            ts = times[:-1] + (j / k) * grid.dt
            pieces.append(np.column_stack([ts, path.states_at(ts).astype(float)]))
    for j in path.jump_times:
        if grid.t0 <= j <= grid.end:
            pieces.append(_vertical_bar(float(j), 0.0, 1.0, res))
    return PlanarGraph(np.vstack(pieces), res)


def graph_of_continuous(
    path: SamplePath, res: float, clamp: bool = False, keep_vertices: bool = True
) -> PlanarGraph:
    """Graph of a continuous path: its polyline resampled at spacing <= res.

    With ``keep_vertices`` the original samples are all retained and long
    segments subdivided.  Without it the polyline is resampled at equal arc
    spacing <= res, which covers the same set within ``res`` using far fewer
    points (useful before Hausdorff evaluation on long paths).
    """
    if res <= 0:
        raise DomainError(f"res must be > 0, got {res}")
    v = path.values
    if clamp:
        v = np.clip(v, 0.0, 1.0)
    elif v.min() < 0.0 or v.max() > 1.0:
        raise DomainError("path values must lie in [0, 1] (pass clamp=True to clip)")
    t = path.grid.times()
    if not keep_vertices:
        seg = np.hypot(np.diff(t), np.diff(v))
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        k = max(1, int(math.ceil(cum[-1] / res)))
        marks = np.linspace(0.0, cum[-1], k + 1)
        pts = np.column_stack([np.interp(marks, cum, t), np.interp(marks, cum, v)])
        return PlanarGraph(pts, res)
    pieces = [np.column_stack([t, v])]
    seg = np.hypot(np.diff(t), np.diff(v))
    long = np.nonzero(seg > res)[0]
    for i in long:
        k = int(math.ceil(seg[i] / res))
        lam = np.arange(1, k) / k
        pieces.append(
            np.column_stack([t[i] + lam * (t[i + 1] - t[i]), v[i] + lam * (v[i + 1] - v[i])])
        )
    return PlanarGraph(np.vstack(pieces), res)
