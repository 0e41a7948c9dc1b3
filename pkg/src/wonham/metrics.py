"""Pathwise metrics, excursion extraction, estimators, and the
false-detection probability of the smoothed estimator.

Two distances see the limit differently: the truncated Lebesgue distance
``d_L(f, g) = int_0^H (|f - g| /\\ 1) dt`` ignores vertical spikes, while the
Hausdorff distance between sampled graphs of ``[0, H] x [0, 1]`` captures
them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .config import ExperimentConfig, STREAM_COND_NOISE
from .errors import DomainError, GridMismatchError
from . import _kernels
from .filtering import integrate_filter_logistic
from .model import JumpPath, PlanarGraph, SamplePath, build_grid
from .observation import simulate_observation
from .smoothing import smooth_path

__all__ = [
    "ExcursionSet",
    "ErrorEstimate",
    "distance_L",
    "distance_H",
    "distance_H_bruteforce",
    "extract_excursions",
    "hitting_time",
    "estimator_path",
    "error_probability",
    "run_replicas",
]


def distance_L(f: SamplePath, g: SamplePath) -> float:
    """Truncated Lebesgue distance ``int (|f - g| /\\ 1) dt`` by trapezoid."""
    if not f.grid.same_as(g.grid):
        raise GridMismatchError("paths are on different grids")
    diff = np.minimum(np.abs(f.values - g.values), 1.0)
    return float(np.trapezoid(diff, dx=f.grid.dt))


def distance_H(g1: PlanarGraph, g2: PlanarGraph) -> float:
    """Hausdorff distance between two sampled graphs.

    Exact for the point sets (nearest-neighbour queries both ways); as an
    estimate of the distance between the ideal sets it carries a
    ``max(g1.res, g2.res)`` sampling uncertainty.
    """
    if g1.size == 0 or g2.size == 0:
        raise DomainError("Hausdorff distance needs nonempty graphs")
    d12 = cKDTree(g2.points).query(g1.points, workers=-1)[0].max()
    d21 = cKDTree(g1.points).query(g2.points, workers=-1)[0].max()
    return float(max(d12, d21))


def distance_H_bruteforce(g1: PlanarGraph, g2: PlanarGraph, limit: int = 4000) -> float:
    """O(n*m) oracle for distance_H, guarded to small graphs."""
    if g1.size == 0 or g2.size == 0:
        raise DomainError("Hausdorff distance needs nonempty graphs")
    if g1.size > limit or g2.size > limit:
        raise DomainError(f"brute-force oracle limited to {limit} points per graph")
    diff = g1.points[:, None, :] - g2.points[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


@dataclass(frozen=True)
class ExcursionSet:
    """Completed excursion windows ``[T_j, S_j]`` of one path at level ``epsilon``.

    ``T`` enters the band ``[eps, 1 - eps]`` and ``S`` exits past ``eps/2`` or
    ``1 - eps/2``.  The scan starts outside (waiting for the first T), so a
    path that begins mid-band opens its first excursion at t = 0; only
    completed pairs inside the horizon are kept.
    """

    starts: np.ndarray
    ends: np.ndarray
    epsilon: float

    def __post_init__(self):
        s = np.asarray(self.starts, dtype=float)
        e = np.asarray(self.ends, dtype=float)
        object.__setattr__(self, "starts", s)
        object.__setattr__(self, "ends", e)
        if s.shape != e.shape:
            raise DomainError("starts/ends shape mismatch")
        if s.size:
            if not np.all(e > s):
                raise DomainError("each excursion needs T < S")
            if not np.all(s[1:] >= e[:-1]):
                raise DomainError("excursions must be disjoint and ordered")
        s.flags.writeable = False
        e.flags.writeable = False

    @property
    def count(self) -> int:
        return int(self.starts.size)

    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.starts.tolist(), self.ends.tolist()))


def extract_excursions(pi: SamplePath, epsilon: float) -> ExcursionSet:
    """Alternating stopping-time scan over the grid."""
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must be in (0, 1/2), got {epsilon}")
    t_idx, s_idx = _kernels.excursion_scan(pi.values, epsilon)
    times = pi.grid.times()
    return ExcursionSet(starts=times[t_idx], ends=times[s_idx], epsilon=epsilon)


def hitting_time(z: SamplePath) -> float | None:
    """First grid time with value strictly above 1/2, None if never."""
    above = z.values > 0.5
    if not above.any():
        return None
    return float(z.grid.time_of(int(np.argmax(above))))


def estimator_path(pi: SamplePath) -> SamplePath:
    """Threshold estimator ``1{pi > 1/2}`` (strict) as a 0/1 path."""
    return SamplePath(pi.grid, (pi.values > 0.5).astype(float))


@dataclass(frozen=True)
class ErrorEstimate:
    """Binomial estimate with its standard error."""

    estimate: float
    stderr: float
    hits: int
    replicas: int


def run_replicas(worker, n: int, threads: int = 1) -> list:
    """Evaluate ``worker(replica_index)`` for all indices, in index order.

    Results are merged by replica index, so the outcome is identical for any
    thread count (the kernels release the GIL).
    """
    if n < 1:
        raise DomainError("need at least one replica")
    if threads <= 1:
        return [worker(r) for r in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(n)))


def error_probability(
    config: ExperimentConfig,
    t: float,
    n_replicas: int,
    threads: int = 1,
    cell: int = 0,
    pi0: float | None = None,
    noise_scale: float | None = None,
) -> ErrorEstimate:
    """False-detection probability of the smoothed estimator before time ``t``.

    Estimates P(T(xhat) <= t | T(x) > t) for a chain started at 0: each
    replica holds the chain at 0 on [0, t] (the conditional law of the path),
    draws fresh observation noise, runs the logistic filter and the fixed-lag
    smoother, and scores whether the smoothed path strictly exceeds 1/2 at any
    grid point.  Conditioning on a known initial 0 also fixes the filter start
    at its collapsed scale, ``pi0 = 1/gamma`` by default (starting from the
    stationary guess instead would trigger spurious detections from the
    initial posterior wobble, which exceeds 1/2 with probability about
    ``p/(1-p)`` regardless of the lag).  ``noise_scale`` overrides the
    observation noise amplitude (0 is the noiseless hook: the filter
    collapses monotonically and never crosses).
    """
    if n_replicas < 1:
        raise DomainError("need at least one replica")
    if not 0 < t <= config.horizon:
        raise DomainError(f"t must be in (0, horizon], got {t}")
    if pi0 is None:
        pi0 = min(1.0 / config.gamma, 0.5)
    grid = build_grid(0.0, t, config.dt)
    delta = config.delta
    streams = config.streams()
    flat = JumpPath(0, np.empty(0), t)

    def worker(r: int) -> bool:
        rng = streams.stream(STREAM_COND_NOISE, cell, r)
        dy = simulate_observation(flat, config, grid, rng=rng, noise_scale=noise_scale)
        filt = integrate_filter_logistic(dy, config, pi0=pi0)
        smoothed = smooth_path(filt.pi, delta, config)
        return bool(np.any(smoothed.pi_smoothed.values > 0.5))

    results = run_replicas(worker, n_replicas, threads)
    hits = int(sum(results))
    est = hits / n_replicas
    stderr = math.sqrt(est * (1.0 - est) / n_replicas)
    return ErrorEstimate(estimate=est, stderr=stderr, hits=hits, replicas=n_replicas)
