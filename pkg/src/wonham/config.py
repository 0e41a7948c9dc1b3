"""Experiment configuration and the seeded substream contract.

A single :class:`ExperimentConfig` is the source of truth for every run.  It is
loadable from a JSON document whose field names are exactly::

    {"lambda": 1.3, "p": 0.4, "gamma": 1e4, "horizon": 10.0, "dt": 1e-5,
     "smoothing": {"C": 2.0},          # or {"delta": 1.84e-3}
     "seed": 123456789, "replicas": 200}

Unknown fields are rejected.

Randomness contract
-------------------
All randomness derives from the one root ``seed``.  A substream is addressed by
``(kind, cell, replica)`` and realised as
``PCG64(SeedSequence(entropy=seed, spawn_key=(kind, cell, replica)))``, so any
substream can be reconstructed independently of execution order or worker
count.  ``kind`` is one of the ``STREAM_*`` constants below, ``cell`` indexes a
sweep cell (0 outside sweeps) and ``replica`` indexes the Monte Carlo replica.
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "ExperimentConfig",
    "Smoothing",
    "RngStreams",
    "STREAM_CHAIN",
    "STREAM_NOISE",
    "STREAM_SPIKES",
    "STREAM_COND_NOISE",
    "GAMMA_DT_LIMIT",
    "GAMMA_DT_WARN",
]

# Substream kinds (first spawn_key component).
STREAM_CHAIN = 1        # hidden-chain jump times and initial state
STREAM_NOISE = 2        # Brownian observation increments
STREAM_SPIKES = 3       # limiting spike-process sampler
STREAM_COND_NOISE = 4   # observation noise for conditioned (no-jump) replicas

# Euler stability guard for the filter SDE.  The reference simulation scale is
# gamma*dt = 0.1; anything above that is allowed up to 0.5 but warned about.
GAMMA_DT_LIMIT = 0.5
GAMMA_DT_WARN = 0.1

_CONFIG_FIELDS = {"lambda", "p", "gamma", "horizon", "dt", "smoothing", "seed", "replicas"}


@dataclass(frozen=True)
class Smoothing:
    """Fixed smoothing lag, either explicit or scaled as ``C * log(gamma) / gamma``.

    Exactly one of ``delta`` and ``coefficient`` must be set.
    """

    delta: float | None = None
    coefficient: float | None = None

    def __post_init__(self):
        if (self.delta is None) == (self.coefficient is None):
            raise ConfigurationError(
                "smoothing needs exactly one of 'delta' or 'C'"
            )
        if self.delta is not None and self.delta < 0:
            raise ConfigurationError(f"smoothing delta must be >= 0, got {self.delta}")
        if self.coefficient is not None and self.coefficient < 0:
            raise ConfigurationError(
                f"smoothing coefficient must be >= 0, got {self.coefficient}"
            )

    def resolve(self, gamma: float) -> float:
        """Lag in time units for the given noise scale."""
        if self.delta is not None:
            return self.delta
        if gamma < 1.0:
            raise ConfigurationError(
                f"coefficient smoothing needs gamma >= 1, got gamma={gamma}"
            )
        return self.coefficient * math.log(gamma) / gamma

    @classmethod
    def from_dict(cls, obj: dict) -> "Smoothing":
        if not isinstance(obj, dict):
            raise ConfigurationError(f"smoothing must be an object, got {type(obj).__name__}")
        extra = set(obj) - {"delta", "C"}
        if extra:
            raise ConfigurationError(f"unknown smoothing fields: {sorted(extra)}")
        return cls(delta=obj.get("delta"), coefficient=obj.get("C"))

    def to_dict(self) -> dict:
        if self.delta is not None:
            return {"delta": self.delta}
        return {"C": self.coefficient}


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment.

    ``lam`` is the total jump intensity (JSON field ``"lambda"``); the chain
    leaves state 0 at rate ``lam * p`` and state 1 at rate ``lam * (1 - p)``,
    so ``p`` is the stationary probability of state 1.  ``gamma`` is the
    inverse variance of the observation noise, ``horizon``/``dt`` set the
    uniform simulation grid, ``smoothing`` the fixed lag, ``seed`` the RNG
    root, and ``replicas`` the default Monte Carlo batch size.
    """

    lam: float
    p: float
    gamma: float
    horizon: float
    dt: float
    smoothing: Smoothing
    seed: int
    replicas: int

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigurationError(f"lambda must be > 0, got {self.lam}")
        if not 0 < self.p < 1:
            raise ConfigurationError(f"p must be in (0, 1), got {self.p}")
        if not self.gamma > 0:
            raise ConfigurationError(f"gamma must be > 0, got {self.gamma}")
        if not self.horizon > 0:
            raise ConfigurationError(f"horizon must be > 0, got {self.horizon}")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not isinstance(self.replicas, int) or self.replicas < 1:
            raise ConfigurationError(f"replicas must be a positive integer, got {self.replicas}")
        gd = self.gamma * self.dt
        if gd > GAMMA_DT_LIMIT:
            raise ConfigurationError(
                f"gamma*dt = {gd:g} exceeds the stability guard {GAMMA_DT_LIMIT}"
            )
        if gd > GAMMA_DT_WARN:
            warnings.warn(
                f"gamma*dt = {gd:g} above the reference scale {GAMMA_DT_WARN}; "
                "the Euler step is coarse for the filter SDE",
                stacklevel=2,
            )
        if not self.delta < self.horizon:
            raise ConfigurationError(
                f"smoothing lag {self.delta:g} must be smaller than horizon {self.horizon:g}"
            )

    @property
    def delta(self) -> float:
        """Resolved smoothing lag in time units."""
        return self.smoothing.resolve(self.gamma)

    def streams(self) -> "RngStreams":
        return RngStreams(self.seed)

    def replace(self, **kwargs) -> "ExperimentConfig":
        """Copy with some fields overridden (same validation as construction)."""
        return dataclasses.replace(self, **kwargs)

    # -- JSON round trip ----------------------------------------------------

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigurationError(f"config must be an object, got {type(obj).__name__}")
        extra = set(obj) - _CONFIG_FIELDS
        if extra:
            raise ConfigurationError(f"unknown config fields: {sorted(extra)}")
        missing = _CONFIG_FIELDS - set(obj)
        if missing:
            raise ConfigurationError(f"missing config fields: {sorted(missing)}")
        try:
            return cls(
                lam=float(obj["lambda"]),
                p=float(obj["p"]),
                gamma=float(obj["gamma"]),
                horizon=float(obj["horizon"]),
                dt=float(obj["dt"]),
                smoothing=Smoothing.from_dict(obj["smoothing"]),
                seed=int(obj["seed"]),
                replicas=int(obj["replicas"]),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"malformed config value: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(obj)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "p": self.p,
            "gamma": self.gamma,
            "horizon": self.horizon,
            "dt": self.dt,
            "smoothing": self.smoothing.to_dict(),
            "seed": self.seed,
            "replicas": self.replicas,
        }


@dataclass(frozen=True)
class RngStreams:
    """Factory of independent, reproducible substreams from one root seed."""

    seed: int

    def stream(self, kind: int, cell: int = 0, replica: int = 0) -> np.random.Generator:
        """Generator for substream ``(kind, cell, replica)``.

        The same triple always yields the same stream, and distinct triples
        yield statistically independent streams; replicas may therefore be
        drawn in any order or on any worker.
        """
        if kind < 0 or cell < 0 or replica < 0:
            raise ConfigurationError("substream indices must be nonnegative")
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(kind, cell, replica))
        return np.random.Generator(np.random.PCG64(ss))
