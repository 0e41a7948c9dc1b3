import numpy as np
import pytest

from wonham import _kernels
from wonham.config import ExperimentConfig, Smoothing


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger numba compilation once so timed tests measure math, not JIT."""
    dy = np.zeros(4)
    vals = np.full(5, 0.5)
    step = np.full(4, 1e-3)
    _kernels.euler_filter_pi(dy, 1e-3, 1.0, 0.5, 1.0, 0.5, 1e-12, False)
    _kernels.euler_filter_pi(dy, 1e-3, 1.0, 0.5, 1.0, 0.5, 1e-12, True)
    _kernels.euler_filter_logistic(dy, 1e-3, 1.0, 0.5, 1.0, 0.0, 500.0)
    _kernels.prefix_trapezoid(vals, 1e-3)
    _kernels.window_exp_integral(vals, step, 2, 1e-3, True)
    _kernels.window_exp_integral(vals, step, 2, 1e-3, False)
    _kernels.span_exp_integral(vals, step, 0, 4, 1e-3, True)
    _kernels.span_exp_integral(vals, step, 0, 4, 1e-3, False)
    _kernels.smooth_backward_rk4(vals, vals, vals, 2, 1e-3)
    _kernels.excursion_scan(vals, 0.2)


@pytest.fixture
def make_config():
    """Config factory with small, fast defaults; override per test."""

    def _make(**overrides) -> ExperimentConfig:
        base = dict(
            lam=1.3,
            p=0.4,
            gamma=100.0,
            horizon=1.0,
            dt=1e-4,
            smoothing=Smoothing(delta=0.01),
            seed=777,
            replicas=4,
        )
        base.update(overrides)
        return ExperimentConfig(**base)

    return _make
