import math

import numpy as np
import pytest

from wonham import (
    DomainError,
    SamplePath,
    SingularWindowError,
    backward_transform,
    forward_transform,
    integrate_filter_logistic,
    logistic,
    logit,
    residual_decompose,
    sample_jump_path,
    scale_g,
    scale_h,
    simulate_observation,
)
from wonham.config import STREAM_CHAIN, STREAM_COND_NOISE, STREAM_NOISE
from wonham.model import JumpPath, TimeGrid, build_grid
from wonham.smoothing import damping_coefficient


def test_logit_examples():
    assert logit(0.5) == 0.0
    assert logit(0.3) + logit(0.7) == pytest.approx(0.0, abs=1e-15)
    assert logistic(logit(0.9)) == pytest.approx(0.9, abs=1e-15)
    with pytest.raises(DomainError):
        logit(0.0)
    with pytest.raises(DomainError):
        logit(1.0)


def test_logit_logistic_inverse_on_log_grid():
    xs = np.concatenate([np.geomspace(1e-12, 0.5, 300), 1.0 - np.geomspace(1e-12, 0.4, 300)])
    back = logistic(logit(xs))
    assert np.max(np.abs(back - xs)) <= 1e-15


def test_scale_g_examples():
    assert scale_g(0.5, 0.4) == pytest.approx(2.0, rel=1e-15)
    assert scale_g(0.5, 0.17) == pytest.approx(2.0, rel=1e-15)
    # p/y dominates as y -> 0 (at p = 0.1 the log term shaves ~11 off 1e5,
    # so the clean 1e5 threshold needs p slightly above 0.1)
    assert scale_g(1e-6, 0.1) > 9.9e4
    assert scale_g(1e-6, 0.11) > 1e5
    assert scale_g(1e-7, 0.1) > 9.9e5
    # symmetry under (p, x) -> (1-p, 1-x)
    assert scale_g(0.3, 0.4) == pytest.approx(scale_g(0.7, 0.6), rel=1e-14)


def test_scale_h_base_point_and_monotonicity(make_config):
    config = make_config()
    assert scale_h(0.5, config, x0=0.5) == 0.5
    assert scale_h(0.6, config) > scale_h(0.4, config)
    rng = np.random.default_rng(3)
    xs = np.sort(rng.uniform(0.05, 0.95, 12))
    hs = [scale_h(float(x), config) for x in xs]
    assert np.all(np.diff(hs) > 0)


def test_scale_h_flattens_at_large_gamma():
    # |h(x) - x| <= (e^{(2 lam/gamma) max g} - 1) * |x - x0|, evaluated densely
    from wonham import ExperimentConfig, Smoothing

    with pytest.warns(UserWarning):
        config = ExperimentConfig(
            lam=1.3, p=0.4, gamma=1e6, horizon=1.0, dt=5e-7,
            smoothing=Smoothing(delta=0.0), seed=5, replicas=1,
        )
    grid = np.linspace(0.1, 0.9, 801)
    g_max = float(np.max(np.abs(scale_g(grid, config.p))))
    bound = math.expm1(2 * config.lam / config.gamma * g_max) * 0.4
    assert bound <= 1e-4
    for x in (0.1, 0.25, 0.65, 0.9):
        assert abs(scale_h(x, config) - x) <= 1e-4


def test_residual_constant_integrand():
    # Y == 0, p = 1/2: r_t = (gamma/2 - lam/2) t exactly (constant integrand)
    from wonham import ExperimentConfig, FilterPath, Smoothing

    lam, gamma = 1.3, 10.0
    config = ExperimentConfig(
        lam=lam, p=0.5, gamma=gamma, horizon=1.0, dt=1e-3,
        smoothing=Smoothing(delta=0.0), seed=1, replicas=1,
    )
    grid = build_grid(0.0, 1.0, config.dt)
    ys = SamplePath(grid, np.zeros(grid.n + 1))
    pis = SamplePath(grid, np.full(grid.n + 1, 0.5))
    filt = FilterPath(pi=pis, y_logit=ys, clamp_events=0)
    dec = residual_decompose(filt, config)
    expected = (gamma / 2 - lam / 2) * grid.times()
    np.testing.assert_allclose(dec.r_path.values, expected, rtol=1e-12, atol=1e-12)


def test_residual_discrete_ode_consistency(make_config):
    # da - db - e^{-a} dt = O(dt^2) per step on a simulated path
    config = make_config(gamma=100.0, horizon=1.0, dt=1e-5)
    grid = build_grid(0.0, 1.0, config.dt)
    chain = sample_jump_path(config, rng=config.streams().stream(STREAM_CHAIN))
    obs = simulate_observation(chain, config, grid, rng=config.streams().stream(STREAM_NOISE))
    filt = integrate_filter_logistic(obs, config)
    dec = residual_decompose(filt, config)
    da = np.diff(dec.a_path.values)
    db = np.diff(dec.b_path.values)
    ea = np.exp(-dec.a_path.values[:-1])
    residual = np.max(np.abs(da - db - ea * config.dt))
    assert residual <= 1e-2


def test_residual_growth_diagnostic(make_config):
    # collapsed-stretch growth of r over lag windows, across noise scales;
    # diagnostic print, loose sanity bound only
    rows = []
    for gamma, dt in ((1e3, 1e-5), (1e4, 1e-5), (1e5, 1e-6)):
        config = make_config(gamma=gamma, dt=dt, horizon=0.2, seed=31)
        grid = build_grid(0.0, config.horizon, config.dt)
        flat = JumpPath(0, np.empty(0), config.horizon)
        obs = simulate_observation(flat, config, grid, rng=config.streams().stream(STREAM_COND_NOISE))
        filt = integrate_filter_logistic(obs, config, pi0=1.0 / gamma)
        dec = residual_decompose(filt, config)
        w = int(round(2 * math.log(gamma) / gamma / config.dt))
        r = dec.r_path.values
        growth = float(np.max(np.abs(r[w:] - r[:-w])))
        rows.append((gamma, growth, growth / math.log(gamma)))
    for gamma, growth, ratio in rows:
        print(f"residual growth gamma={gamma:g}: {growth:.3f} ({ratio:.3f} log gamma)")
        assert math.isfinite(growth)
        assert growth <= 10 * math.log(gamma)


def _rk4_reference(grid, b_prime, a0):
    # independent integration of dA = db + e^{-A} dt for smooth b
    a = np.empty(grid.n + 1)
    a[0] = a0
    h = grid.dt
    t = grid.times()
    for k in range(grid.n):
        u, y = t[k], a[k]
        k1 = b_prime(u) + math.exp(-y)
        k2 = b_prime(u + h / 2) + math.exp(-(y + h / 2 * k1))
        k3 = b_prime(u + h / 2) + math.exp(-(y + h / 2 * k2))
        k4 = b_prime(u + h) + math.exp(-(y + h * k3))
        a[k + 1] = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return a


def test_transforms_constant_b():
    # b == 0: e^{A_t} = e^{A_s} + (t - s)
    grid = TimeGrid(0.0, 1e-4, 10_000)
    b = SamplePath(grid, np.zeros(grid.n + 1))
    a_s = 0.4
    s, t = 0.0, 1.0
    a_t = math.log(math.exp(a_s) + (t - s))
    expected = a_t - a_s
    assert backward_transform(b, a_t, s, t) == pytest.approx(expected, abs=1e-8)
    assert forward_transform(b, a_s, s, t) == pytest.approx(expected, abs=1e-8)
    assert forward_transform(b, a_s, 0.3, 0.3) == 0.0
    assert backward_transform(b, a_t, 0.3, 0.3) == 0.0


def test_transforms_match_rk4_oracle():
    grid = TimeGrid(0.0, 5e-5, 20_000)
    t_axis = grid.times()
    b_vals = 0.3 * np.sin(2 * math.pi * t_axis)
    b_prime = lambda u: 0.3 * 2 * math.pi * math.cos(2 * math.pi * u)
    a_ref = _rk4_reference(grid, b_prime, 0.2)
    b = SamplePath(grid, b_vals)
    for (s, t) in ((0.2, 0.8), (0.0, 1.0), (0.45, 0.55)):
        i, j = grid.index_of(s), grid.index_of(t)
        truth = a_ref[j] - a_ref[i]
        back = backward_transform(b, a_ref[j], s, t)
        fwd = forward_transform(b, a_ref[i], s, t)
        assert back == pytest.approx(truth, abs=1e-6)
        assert fwd == pytest.approx(truth, abs=1e-6)
        assert back == pytest.approx(fwd, abs=1e-8)


def test_backward_transform_reports_singular_window():
    grid = TimeGrid(0.0, 1e-3, 1000)
    b = SamplePath(grid, -50.0 * grid.times())
    with pytest.raises(SingularWindowError):
        backward_transform(b, -5.0, 0.0, 1.0)


def test_damping_in_logistic_coordinates(make_config):
    # a(pi) = lam*(1-p) e^Y + lam*p e^-Y with Y = logit(pi)
    config = make_config()
    pis = np.linspace(0.01, 0.99, 197)
    ys = logit(pis)
    via_y = config.lam * (1 - config.p) * np.exp(ys) + config.lam * config.p * np.exp(-ys)
    direct = damping_coefficient(pis, config)
    assert np.max(np.abs(direct - via_y) / via_y) <= 1e-12
