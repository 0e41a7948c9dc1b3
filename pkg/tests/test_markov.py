import math

import numpy as np
import pytest
from scipy.integrate import simpson
from scipy.linalg import expm

from wonham import DomainError, JumpPath, conditioned_no_jump_path, sample_jump_path, stationary_law
from wonham.config import STREAM_CHAIN
from wonham.markov import RatePair
from wonham.observation import simulate_observation
from wonham.model import build_grid, state_at


def test_rate_pair_convention(make_config):
    rates = RatePair.from_config(make_config())
    assert rates.rate01 == pytest.approx(1.3 * 0.4)
    assert rates.rate10 == pytest.approx(1.3 * 0.6)
    assert rates.total == pytest.approx(1.3)


def test_zero_rate_edge_uses_direct_constructor():
    # rate 0 is outside the config domain; the deterministic equivalent is an
    # explicitly empty jump list
    path = JumpPath(0, np.array([]), 10.0)
    assert path.n_jumps == 0
    assert state_at(path, 7.3) == 0


def test_mean_first_jump_time(make_config):
    # closed-form oracle: exponential holding with rate lam*p = 0.52
    config = make_config(horizon=20.0)
    rng = config.streams().stream(STREAM_CHAIN)
    n = 10**5
    firsts = np.empty(n)
    for i in range(n):
        path = sample_jump_path(config, initial=0, rng=rng)
        firsts[i] = path.jump_times[0] if path.n_jumps else config.horizon
    mean_expected = 1.0 / 0.52
    se = mean_expected / math.sqrt(n)
    assert abs(firsts.mean() - mean_expected) < 3 * se


def test_stationary_initial_draw(make_config):
    config = make_config(horizon=0.5)
    rng = config.streams().stream(STREAM_CHAIN)
    n = 10**5
    ones = sum(sample_jump_path(config, rng=rng).initial_state for _ in range(n))
    se = math.sqrt(0.4 * 0.6 / n)
    assert abs(ones / n - config.p) < 3 * se


def test_stationary_law(make_config):
    assert stationary_law(make_config()) == pytest.approx(0.4)
    assert stationary_law(make_config(p=0.5)) == pytest.approx(0.5)


def test_ergodic_time_average(make_config):
    # long-run occupation of state 1 approaches p
    config = make_config(horizon=1000.0)
    path = sample_jump_path(config, rng=config.streams().stream(STREAM_CHAIN))
    occupied = sum(
        (b - a) for a, b, s in path.constancy_intervals() if s == 1
    )
    assert abs(occupied / config.horizon - 0.4) < 0.02


def test_up_jump_count_matches_matrix_exponential_oracle(make_config):
    # E[# 0->1 jumps on [0,H] | x_0 = 0] = lam*p * int_0^H P(x_u = 0) du,
    # with the occupation probability from the matrix exponential
    config = make_config(horizon=2.0)
    lam, p, H = config.lam, config.p, config.horizon
    Q = np.array([[-lam * p, lam * p], [lam * (1 - p), -lam * (1 - p)]])
    us = np.linspace(0.0, H, 201)
    p00 = np.array([expm(Q * u)[0, 0] for u in us])
    expected = lam * p * simpson(p00, x=us)

    rng = config.streams().stream(STREAM_CHAIN)
    n = 30_000
    counts = np.empty(n)
    for i in range(n):
        path = sample_jump_path(config, initial=0, rng=rng)
        counts[i] = (path.n_jumps + 1) // 2  # jumps alternate starting with 0->1
    se = counts.std(ddof=1) / math.sqrt(n)
    assert abs(counts.mean() - expected) < 3 * se


def test_conditioned_path_holds_state(make_config):
    config = make_config(horizon=10.0)
    rng = config.streams().stream(STREAM_CHAIN)
    for initial in (0, 1):
        path = conditioned_no_jump_path(initial, 5.0, config, rng=rng)
        assert path.initial_state == initial
        assert not np.any(path.jump_times <= 5.0)
        assert state_at(path, 4.999) == initial


def test_conditioned_path_gives_zero_drift_observation(make_config):
    config = make_config(horizon=10.0, dt=1e-3)
    path = conditioned_no_jump_path(0, 5.0, config)
    grid = build_grid(0.0, 5.0, config.dt)
    obs = simulate_observation(path, config, grid, noise_scale=0.0)
    np.testing.assert_array_equal(obs.dy, 0.0)


def test_conditioned_path_validates_inputs(make_config):
    config = make_config()
    with pytest.raises(DomainError):
        conditioned_no_jump_path(2, 0.5, config)
    with pytest.raises(DomainError):
        conditioned_no_jump_path(0, 5.0, config)  # beyond horizon
