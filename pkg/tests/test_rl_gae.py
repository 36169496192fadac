"""GAE against a brute-force discounted-sum oracle."""

import numpy as np
import pytest

from envgen.rl import compute_gae


def brute_force_gae(rewards, values, dones, bootstrap, gamma, lam):
    """O(T^2) direct evaluation of the exponentially weighted delta sums."""
    T = len(rewards)
    next_values = np.append(values[1:], bootstrap)
    deltas = rewards + gamma * next_values * (1.0 - dones) - values
    advantages = np.zeros(T)
    for t in range(T):
        coef = 1.0
        for i in range(t, T):
            advantages[t] += coef * deltas[i]
            if dones[i]:
                break
            coef *= gamma * lam
    return advantages, advantages + values


def test_zero_rewards_zero_values():
    adv, ret = compute_gae([0.0] * 5, [0.0] * 5, [False] * 5, 0.0, 0.9, 0.8)
    assert np.allclose(adv, 0.0) and np.allclose(ret, 0.0)


def test_worked_example():
    # delta = [1, 0] so the advantages collapse to the deltas
    adv, ret = compute_gae([1.0, 0.0], [0.0, 0.0], [False, False], 0.0, 0.5, 0.5)
    assert np.allclose(adv, [1.0, 0.0])
    assert np.allclose(ret, [1.0, 0.0])


def test_matches_brute_force_on_random_instances():
    rng = np.random.default_rng(0)
    for _ in range(200):
        T = int(rng.integers(1, 33))
        rewards = rng.normal(size=T)
        values = rng.normal(size=T)
        dones = rng.random(T) < 0.25
        bootstrap = float(rng.normal())
        gamma = float(rng.uniform(0.01, 0.99))
        lam = float(rng.uniform(0.01, 0.99))
        adv, ret = compute_gae(rewards, values, dones, bootstrap, gamma, lam)
        expected_adv, expected_ret = brute_force_gae(rewards, values, dones,
                                                     bootstrap, gamma, lam)
        assert np.allclose(adv, expected_adv, atol=1e-8)
        assert np.allclose(ret, expected_ret, atol=1e-8)


def test_done_cuts_bootstrap():
    # terminal reward should not leak the bootstrap value across the boundary
    adv, _ = compute_gae([1.0], [0.0], [True], 100.0, 0.99, 0.95)
    assert np.allclose(adv, [1.0])


def test_batched_rows_match_individual():
    rng = np.random.default_rng(1)
    rewards = rng.normal(size=(3, 8))
    values = rng.normal(size=(3, 8))
    dones = rng.random((3, 8)) < 0.2
    bootstrap = rng.normal(size=3)
    adv, ret = compute_gae(rewards, values, dones, bootstrap, 0.95, 0.65)
    for i in range(3):
        row_adv, row_ret = compute_gae(rewards[i], values[i], dones[i],
                                       bootstrap[i], 0.95, 0.65)
        assert np.allclose(adv[i], row_adv) and np.allclose(ret[i], row_ret)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        compute_gae([1.0, 2.0], [0.0], [False, False], 0.0, 0.9, 0.9)
    with pytest.raises(ValueError):
        compute_gae(np.zeros((2, 4)), np.zeros((2, 4)), np.zeros((2, 4), bool),
                    np.zeros(3), 0.9, 0.9)
