"""Finite-difference validation of the PPO loss gradient on tiny policies."""

import numpy as np
import torch

from envgen.rl import PpoConfig, TinyStatusPolicy, gradient_check
from test_rl_ppo import make_batch


def test_tiny_instance_under_tolerance():
    rng = np.random.default_rng(0)
    batch = make_batch(rng, n=2, t=8, status_dim=3, n_actions=4, one_hot=False)
    policy = TinyStatusPolicy(3, 4, hidden=8)
    assert policy.parameter_count() <= 1000
    assert gradient_check(policy, batch) < 1e-3


def test_value_loss_only_gradient():
    rng = np.random.default_rng(1)
    batch = make_batch(rng, n=2, t=8, status_dim=3, n_actions=4, one_hot=False)
    # zero advantages: flat rewards and values kill the surrogate term
    batch.rewards[:] = 0.0
    batch.values[:] = 0.0
    batch.bootstrap_values[:] = 0.0
    batch.dones[:] = False
    policy = TinyStatusPolicy(3, 4, hidden=8)
    cfg = PpoConfig(entropy_coef=0.0)
    assert gradient_check(policy, batch, cfg) < 1e-3


def test_repeatable():
    rng = np.random.default_rng(2)
    batch = make_batch(rng, n=2, t=8, status_dim=3, n_actions=4, one_hot=False)
    torch.manual_seed(3)
    policy = TinyStatusPolicy(3, 4, hidden=6)
    assert gradient_check(policy, batch) == gradient_check(policy, batch)
