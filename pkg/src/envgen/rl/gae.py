"""Generalized advantage estimation."""

from __future__ import annotations

import numpy as np


def compute_gae(rewards, values, dones, bootstrap_value, gamma: float, lam: float):
    """Standard recursive GAE over one or many trajectories.

    Accepts ``(T,)`` arrays with a scalar bootstrap, or ``(N, T)`` arrays with
    an ``(N,)`` bootstrap. A done flag at step t cuts both the bootstrap and
    the advantage recursion across the episode boundary.

    Returns ``(advantages, returns)`` with ``returns = advantages + values``.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    squeeze = rewards.ndim == 1
    if squeeze:
        rewards, values, dones = rewards[None], values[None], dones[None]
        bootstrap = np.asarray([bootstrap_value], dtype=np.float64)
    else:
        bootstrap = np.asarray(bootstrap_value, dtype=np.float64)
    if not (rewards.shape == values.shape == dones.shape):
        raise ValueError(
            f"shape mismatch: rewards {rewards.shape}, values {values.shape}, dones {dones.shape}"
        )
    if bootstrap.shape != (rewards.shape[0],):
        raise ValueError(f"bootstrap shape {bootstrap.shape} does not match {rewards.shape[0]} rows")

    n, t_len = rewards.shape
    advantages = np.zeros((n, t_len), dtype=np.float64)
    next_values = bootstrap.copy()
    gae = np.zeros(n, dtype=np.float64)
    for t in range(t_len - 1, -1, -1):
        alive = ~dones[:, t]
        delta = rewards[:, t] + gamma * next_values * alive - values[:, t]
        gae = delta + gamma * lam * alive * gae
        advantages[:, t] = gae
        next_values = values[:, t]
    returns = advantages + values
    if squeeze:
        return advantages[0], returns[0]
    return advantages, returns
