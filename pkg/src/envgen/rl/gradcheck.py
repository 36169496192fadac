"""Finite-difference verification of the PPO loss gradient."""

from __future__ import annotations

import numpy as np
import torch

from .gae import compute_gae
from .ppo import EwmaNormalizer, PpoConfig, ppo_loss_terms


def _full_batch_tensors(policy, batch, cfg):
    advantages, returns = compute_gae(
        batch.rewards, batch.values, batch.dones, batch.bootstrap_values,
        cfg.discount, cfg.gae_lambda,
    )
    normalizer = EwmaNormalizer(cfg.ewma_decay)
    normalizer.update(advantages.reshape(-1))
    norm_adv = normalizer.normalize(advantages)
    dtype = next(policy.parameters()).dtype
    n = batch.n_envs * batch.t_per_env

    def flat(arr):
        return torch.as_tensor(np.ascontiguousarray(arr.reshape(n, *arr.shape[2:])))

    return (
        flat(batch.spatial).to(dtype),
        flat(batch.status).to(dtype),
        flat(batch.actions).long(),
        flat(batch.logps).to(dtype),
        flat(norm_adv).to(dtype),
        flat(returns).to(dtype),
    )


def gradient_check(policy, batch, cfg: PpoConfig | None = None, *,
                   h: float = 1e-4) -> float:
    """Max relative error between the analytic gradient of the total PPO loss
    and central finite differences, over every parameter of a small policy.

    Use a float64 policy and at most ~1k parameters; the advantage
    normalization statistics are frozen so the loss is a pure function of the
    parameters.
    """
    cfg = cfg or PpoConfig()
    tensors = _full_batch_tensors(policy, batch, cfg)

    def loss_value() -> float:
        with torch.no_grad():
            loss, *_ = ppo_loss_terms(policy, *tensors, cfg)
        return loss.item()

    loss, *_ = ppo_loss_terms(policy, *tensors, cfg)
    policy.zero_grad()
    loss.backward()

    max_rel = 0.0
    for param in policy.parameters():
        grad = param.grad
        if grad is None:
            continue
        flat_param = param.data.view(-1)
        flat_grad = grad.view(-1)
        for i in range(flat_param.numel()):
            original = float(flat_param[i])
            flat_param[i] = original + h
            up = loss_value()
            flat_param[i] = original - h
            down = loss_value()
            flat_param[i] = original
            fd = (up - down) / (2.0 * h)
            analytic = float(flat_grad[i])
            denom = max(abs(analytic), abs(fd), 1e-6)
            max_rel = max(max_rel, abs(analytic - fd) / denom)
    return max_rel
