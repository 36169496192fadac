"""Clipped-surrogate PPO with EWMA advantage normalization."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .gae import compute_gae


@dataclass(frozen=True)
class PpoConfig:
    discount: float = 0.95
    gae_lambda: float = 0.65
    rollout_steps: int = 4096
    epochs: int = 3
    minibatches: int = 8
    entropy_coef: float = 0.01
    clip_range: float = 0.2
    reward_normalization: bool = False
    ewma_decay: float = 0.99
    learning_rate: float = 3e-4
    max_grad_norm: float = 0.5
    vf_coef: float = 0.5
    adam_eps: float = 1e-5

    def __post_init__(self):
        for name in ("discount", "gae_lambda", "rollout_steps", "epochs", "minibatches",
                     "clip_range", "learning_rate", "max_grad_norm", "ewma_decay"):
            if getattr(self, name) <= 0:
                raise ValueError(f"PpoConfig.{name} must be positive")
        if self.entropy_coef < 0 or self.vf_coef < 0:
            raise ValueError("coefficients must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


class UpdateError(RuntimeError):
    """Non-finite loss; the update was aborted and parameters restored."""

    def __init__(self, message: str, minibatch_index: int):
        super().__init__(message)
        self.minibatch_index = minibatch_index


class EwmaNormalizer:
    """Exponentially weighted mean/variance for advantage normalization.

    Statistics persist across updates (decay per update); debiasing follows
    the usual 1 - decay^t correction. Normalization is an affine map with a
    positive scale, so advantage ordering is preserved.
    """

    def __init__(self, decay: float = 0.99, eps: float = 1e-8):
        self.decay = decay
        self.eps = eps
        self.mean = 0.0
        self.mean_sq = 0.0
        self.count = 0

    def update(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=np.float64)
        self.mean = self.decay * self.mean + (1.0 - self.decay) * float(values.mean())
        self.mean_sq = self.decay * self.mean_sq + (1.0 - self.decay) * float(
            (values**2).mean()
        )
        self.count += 1

    def normalize(self, values: np.ndarray) -> np.ndarray:
        if self.count == 0:
            return np.asarray(values, dtype=np.float64)
        debias = 1.0 - self.decay**self.count
        mean = self.mean / debias
        var = max(self.mean_sq / debias - mean**2, 0.0)
        return (np.asarray(values, dtype=np.float64) - mean) / (math.sqrt(var) + self.eps)

    def state_dict(self) -> dict:
        return {"decay": self.decay, "mean": self.mean, "mean_sq": self.mean_sq,
                "count": self.count}

    def load_state_dict(self, state: dict) -> None:
        self.decay = state["decay"]
        self.mean = state["mean"]
        self.mean_sq = state["mean_sq"]
        self.count = state["count"]


@dataclass
class TrainStats:
    """Per-update summary, streamed as one JSONL line."""

    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    approx_kl: float
    grad_norm: float
    loss: float
    n_samples: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "policy_loss": self.policy_loss,
            "value_loss": self.value_loss,
            "entropy": self.entropy,
            "clip_fraction": self.clip_fraction,
            "approx_kl": self.approx_kl,
            "grad_norm": self.grad_norm,
            "loss": self.loss,
            "n_samples": self.n_samples,
        }
        out.update(self.extra)
        return out


def ppo_loss_terms(policy, spatial, status, actions, behavior_logps, advantages,
                   returns, cfg: PpoConfig):
    """The three PPO loss pieces on one minibatch of tensors."""
    logits, values = policy(spatial, status)
    logps = torch.log_softmax(logits, dim=-1)
    chosen = logps.gather(1, actions.unsqueeze(1)).squeeze(1)
    ratio = torch.exp(chosen - behavior_logps)
    surr = ratio * advantages
    clipped = torch.clamp(ratio, 1.0 - cfg.clip_range, 1.0 + cfg.clip_range) * advantages
    policy_loss = -torch.minimum(surr, clipped).mean()
    value_loss = ((values - returns) ** 2).mean()
    entropy = -(logps.exp() * logps).sum(dim=-1).mean()
    loss = policy_loss + cfg.vf_coef * value_loss - cfg.entropy_coef * entropy
    with torch.no_grad():
        clip_fraction = ((ratio - 1.0).abs() > cfg.clip_range).float().mean()
        approx_kl = (behavior_logps - chosen).mean()
    return loss, policy_loss, value_loss, entropy, clip_fraction, approx_kl


def ppo_update(policy, optimizer, batch, cfg: PpoConfig, normalizer: EwmaNormalizer,
               perm_rng: np.random.Generator,
               reward_normalizer: EwmaNormalizer | None = None) -> TrainStats:
    """Epochs x minibatches of clipped-surrogate updates over one rollout.

    Deterministic given (parameters, batch, permutation generator state).
    A non-finite loss aborts the whole update: parameters are restored to
    their pre-update values and UpdateError reports the minibatch index.
    """
    rewards = batch.rewards
    if cfg.reward_normalization and reward_normalizer is not None:
        reward_normalizer.update(rewards.reshape(-1))
        rewards = reward_normalizer.normalize(rewards)
    advantages, returns = compute_gae(
        rewards, batch.values, batch.dones, batch.bootstrap_values,
        cfg.discount, cfg.gae_lambda,
    )
    normalizer.update(advantages.reshape(-1))
    norm_adv = normalizer.normalize(advantages)

    dtype = next(policy.parameters()).dtype
    n_total = batch.n_envs * batch.t_per_env

    def flat(arr):
        return torch.as_tensor(np.ascontiguousarray(arr.reshape(n_total, *arr.shape[2:])))

    spatial = flat(batch.spatial).to(dtype)
    status = flat(batch.status).to(dtype)
    actions = flat(batch.actions).long()
    behavior_logps = flat(batch.logps).to(dtype)
    adv_t = flat(norm_adv).to(dtype)
    ret_t = flat(returns).to(dtype)

    snapshot = {k: v.detach().clone() for k, v in policy.state_dict().items()}
    sums = np.zeros(6, dtype=np.float64)
    n_minibatches = 0
    minibatch_size = max(n_total // cfg.minibatches, 1)

    for _epoch in range(cfg.epochs):
        perm = perm_rng.permutation(n_total)
        for k in range(cfg.minibatches):
            idx = torch.as_tensor(perm[k * minibatch_size : (k + 1) * minibatch_size])
            if idx.numel() == 0:
                continue
            loss, pi_loss, v_loss, entropy, clip_frac, approx_kl = ppo_loss_terms(
                policy, spatial[idx], status[idx], actions[idx],
                behavior_logps[idx], adv_t[idx], ret_t[idx], cfg,
            )
            if not torch.isfinite(loss):
                policy.load_state_dict(snapshot)
                raise UpdateError(
                    f"non-finite loss in minibatch {n_minibatches}", n_minibatches
                )
            optimizer.zero_grad()
            loss.backward()
            grad_norm = torch.nn.utils.clip_grad_norm_(
                policy.parameters(), cfg.max_grad_norm
            )
            optimizer.step()
            sums += (
                pi_loss.item(), v_loss.item(), entropy.item(),
                clip_frac.item(), approx_kl.item(), grad_norm.item(),
            )
            n_minibatches += 1

    mean = sums / max(n_minibatches, 1)
    return TrainStats(
        policy_loss=float(mean[0]),
        value_loss=float(mean[1]),
        entropy=float(mean[2]),
        clip_fraction=float(mean[3]),
        approx_kl=float(mean[4]),
        grad_norm=float(mean[5]),
        loss=float(mean[0] + cfg.vf_coef * mean[1] - cfg.entropy_coef * mean[2]),
        n_samples=n_total,
    )
