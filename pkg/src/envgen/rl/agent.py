"""The PPO agent: policy + optimizer + normalizer + seeded samplers."""

from __future__ import annotations

import numpy as np
import torch

from .policy import PolicySpec
from .ppo import EwmaNormalizer, PpoConfig, TrainStats, ppo_update


class Agent:
    """Owns everything that changes during training.

    All stochasticity flows through two private generators (action sampling
    and minibatch permutation), so runs are reproducible from (spec, cfg,
    seed) alone.
    """

    def __init__(self, policy_spec: PolicySpec, cfg: PpoConfig | None = None,
                 seed: int = 0):
        self.spec = policy_spec
        self.cfg = cfg or PpoConfig()
        self.seed = int(seed)
        self.policy = policy_spec.build(seed=self.seed)
        self.optimizer = torch.optim.Adam(
            self.policy.parameters(), lr=self.cfg.learning_rate, eps=self.cfg.adam_eps
        )
        self.normalizer = EwmaNormalizer(self.cfg.ewma_decay)
        self.reward_normalizer = EwmaNormalizer(self.cfg.ewma_decay)
        self._sample_gen = torch.Generator().manual_seed(self.seed + 0x5EED)
        self._perm_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(1,))
        )
        self.global_step = 0
        self.updates = 0

    # ------------------------------------------------------------------
    def act(self, spatial: np.ndarray, status: np.ndarray):
        """Sample actions for a batch of observations; returns numpy
        (actions, log-probs, values)."""
        with torch.no_grad():
            logits, values = self.policy(
                torch.from_numpy(spatial), torch.from_numpy(status)
            )
            logps = torch.log_softmax(logits, dim=-1)
            actions = torch.multinomial(
                logps.exp(), num_samples=1, generator=self._sample_gen
            ).squeeze(1)
            chosen = logps.gather(1, actions.unsqueeze(1)).squeeze(1)
        return (
            actions.numpy(),
            chosen.numpy().astype(np.float32),
            values.numpy().astype(np.float32),
        )

    def predict_values(self, spatial: np.ndarray, status: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            _, values = self.policy(torch.from_numpy(spatial), torch.from_numpy(status))
        return values.numpy().astype(np.float32)

    def update(self, batch) -> TrainStats:
        stats = ppo_update(
            self.policy, self.optimizer, batch, self.cfg, self.normalizer,
            self._perm_rng, reward_normalizer=self.reward_normalizer,
        )
        self.updates += 1
        self.global_step += batch.n_envs * batch.t_per_env
        return stats

    def fresh_like(self, seed: int) -> "Agent":
        """New untrained agent with the same architecture and config."""
        return Agent(self.spec, self.cfg, seed=seed)

    # ------------------------------------------------------------------
    def state_dict(self) -> dict:
        return {
            "policy": self.policy.state_dict(),
            "optimizer": self.optimizer.state_dict(),
            "normalizer": self.normalizer.state_dict(),
            "reward_normalizer": self.reward_normalizer.state_dict(),
            "sample_gen": self._sample_gen.get_state(),
            "perm_rng": self._perm_rng.bit_generator.state,
            "global_step": self.global_step,
            "updates": self.updates,
            "seed": self.seed,
        }

    def load_state_dict(self, state: dict) -> None:
        self.policy.load_state_dict(state["policy"])
        self.optimizer.load_state_dict(state["optimizer"])
        self.normalizer.load_state_dict(state["normalizer"])
        self.reward_normalizer.load_state_dict(state["reward_normalizer"])
        self._sample_gen.set_state(state["sample_gen"])
        self._perm_rng.bit_generator.state = state["perm_rng"]
        self.global_step = state["global_step"]
        self.updates = state["updates"]
        self.seed = state["seed"]

    def params_digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for name, tensor in sorted(self.policy.state_dict().items()):
            h.update(name.encode())
            h.update(tensor.numpy().tobytes())
        return h.hexdigest()
