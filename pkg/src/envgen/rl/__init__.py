"""PPO training core: policy network, GAE, updates, rollouts, checkpoints."""

from .agent import Agent
from .checkpoint import load_checkpoint, save_checkpoint
from .gae import compute_gae
from .gradcheck import gradient_check
from .policy import PolicyNetwork, PolicySpec, TinyStatusPolicy
from .ppo import EwmaNormalizer, PpoConfig, TrainStats, UpdateError, ppo_update
from .rollout import EpisodeRecord, RolloutBatch, VecEnv, collect_rollout

__all__ = [
    "Agent",
    "EpisodeRecord",
    "EwmaNormalizer",
    "PolicyNetwork",
    "PolicySpec",
    "PpoConfig",
    "RolloutBatch",
    "TinyStatusPolicy",
    "TrainStats",
    "UpdateError",
    "VecEnv",
    "collect_rollout",
    "compute_gae",
    "gradient_check",
    "load_checkpoint",
    "save_checkpoint",
    "ppo_update",
]
