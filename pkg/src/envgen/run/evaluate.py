"""Frozen-policy evaluation: per-seed achievement success rates."""

from __future__ import annotations

import numpy as np

from ..rl.rollout import VecEnv
from .games import GameSpec, derive_seed


def evaluate(agent, game: GameSpec, n_seeds: int, episodes_per_seed: int, *,
             base_seed: int = 0, config=None, workers: int = 0) -> np.ndarray:
    """Success-rate matrix (n_seeds x achievements) with frozen parameters.

    Each seed pins one world; the stochastic policy plays
    ``episodes_per_seed`` episodes in it. The agent's action-sampling stream
    is snapshotted and restored, so evaluation never perturbs training.
    """
    if config is None:
        config = game.original_config
    envs = [
        game.make_from_config(config, derive_seed(base_seed, 11, s), fixed_seed=True)
        for s in range(n_seeds)
    ]
    venv = VecEnv(envs, workers=workers)
    names = game.achievements
    name_index = {a: i for i, a in enumerate(names)}
    counts = np.zeros((n_seeds, len(names)))
    finished = np.zeros(n_seeds, dtype=np.int64)

    sampler_state = agent._sample_gen.get_state()
    records: list = []
    seen = 0
    try:
        while finished.min() < episodes_per_seed:
            spatial, status = venv.observe()
            actions, _, _ = agent.act(spatial, status)
            venv.step(actions, 0, records=records)
            for record in records[seen:]:
                if finished[record.slot] < episodes_per_seed:
                    finished[record.slot] += 1
                    for name in record.unlocked:
                        counts[record.slot, name_index[name]] += 1
            seen = len(records)
    finally:
        agent._sample_gen.set_state(sampler_state)
        venv.close()
    return counts / episodes_per_seed


def measure_mean_return(agent, game: GameSpec, config, episodes: int, *,
                        base_seed: int = 0, n_envs: int = 4,
                        workers: int = 0) -> float:
    """Mean shaped episode return of the current policy on one config; the
    difficulty yardstick for the curriculum baselines."""
    envs = [
        game.make_from_config(config, derive_seed(base_seed, 13, i))
        for i in range(n_envs)
    ]
    venv = VecEnv(envs, workers=workers)
    records: list = []
    sampler_state = agent._sample_gen.get_state()
    try:
        while len(records) < episodes:
            spatial, status = venv.observe()
            actions, _, _ = agent.act(spatial, status)
            venv.step(actions, 0, records=records)
    finally:
        agent._sample_gen.set_state(sampler_state)
        venv.close()
    return float(np.mean([r.shaped_return for r in records[:episodes]]))
