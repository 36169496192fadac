"""Vectorized environment stepping and rollout collection."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np


@dataclass
class EpisodeRecord:
    """One finished episode, stamped with the global step it ended on."""

    slot: int
    end_gstep: int
    length: int
    shaped_return: float
    unlocked: frozenset
    raw_unlocks: int  # unlock count, i.e. the un-shaped reward total


@dataclass
class RolloutBatch:
    """Trajectories shaped (n_envs, t_per_env) plus collection side-products."""

    spatial: np.ndarray
    status: np.ndarray
    actions: np.ndarray
    logps: np.ndarray
    values: np.ndarray
    rewards: np.ndarray
    dones: np.ndarray
    bootstrap_values: np.ndarray
    unlock_events: list = field(default_factory=list)  # (gstep, slot, achievement)
    episode_records: list = field(default_factory=list)

    @property
    def n_envs(self) -> int:
        return self.rewards.shape[0]

    @property
    def t_per_env(self) -> int:
        return self.rewards.shape[1]


class VecEnv:
    """Steps independent environments in lockstep and auto-resets finished
    episodes. ``workers > 0`` fans the stepping out across a thread pool;
    results are identical to serial stepping because each environment is
    single-owner."""

    def __init__(self, envs: list, workers: int = 0):
        if not envs:
            raise ValueError("VecEnv needs at least one environment")
        self.envs = envs
        self.n_envs = len(envs)
        first = envs[0]
        self.spatial_shape = first.spatial_shape
        self.status_dim = first.status_dim
        self.n_actions = first.n_actions
        self._spatial = np.zeros((self.n_envs, *self.spatial_shape), dtype=np.float32)
        self._status = np.zeros((self.n_envs, self.status_dim), dtype=np.float32)
        self._ep_return = np.zeros(self.n_envs)
        self._ep_length = np.zeros(self.n_envs, dtype=np.int64)
        self._ep_unlocked = [set() for _ in range(self.n_envs)]
        self._pool = ThreadPoolExecutor(max_workers=workers) if workers > 0 else None
        for env in envs:
            env.reset()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()

    @property
    def achievement_names(self):
        return self.envs[0].achievement_names

    def observe(self) -> tuple[np.ndarray, np.ndarray]:
        for i, env in enumerate(self.envs):
            env.write_obs(self._spatial[i], self._status[i])
        return self._spatial, self._status

    def step(self, actions, gstep: int, records: list | None = None,
             unlock_events: list | None = None):
        """Advance every slot one tick; returns (rewards, dones) arrays."""
        rewards = np.zeros(self.n_envs, dtype=np.float32)
        dones = np.zeros(self.n_envs, dtype=bool)

        def run(i):
            return self.envs[i].step(int(actions[i]))

        if self._pool is None:
            results = [run(i) for i in range(self.n_envs)]
        else:
            results = list(self._pool.map(run, range(self.n_envs)))

        for i, (reward, done, newly) in enumerate(results):
            rewards[i] = reward
            dones[i] = done
            self._ep_return[i] += reward
            self._ep_length[i] += 1
            if newly:
                self._ep_unlocked[i].update(newly)
                if unlock_events is not None:
                    for name in sorted(newly):
                        unlock_events.append((gstep, i, name))
            if done:
                if records is not None:
                    records.append(
                        EpisodeRecord(
                            slot=i,
                            end_gstep=gstep,
                            length=int(self._ep_length[i]),
                            shaped_return=float(self._ep_return[i]),
                            unlocked=frozenset(self._ep_unlocked[i]),
                            raw_unlocks=len(self._ep_unlocked[i]),
                        )
                    )
                self._ep_return[i] = 0.0
                self._ep_length[i] = 0
                self._ep_unlocked[i] = set()
                self.envs[i].reset()
        return rewards, dones


def collect_rollout(agent, venv: VecEnv, total_steps: int, *,
                    base_gstep: int = 0) -> RolloutBatch:
    """Collect ``total_steps`` environment steps under the stochastic policy.

    ``total_steps`` must divide evenly across the vector slots; the global
    step advances by ``n_envs`` per lockstep tick.
    """
    n = venv.n_envs
    if total_steps % n != 0:
        raise ValueError(f"{total_steps} steps do not divide across {n} envs")
    t_per = total_steps // n

    batch = RolloutBatch(
        spatial=np.zeros((n, t_per, *venv.spatial_shape), dtype=np.float32),
        status=np.zeros((n, t_per, venv.status_dim), dtype=np.float32),
        actions=np.zeros((n, t_per), dtype=np.int64),
        logps=np.zeros((n, t_per), dtype=np.float32),
        values=np.zeros((n, t_per), dtype=np.float32),
        rewards=np.zeros((n, t_per), dtype=np.float32),
        dones=np.zeros((n, t_per), dtype=bool),
        bootstrap_values=np.zeros(n, dtype=np.float32),
    )

    for t in range(t_per):
        spatial, status = venv.observe()
        actions, logps, values = agent.act(spatial, status)
        gstep = base_gstep + (t + 1) * n
        rewards, dones = venv.step(
            actions, gstep, records=batch.episode_records,
            unlock_events=batch.unlock_events,
        )
        batch.spatial[:, t] = spatial
        batch.status[:, t] = status
        batch.actions[:, t] = actions
        batch.logps[:, t] = logps
        batch.values[:, t] = values
        batch.rewards[:, t] = rewards
        batch.dones[:, t] = dones

    spatial, status = venv.observe()
    batch.bootstrap_values[:] = agent.predict_values(spatial, status)
    return batch
