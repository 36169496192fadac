"""Episode-level wrapper around the world core, used by the rollout engine."""

from __future__ import annotations

import numpy as np

from . import constants as C
from . import world as W


class CraftEnv:
    """Survival-world episodes from a fixed config.

    Each reset builds a fresh world from ``seed`` (or the next seed of the
    internal stream when ``fixed_seed`` is False, the training default).
    """

    def __init__(self, config, seed=0, *, size=C.DEFAULT_WORLD_SIZE,
                 max_steps=C.DEFAULT_MAX_STEPS, tracked=None, fixed_seed=False):
        self.config = config
        self.size = size
        self.max_steps = max_steps
        self.tracked = tuple(tracked) if tracked is not None else C.ACHIEVEMENTS
        self.fixed_seed = fixed_seed
        self._base_seed = int(seed)
        self._episode_index = 0
        self.state = None

    # rollout engine contract -------------------------------------------------
    @property
    def achievement_names(self) -> tuple[str, ...]:
        return self.tracked

    @property
    def n_actions(self) -> int:
        return C.N_ACTIONS

    @property
    def spatial_shape(self) -> tuple[int, int, int]:
        return (W.OBS_CHANNELS, C.VIEW_SIZE, C.VIEW_SIZE)

    @property
    def status_dim(self) -> int:
        return W.STATUS_DIM + 1  # daylight scalar is appended

    def _episode_seed(self) -> int:
        if self.fixed_seed:
            return self._base_seed
        seed = np.random.SeedSequence(
            entropy=self._base_seed, spawn_key=(self._episode_index,)
        ).generate_state(1, np.uint64)[0]
        return int(seed)

    def reset(self):
        self.state = W.generate_world(
            self.config,
            self._episode_seed(),
            size=self.size,
            max_steps=self.max_steps,
            tracked=self.tracked,
        )
        self._episode_index += 1
        return self.state

    def step(self, action: int):
        return W.step_fast(self.state, action)

    def write_obs(self, out_spatial: np.ndarray, out_status: np.ndarray) -> None:
        daylight = W.write_observation(self.state, out_spatial, out_status[:-1])
        out_status[-1] = daylight

    def digest(self) -> int:
        return W.state_digest(self.state)
