"""Episode-level wrapper around the maze game for the rollout engine."""

from __future__ import annotations

import numpy as np

from . import maze as M


class HeistEnv:
    """Maze episodes from a fixed config; fresh layout per reset unless
    ``fixed_seed`` pins one."""

    def __init__(self, config: M.HeistConfig, seed=0, *, fixed_seed=False):
        self.config = config
        self.fixed_seed = fixed_seed
        self._base_seed = int(seed)
        self._episode_index = 0
        self.state = None

    @property
    def achievement_names(self) -> tuple[str, ...]:
        return (M.ACHIEVEMENT,)

    @property
    def n_actions(self) -> int:
        return len(M.ACTION_NAMES)

    @property
    def spatial_shape(self) -> tuple[int, int, int]:
        return (M.OBS_CHANNELS, M.MAX_MAZE_SIZE, M.MAX_MAZE_SIZE)

    @property
    def status_dim(self) -> int:
        return M.STATUS_DIM

    def _episode_seed(self) -> int:
        if self.fixed_seed:
            return self._base_seed
        seed = np.random.SeedSequence(
            entropy=self._base_seed, spawn_key=(self._episode_index,)
        ).generate_state(1, np.uint64)[0]
        return int(seed)

    def reset(self):
        self.state = M.generate_maze(self.config, self._episode_seed())
        self._episode_index += 1
        return self.state

    def step(self, action: int):
        return M.step_fast(self.state, action)

    def write_obs(self, out_spatial: np.ndarray, out_status: np.ndarray) -> None:
        M.write_observation(self.state, out_spatial, out_status)

    def digest(self) -> int:
        return M.state_digest(self.state)
