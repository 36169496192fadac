"""Game registry: how to build original and generated environments, plus the
matching policy architecture, for each supported game."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import EnvConfig
from ..craft.constants import ACHIEVEMENTS, DEFAULT_MAX_STEPS, DEFAULT_WORLD_SIZE
from ..craft.env import CraftEnv
from ..heist.env import HeistEnv
from ..heist.maze import ACHIEVEMENT as HEIST_ACHIEVEMENT
from ..heist.maze import HeistConfig
from ..rl.policy import PolicySpec

# the spec-default architecture; presets may shrink it for CI speed
DEFAULT_CONV_CHANNELS = (32, 64, 64)
DEFAULT_HIDDEN = 512

MINI_ACHIEVEMENTS = (
    "collect_wood",
    "place_table",
    "make_wood_pickaxe",
    "collect_stone",
    "make_stone_pickaxe",
    "collect_coal",
)


def derive_seed(master: int, *key: int) -> int:
    """Stable child seed for a structured position in the run."""
    return int(
        np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in key))
        .generate_state(1, np.uint64)[0]
    )


@dataclass(frozen=True)
class GameSpec:
    name: str
    achievements: tuple
    original_config: object
    env_kwargs: dict
    policy_spec: PolicySpec

    def make_original(self, seed: int, *, fixed_seed: bool = False):
        return self.make_from_config(self.original_config, seed, fixed_seed=fixed_seed)

    def make_from_config(self, config, seed: int, *, fixed_seed: bool = False):
        if self.name == "craftbench":
            return CraftEnv(config, seed, fixed_seed=fixed_seed, **self.env_kwargs)
        return HeistEnv(config, seed, fixed_seed=fixed_seed)


def craftbench_game(*, size: int = DEFAULT_WORLD_SIZE, max_steps: int = DEFAULT_MAX_STEPS,
                    tracked=None, conv_channels=DEFAULT_CONV_CHANNELS,
                    hidden: int = DEFAULT_HIDDEN) -> GameSpec:
    tracked = tuple(tracked) if tracked is not None else ACHIEVEMENTS
    env_kwargs = {"size": size, "max_steps": max_steps, "tracked": tracked}
    probe = CraftEnv(EnvConfig(), 0, **env_kwargs)
    return GameSpec(
        name="craftbench",
        achievements=tracked,
        original_config=EnvConfig(),
        env_kwargs=env_kwargs,
        policy_spec=PolicySpec(
            spatial_shape=probe.spatial_shape,
            status_dim=probe.status_dim,
            n_actions=probe.n_actions,
            conv_channels=tuple(conv_channels),
            hidden=hidden,
        ),
    )


def heist_game(*, conv_channels=DEFAULT_CONV_CHANNELS, hidden: int = DEFAULT_HIDDEN,
               original_config: HeistConfig | None = None) -> GameSpec:
    config = original_config or HeistConfig()
    probe = HeistEnv(config, 0)
    return GameSpec(
        name="heist",
        achievements=(HEIST_ACHIEVEMENT,),
        original_config=config,
        env_kwargs={},
        policy_spec=PolicySpec(
            spatial_shape=probe.spatial_shape,
            status_dim=probe.status_dim,
            n_actions=probe.n_actions,
            conv_channels=tuple(conv_channels),
            hidden=hidden,
        ),
    )


def game_for(name: str, **kwargs) -> GameSpec:
    if name == "craftbench":
        return craftbench_game(**kwargs)
    if name == "heist":
        return heist_game(**kwargs)
    raise ValueError(f"unknown game {name!r}")
