"""Lock-key maze simulator with ordered colour locks guarding a gem."""

from .env import HeistEnv
from .maze import (
    ACTION_NAMES,
    LOCK_ORDER,
    HeistConfig,
    HeistDoneError,
    HeistState,
    clamp_heist_config,
    generate_maze,
    maze_from_ascii,
    maze_to_ascii,
    observe,
    parse_heist_config_json,
    solve,
    state_digest,
    step,
)

__all__ = [
    "ACTION_NAMES",
    "LOCK_ORDER",
    "HeistConfig",
    "HeistDoneError",
    "HeistEnv",
    "HeistState",
    "clamp_heist_config",
    "generate_maze",
    "maze_from_ascii",
    "maze_to_ascii",
    "observe",
    "parse_heist_config_json",
    "solve",
    "state_digest",
    "step",
]
