"""Configurable grid-world survival simulator with hierarchical achievements."""

from .constants import ACHIEVEMENTS, ACTION_NAMES, ITEMS, MATERIALS, PREREQUISITES, Action
from .env import CraftEnv
from .snapshot import load_tape, load_world, save_tape, save_world, world_from_json, world_to_json
from .world import (
    EpisodeDoneError,
    Observation,
    StepResult,
    WorldState,
    check_achievements,
    generate_world,
    observe,
    state_digest,
    step,
)

__all__ = [
    "ACHIEVEMENTS",
    "ACTION_NAMES",
    "ITEMS",
    "MATERIALS",
    "PREREQUISITES",
    "Action",
    "CraftEnv",
    "EpisodeDoneError",
    "Observation",
    "StepResult",
    "WorldState",
    "check_achievements",
    "generate_world",
    "load_tape",
    "load_world",
    "observe",
    "save_tape",
    "save_world",
    "state_digest",
    "step",
    "world_from_json",
    "world_to_json",
]
