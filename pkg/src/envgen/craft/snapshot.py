"""World snapshot export/import (versioned binary + readable JSON) and
golden action-tape files."""

from __future__ import annotations

import base64
import json
import zlib
from pathlib import Path

import numpy as np

from . import constants as C
from .world import Mob, WorldState, _PAD

MAGIC = b"CBW1"


class SnapshotError(ValueError):
    pass


def world_to_json(state: WorldState) -> dict:
    """Human-readable dump; the grid is one row-string per line."""
    glyphs = ".,~SToidp#FPL"  # one char per material, aligned with MATERIALS
    return {
        "format": "craft-world",
        "version": 1,
        "seed": state.seed,
        "size": state.size,
        "max_steps": state.max_steps,
        "config": state.config.to_dict(),
        "tracked": list(state.tracked),
        "grid_rows": ["".join(glyphs[m] for m in row) for row in state.grid],
        "grid_b64": base64.b64encode(state.grid.tobytes()).decode("ascii"),
        "agent": {
            "position": [state.agent_r, state.agent_c],
            "facing": state.facing,
            "health": state.health,
            "hunger": state.hunger,
            "thirst": state.thirst,
            "energy": state.energy,
            "sleeping": state.sleeping,
            "inventory": dict(state.inventory),
        },
        "mobs": [
            {"kind": m.kind, "position": [m.r, m.c], "health": m.health, "cooldown": m.cooldown}
            for m in state.mobs
        ],
        "step_count": state.step_count,
        "counters": dict(state.counters),
        "unlocked": sorted(state.unlocked),
        "plant_ages": [[r, c, t] for (r, c), t in sorted(state.plant_ages.items())],
        "rng_state": state.rng.bit_generator.state,
        "done": state.done,
    }


def world_from_json(payload: dict) -> WorldState:
    from ..config import EnvConfig

    if payload.get("format") != "craft-world" or payload.get("version") != 1:
        raise SnapshotError("not a version-1 craft-world snapshot")
    state = WorldState.__new__(WorldState)
    state.config = EnvConfig.from_dict(payload["config"])
    state.seed = payload["seed"]
    state.size = payload["size"]
    state.max_steps = payload["max_steps"]
    state.tracked = tuple(payload["tracked"])
    size = state.size
    state.padded = np.full((size + 2 * _PAD, size + 2 * _PAD), C.OUT_OF_BOUNDS_ID, dtype=np.uint8)
    state.grid = state.padded[_PAD:-_PAD, _PAD:-_PAD]
    state.grid[:, :] = np.frombuffer(
        base64.b64decode(payload["grid_b64"]), dtype=np.uint8
    ).reshape(size, size)
    agent = payload["agent"]
    state.agent_r, state.agent_c = agent["position"]
    state.facing = agent["facing"]
    state.health = agent["health"]
    state.hunger = agent["hunger"]
    state.thirst = agent["thirst"]
    state.energy = agent["energy"]
    state.sleeping = agent["sleeping"]
    state.inventory = {item: agent["inventory"].get(item, 0) for item in C.ITEMS}
    state.mobs = [
        Mob(m["kind"], m["position"][0], m["position"][1], m["health"], m["cooldown"])
        for m in payload["mobs"]
    ]
    state.step_count = payload["step_count"]
    state.counters = {a: payload["counters"].get(a, 0) for a in C.ACHIEVEMENTS}
    state.unlocked = set(payload["unlocked"])
    state.plant_ages = {(r, c): t for r, c, t in payload["plant_ages"]}
    rng_state = payload["rng_state"]
    if isinstance(rng_state.get("state"), dict):  # json round-trips ints fine
        rng_state["state"] = {k: int(v) for k, v in rng_state["state"].items()}
    state.rng = np.random.Generator(np.random.PCG64())
    state.rng.bit_generator.state = rng_state
    state.done = payload["done"]
    return state


def save_world(state: WorldState) -> bytes:
    """Versioned binary blob: magic + zlib-compressed JSON payload."""
    payload = json.dumps(world_to_json(state), sort_keys=True).encode()
    return MAGIC + zlib.compress(payload, 6)


def load_world(blob: bytes) -> WorldState:
    if blob[:4] != MAGIC:
        raise SnapshotError(f"bad snapshot magic {blob[:4]!r}; expected {MAGIC!r}")
    return world_from_json(json.loads(zlib.decompress(blob[4:])))


# --------------------------------------------------------------------------
# action tapes: newline-separated action names


def save_tape(path, actions) -> None:
    Path(path).write_text("\n".join(C.Action(a).name for a in actions) + "\n")


def load_tape(path) -> list[C.Action]:
    actions = []
    for i, line in enumerate(Path(path).read_text().splitlines()):
        name = line.strip()
        if not name or name.startswith("#"):
            continue
        try:
            actions.append(C.Action[name])
        except KeyError:
            raise SnapshotError(f"unknown action {name!r} on tape line {i + 1}") from None
    return actions
