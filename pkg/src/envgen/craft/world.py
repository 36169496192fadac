"""Deterministic survival-world core: state, stepping, achievements, digests.

The world is a single-owner mutable object. ``step`` advances it one tick in
place and reports the transition; replaying the same (config, seed, action
tape) reproduces the exact same digest sequence.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from . import constants as C
from . import worldgen

_PAD = C.VIEW_SIZE // 2
_EYE_MATERIALS = np.eye(C.N_OBS_MATERIALS, dtype=np.float32)

STATUS_DIM = 4 + len(C.ITEMS) + 4  # vitals, inventory, facing
OBS_CHANNELS = C.N_OBS_MATERIALS + len(C.MOB_KINDS)


class EpisodeDoneError(RuntimeError):
    """Raised when a finished episode is stepped again."""


class Mob:
    __slots__ = ("kind", "r", "c", "health", "cooldown")

    def __init__(self, kind, r, c, health, cooldown=0):
        self.kind = kind
        self.r = r
        self.c = c
        self.health = health
        self.cooldown = cooldown


class Observation:
    """Symbolic agent view: one-hot local window, status vector, daylight."""

    __slots__ = ("local_view", "status", "daylight")

    def __init__(self, local_view, status, daylight):
        self.local_view = local_view
        self.status = status
        self.daylight = daylight


class StepResult:
    __slots__ = ("observation", "reward", "done", "newly_unlocked")

    def __init__(self, observation, reward, done, newly_unlocked):
        self.observation = observation
        self.reward = reward
        self.done = done
        self.newly_unlocked = newly_unlocked


class WorldState:
    __slots__ = (
        "config",
        "seed",
        "size",
        "max_steps",
        "tracked",
        "padded",
        "grid",
        "agent_r",
        "agent_c",
        "facing",
        "health",
        "hunger",
        "thirst",
        "energy",
        "inventory",
        "sleeping",
        "mobs",
        "step_count",
        "counters",
        "unlocked",
        "plant_ages",
        "rng",
        "done",
    )

    @property
    def daylight_phase(self) -> str:
        return "day" if (self.step_count % (C.DAY_TICKS + C.NIGHT_TICKS)) < C.DAY_TICKS else "night"

    @property
    def position(self) -> tuple[int, int]:
        return (self.agent_r, self.agent_c)

    def copy(self) -> "WorldState":
        """Deep copy (used by tests comparing before/after states)."""
        new = WorldState.__new__(WorldState)
        new.config = self.config
        new.seed = self.seed
        new.size = self.size
        new.max_steps = self.max_steps
        new.tracked = self.tracked
        new.padded = self.padded.copy()
        new.grid = new.padded[_PAD:-_PAD, _PAD:-_PAD]
        new.agent_r = self.agent_r
        new.agent_c = self.agent_c
        new.facing = self.facing
        new.health = self.health
        new.hunger = self.hunger
        new.thirst = self.thirst
        new.energy = self.energy
        new.inventory = dict(self.inventory)
        new.sleeping = self.sleeping
        new.mobs = [Mob(m.kind, m.r, m.c, m.health, m.cooldown) for m in self.mobs]
        new.step_count = self.step_count
        new.counters = dict(self.counters)
        new.unlocked = set(self.unlocked)
        new.plant_ages = dict(self.plant_ages)
        new.rng = np.random.Generator(np.random.PCG64())
        new.rng.bit_generator.state = self.rng.bit_generator.state
        new.done = self.done
        return new


def generate_world(config, seed: int, *, size: int = C.DEFAULT_WORLD_SIZE,
                   max_steps: int = C.DEFAULT_MAX_STEPS, tracked=None) -> WorldState:
    """Build a fresh world from a validated config; deterministic in (config, seed)."""
    state = WorldState.__new__(WorldState)
    state.config = config
    state.seed = int(seed)
    state.size = size
    state.max_steps = max_steps
    state.tracked = tuple(tracked) if tracked is not None else C.ACHIEVEMENTS
    state.rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))

    state.padded = np.full((size + 2 * _PAD, size + 2 * _PAD), C.OUT_OF_BOUNDS_ID, dtype=np.uint8)
    state.grid = state.padded[_PAD:-_PAD, _PAD:-_PAD]
    state.grid[:, :] = worldgen.generate_terrain(config, state.rng, size)

    state.agent_r, state.agent_c = worldgen.pick_start(state.grid, state.rng)
    state.facing = 1  # south
    state.health = C.VITAL_MAX
    state.hunger = C.VITAL_MAX
    state.thirst = C.VITAL_MAX
    state.energy = C.VITAL_MAX
    state.inventory = {item: 0 for item in C.ITEMS}
    for item, count in getattr(config, "starting_inventory", {}).items():
        state.inventory[item] = min(int(count), C.ITEM_MAX[item])
    state.sleeping = False
    state.mobs = worldgen.spawn_initial_mobs(state.grid, state.rng, state.position, config)
    state.step_count = 0
    state.counters = {a: 0 for a in C.ACHIEVEMENTS}
    state.unlocked = set()
    state.plant_ages = {}
    state.done = False
    return state


def check_achievements(state_before: WorldState, state_after: WorldState) -> set[str]:
    """Tracked achievements whose trigger flipped true between two states."""
    return {
        a
        for a in state_after.tracked
        if state_after.counters[a] > 0 and state_before.counters[a] == 0
    }


# --------------------------------------------------------------------------
# stepping


def _best_attack_damage(inventory) -> int:
    if inventory["iron_sword"]:
        return C.ATTACK_DAMAGE["iron_sword"]
    if inventory["stone_sword"]:
        return C.ATTACK_DAMAGE["stone_sword"]
    if inventory["wood_sword"]:
        return C.ATTACK_DAMAGE["wood_sword"]
    return C.ATTACK_DAMAGE["none"]


def _mob_at(state, r, c):
    for mob in state.mobs:
        if mob.r == r and mob.c == c:
            return mob
    return None


def _gain(state, item, n=1):
    cap = C.ITEM_MAX[item]
    state.inventory[item] = min(state.inventory[item] + n, cap)


def _near_station(state, station_id) -> bool:
    r, c = state.agent_r, state.agent_c
    size = state.size
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            rr, cc = r + dr, c + dc
            if 0 <= rr < size and 0 <= cc < size and state.grid[rr, cc] == station_id:
                return True
    return False


def _apply_do(state):
    dr, dc = C.FACING_DELTAS[state.facing]
    r, c = state.agent_r + dr, state.agent_c + dc
    if not (0 <= r < state.size and 0 <= c < state.size):
        return

    mob = _mob_at(state, r, c)
    if mob is not None:
        mob.health -= _best_attack_damage(state.inventory)
        if mob.health <= 0:
            state.mobs.remove(mob)
            if mob.kind == "cow":
                state.hunger = C.VITAL_MAX
                state.counters["eat_cow"] += 1
            elif mob.kind == "zombie":
                state.counters["defeat_zombie"] += 1
            else:
                state.counters["defeat_skeleton"] += 1
        return

    material = C.MATERIALS[state.grid[r, c]]
    if material in C.MINEABLE:
        needs, item, leaves = C.MINEABLE[material]
        if needs is not None and not state.inventory[needs]:
            return
        _gain(state, item)
        state.grid[r, c] = C.MATERIAL_ID[leaves]
        state.counters["collect_" + item] += 1
    elif material == "water":
        state.thirst = C.VITAL_MAX
        state.counters["collect_drink"] += 1
    elif material == "grass":
        if state.rng.random() < C.SAPLING_PROB:
            _gain(state, "sapling")
            state.counters["collect_sapling"] += 1
    elif material == "plant":
        age = state.step_count - state.plant_ages.get((r, c), state.step_count)
        if age >= C.PLANT_RIPE_TICKS:
            state.hunger = C.VITAL_MAX
            state.counters["eat_plant"] += 1
            state.grid[r, c] = C.MATERIAL_ID["grass"]
            state.plant_ages.pop((r, c), None)


def _apply_place(state, action_name):
    rule = C.PLACEMENTS[action_name]
    dr, dc = C.FACING_DELTAS[state.facing]
    r, c = state.agent_r + dr, state.agent_c + dc
    if not (0 <= r < state.size and 0 <= c < state.size):
        return
    if C.MATERIALS[state.grid[r, c]] not in rule["onto"] or _mob_at(state, r, c):
        return
    for item, n in rule["uses"].items():
        if state.inventory[item] < n:
            return
    for item, n in rule["uses"].items():
        state.inventory[item] -= n
    state.grid[r, c] = C.MATERIAL_ID[rule["tile"]]
    if action_name == "place_plant":
        state.plant_ages[(r, c)] = state.step_count
    state.counters[action_name] += 1


def _apply_make(state, action_name):
    rule = C.RECIPES[action_name]
    for station in rule["near"]:
        if not _near_station(state, C.MATERIAL_ID[station]):
            return
    for item, n in rule["uses"].items():
        if state.inventory[item] < n:
            return
    for item, n in rule["uses"].items():
        state.inventory[item] -= n
    _gain(state, rule["gives"])
    state.counters[action_name] += 1


def _apply_move(state, action):
    # first press toward a new direction turns in place; the next one steps
    facing = C.MOVE_FACING[action]
    if state.facing != facing:
        state.facing = facing
        return
    dr, dc = C.FACING_DELTAS[facing]
    r, c = state.agent_r + dr, state.agent_c + dc
    if not (0 <= r < state.size and 0 <= c < state.size):
        return
    tile = state.grid[r, c]
    if tile not in C.PASSABLE or _mob_at(state, r, c):
        return
    state.agent_r, state.agent_c = r, c
    if tile in C.LETHAL:
        state.health = 0


def _step_mobs(state):
    night = state.daylight_phase == "night"
    occupied = {(m.r, m.c) for m in state.mobs}
    ar, ac = state.agent_r, state.agent_c
    for mob in list(state.mobs):
        if mob.cooldown > 0:
            mob.cooldown -= 1
        dist = abs(mob.r - ar) + abs(mob.c - ac)
        if mob.kind != "cow" and dist == 1:
            if mob.cooldown == 0:
                state.health = max(0, state.health - C.MOB_DAMAGE[mob.kind])
                mob.cooldown = C.MOB_ATTACK_COOLDOWN
                state.sleeping = False  # being hit interrupts sleep
            continue
        chase = (
            (mob.kind == "zombie" and night and dist <= C.ZOMBIE_CHASE_RADIUS)
            or (mob.kind == "skeleton" and dist <= C.SKELETON_CHASE_RADIUS)
        )
        if mob.kind == "cow" and state.rng.random() >= 0.5:
            continue
        if chase:
            options = []
            if mob.r != ar:
                options.append((mob.r + (1 if ar > mob.r else -1), mob.c))
            if mob.c != ac:
                options.append((mob.r, mob.c + (1 if ac > mob.c else -1)))
        else:
            d = C.FACING_DELTAS[int(state.rng.integers(4))]
            options = [(mob.r + d[0], mob.c + d[1])]
        for r, c in options:
            if not (0 <= r < state.size and 0 <= c < state.size):
                continue
            tile = state.grid[r, c]
            if tile not in C.PASSABLE or tile in C.LETHAL:
                continue
            if (r, c) == (ar, ac) or (r, c) in occupied:
                continue
            occupied.discard((mob.r, mob.c))
            mob.r, mob.c = r, c
            occupied.add((r, c))
            break


def _spawn_night_zombies(state):
    if state.daylight_phase != "night":
        return
    n_zombies = sum(1 for m in state.mobs if m.kind == "zombie")
    if n_zombies >= C.ZOMBIE_CAP or state.rng.random() >= C.ZOMBIE_SPAWN_PROB:
        return
    grass = np.nonzero(state.grid == C.MATERIAL_ID["grass"])
    if not grass[0].size:
        return
    i = int(state.rng.integers(grass[0].size))
    r, c = int(grass[0][i]), int(grass[1][i])
    if abs(r - state.agent_r) + abs(c - state.agent_c) < 6 or _mob_at(state, r, c):
        return
    state.mobs.append(Mob("zombie", r, c, C.MOB_HEALTH["zombie"]))


def _update_vitals(state):
    sc = state.step_count
    if state.sleeping:
        state.energy = min(C.VITAL_MAX, state.energy + 1)
    elif sc % C.ENERGY_DECAY_TICKS == 0:
        state.energy = max(0, state.energy - 1)
    if sc % C.HUNGER_DECAY_TICKS == 0:
        state.hunger = max(0, state.hunger - 1)
    if sc % C.THIRST_DECAY_TICKS == 0:
        state.thirst = max(0, state.thirst - 1)
    if state.health > 0:
        if min(state.hunger, state.thirst, state.energy) == 0:
            if sc % C.STARVATION_TICKS == 0:
                state.health -= 1
        elif state.health < C.VITAL_MAX and sc % C.HEALTH_REGEN_TICKS == 0:
            state.health += 1


def step_fast(state: WorldState, action: int) -> tuple[float, bool, set[str]]:
    """Advance one tick; returns (reward, done, newly_unlocked) without
    building an observation (the hot path for replay and batched rollouts)."""
    if state.done:
        raise EpisodeDoneError("step() called on a finished episode")

    health_before = state.health
    counters_before = None
    action = C.Action(action)

    # a deliberate action other than sleeping wakes the agent
    if state.sleeping and action not in (C.Action.noop, C.Action.sleep):
        state.sleeping = False

    if action in C.MOVE_FACING:
        _apply_move(state, action)
    elif action == C.Action.do:
        counters_before = dict(state.counters)
        _apply_do(state)
    elif action == C.Action.sleep:
        if state.daylight_phase == "night":
            state.sleeping = True
    elif action.name in C.PLACEMENTS:
        counters_before = dict(state.counters)
        _apply_place(state, action.name)
    elif action.name in C.RECIPES:
        counters_before = dict(state.counters)
        _apply_make(state, action.name)

    was_night = state.daylight_phase == "night"
    _step_mobs(state)
    _spawn_night_zombies(state)
    state.step_count += 1
    _update_vitals(state)
    if was_night and state.daylight_phase == "day" and state.sleeping:
        state.sleeping = False
        state.energy = C.VITAL_MAX
        state.counters["wake_up"] += 1
        if counters_before is None:
            counters_before = dict(state.counters)
            counters_before["wake_up"] -= 1

    newly = set()
    if counters_before is not None:
        for a in state.tracked:
            if state.counters[a] > 0 and counters_before[a] == 0:
                newly.add(a)
        state.unlocked |= newly

    reward = C.REWARD_PER_UNLOCK * len(newly)
    reward += C.REWARD_PER_HEALTH * (state.health - health_before)

    if state.health <= 0 or state.step_count >= state.max_steps:
        state.done = True
    return reward, state.done, newly


def step(state: WorldState, action: int) -> StepResult:
    """One tick with a full observation (the contract-facing entry point)."""
    reward, done, newly = step_fast(state, action)
    return StepResult(observe(state), reward, done, newly)


# --------------------------------------------------------------------------
# observations


def write_observation(state: WorldState, out_spatial: np.ndarray, out_status: np.ndarray) -> float:
    """Fill caller buffers; returns the daylight scalar."""
    r, c = state.agent_r, state.agent_c
    window = state.padded[r : r + C.VIEW_SIZE, c : c + C.VIEW_SIZE]
    out_spatial[: C.N_OBS_MATERIALS] = np.moveaxis(_EYE_MATERIALS[window], -1, 0)
    out_spatial[C.N_OBS_MATERIALS :] = 0.0
    half = C.VIEW_SIZE // 2
    for mob in state.mobs:
        dr, dc = mob.r - r, mob.c - c
        if -half <= dr <= half and -half <= dc <= half:
            out_spatial[C.N_OBS_MATERIALS + C.MOB_ID[mob.kind], dr + half, dc + half] = 1.0

    out_status[0] = state.health / C.VITAL_MAX
    out_status[1] = state.hunger / C.VITAL_MAX
    out_status[2] = state.thirst / C.VITAL_MAX
    out_status[3] = state.energy / C.VITAL_MAX
    for i, item in enumerate(C.ITEMS):
        out_status[4 + i] = state.inventory[item] / C.ITEM_MAX[item]
    out_status[16:20] = 0.0
    out_status[16 + state.facing] = 1.0
    return 1.0 if state.daylight_phase == "day" else 0.0


def observe(state: WorldState) -> Observation:
    spatial = np.empty((OBS_CHANNELS, C.VIEW_SIZE, C.VIEW_SIZE), dtype=np.float32)
    status = np.empty(STATUS_DIM, dtype=np.float32)
    daylight = write_observation(state, spatial, status)
    return Observation(spatial, status, daylight)


# --------------------------------------------------------------------------
# digests


def state_digest(state: WorldState) -> int:
    """Stable 64-bit digest of the full world state (rng stream included)."""
    h = hashlib.sha256()
    h.update(state.grid.tobytes())
    h.update(
        struct.pack(
            "<7i?",
            state.agent_r,
            state.agent_c,
            state.facing,
            state.health,
            state.hunger,
            state.thirst,
            state.energy,
            state.sleeping,
        )
    )
    h.update(struct.pack("<12i", *(state.inventory[i] for i in C.ITEMS)))
    for mob in state.mobs:
        h.update(struct.pack("<4ib", mob.r, mob.c, mob.health, mob.cooldown, C.MOB_ID[mob.kind]))
    h.update(struct.pack("<22i", *(state.counters[a] for a in C.ACHIEVEMENTS)))
    h.update(struct.pack("<2i?", state.step_count, state.max_steps, state.done))
    for (r, c), t in sorted(state.plant_ages.items()):
        h.update(struct.pack("<3i", r, c, t))
    h.update(json.dumps(state.rng.bit_generator.state, sort_keys=True).encode())
    return int.from_bytes(h.digest()[:8], "big")
