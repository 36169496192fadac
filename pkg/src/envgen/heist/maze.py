"""Lock-key maze game: ordered colour locks guard a gem.

Feasibility is guaranteed by construction: the maze is carved as a spanning
tree, locks sit on the unique start-to-gem path, and extra wall removal only
ever joins cells on the same side of every lock. Colours open strictly in
blue < green < red order; configs with fewer layers pre-open the earlier
colours.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..craft.world import Observation, StepResult
from ..errors import ConfigParseError, ConfigSchemaError, ConfigTypeError

WALL, FLOOR = 0, 1
LOCK_ORDER = ("blue", "green", "red")
MAZE_SIZES = (9, 11, 13, 15)
MAX_MAZE_SIZE = 15
WALL_DENSITIES = ("sparse", "normal", "dense")
_REMOVAL_PROB = {"sparse": 0.25, "normal": 0.08, "dense": 0.0}
STEP_CAP = 500
GEM_REWARD = 10.0
ACHIEVEMENT = "steal_gem"

# observation channels: wall, floor, agent, gem, 3 keys, 3 locks
OBS_CHANNELS = 4 + 2 * len(LOCK_ORDER)
STATUS_DIM = 2 * len(LOCK_ORDER)  # held keys + opened locks


class HeistDoneError(RuntimeError):
    """Raised when a finished episode is stepped again."""


class Action:
    up, down, left, right, noop = range(5)


ACTION_DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1), (0, 0))
ACTION_NAMES = ("up", "down", "left", "right", "noop")


@dataclass(frozen=True)
class HeistConfig:
    maze_size: int = 13
    active_lock_layers: int = 3
    keys_in_inventory: tuple = ()
    wall_density: str = "normal"
    purpose: str = ""

    @property
    def active_colors(self) -> tuple:
        """Innermost suffix of the colour order; earlier colours are pre-opened."""
        k = self.active_lock_layers
        return LOCK_ORDER[len(LOCK_ORDER) - k :] if k else ()

    def to_dict(self) -> dict:
        out = {
            "maze_size": self.maze_size,
            "active_lock_layers": self.active_lock_layers,
            "keys_in_inventory": list(self.keys_in_inventory),
            "wall_density": self.wall_density,
        }
        if self.purpose:
            out["purpose"] = self.purpose
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def parse_heist_config_obj(data: dict) -> HeistConfig:
    if not isinstance(data, dict):
        raise ConfigTypeError(f"heist config must be a JSON object, got {type(data).__name__}")
    fields = {}
    for key, value in data.items():
        if key == "maze_size" or key == "active_lock_layers":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigTypeError(f"{key!r} must be an integer, got {value!r}")
            fields[key] = value
        elif key == "keys_in_inventory":
            if not isinstance(value, (list, tuple)):
                raise ConfigTypeError(f"'keys_in_inventory' must be a list, got {value!r}")
            colors = []
            for color in value:
                if color not in LOCK_ORDER:
                    raise ConfigSchemaError(f"unknown key colour {color!r}", key=str(color))
                colors.append(color)
            fields["keys_in_inventory"] = tuple(dict.fromkeys(colors))
        elif key == "wall_density":
            if not isinstance(value, str):
                raise ConfigTypeError(f"'wall_density' must be a string, got {value!r}")
            density = value.strip().lower()
            if density not in WALL_DENSITIES:
                raise ConfigSchemaError(
                    f"'wall_density' must be one of {', '.join(WALL_DENSITIES)}; got {value!r}",
                    key=key,
                )
            fields["wall_density"] = density
        elif key == "purpose":
            if not isinstance(value, str):
                raise ConfigTypeError(f"'purpose' must be a string, got {value!r}")
            fields["purpose"] = value
        else:
            raise ConfigSchemaError(f"unknown config key {key!r}", key=key)
    return HeistConfig(**fields)


def parse_heist_config_json(text: str) -> HeistConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"malformed config JSON: {exc.msg}", offset=exc.pos) from None
    return parse_heist_config_obj(data)


def clamp_heist_config(config: HeistConfig) -> HeistConfig:
    """Snap sizes/layers into range and drop keys for inactive layers."""
    size = min(max(config.maze_size, MAZE_SIZES[0]), MAZE_SIZES[-1])
    size = min(MAZE_SIZES, key=lambda s: (abs(s - size), s))
    layers = min(max(config.active_lock_layers, 0), len(LOCK_ORDER))
    active = LOCK_ORDER[len(LOCK_ORDER) - layers :] if layers else ()
    keys = tuple(c for c in config.keys_in_inventory if c in active)
    return HeistConfig(
        maze_size=size,
        active_lock_layers=layers,
        keys_in_inventory=keys,
        wall_density=config.wall_density,
        purpose=config.purpose,
    )


@dataclass(eq=False)
class HeistState:
    config: HeistConfig
    seed: int
    grid: np.ndarray  # WALL/FLOOR, shape (size, size)
    agent: tuple
    gem: tuple
    lock_positions: dict  # colour -> cell, closed locks only
    key_positions: dict  # colour -> cell, keys still on the floor
    held_keys: set
    opened: set
    step_count: int = 0
    done: bool = False
    success: bool = False
    rng_state: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.grid.shape[0]


def _carve_tree(size: int, rng: np.random.Generator) -> np.ndarray:
    """Recursive-backtracker spanning tree over the odd-coordinate cell lattice."""
    grid = np.full((size, size), WALL, dtype=np.uint8)
    n_cells = (size - 1) // 2
    start = (int(rng.integers(n_cells)), int(rng.integers(n_cells)))
    stack = [start]
    visited = {start}
    grid[1 + 2 * start[0], 1 + 2 * start[1]] = FLOOR
    while stack:
        cr, cc = stack[-1]
        neighbours = []
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = cr + dr, cc + dc
            if 0 <= nr < n_cells and 0 <= nc < n_cells and (nr, nc) not in visited:
                neighbours.append((nr, nc))
        if not neighbours:
            stack.pop()
            continue
        nr, nc = neighbours[int(rng.integers(len(neighbours)))]
        grid[1 + cr + nr, 1 + cc + nc] = FLOOR  # knock through the shared wall
        grid[1 + 2 * nr, 1 + 2 * nc] = FLOOR
        visited.add((nr, nc))
        stack.append((nr, nc))
    return grid


def _bfs_tree(grid: np.ndarray, start: tuple):
    """Parents and distances over floor cells (the carved graph is a tree)."""
    size = grid.shape[0]
    parent = {start: None}
    dist = {start: 0}
    queue = [start]
    head = 0
    while head < len(queue):
        r, c = queue[head]
        head += 1
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < size and 0 <= nc < size and grid[nr, nc] == FLOOR and (nr, nc) not in parent:
                parent[(nr, nc)] = (r, c)
                dist[(nr, nc)] = dist[(r, c)] + 1
                queue.append((nr, nc))
    return parent, dist


def _zone_map(grid, start, lock_cells):
    """Zone index per floor cell: number of locks separating it from start."""
    size = grid.shape[0]
    lock_rank = {cell: i for i, cell in enumerate(lock_cells)}
    zone = {start: 0}
    frontier = [start]
    while frontier:
        r, c = frontier.pop()
        z = zone[(r, c)]
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            cell = (r + dr, c + dc)
            if not (0 <= cell[0] < size and 0 <= cell[1] < size):
                continue
            if grid[cell] != FLOOR or cell in zone:
                continue
            zone[cell] = lock_rank[cell] + 1 if cell in lock_rank else z
            frontier.append(cell)
    return zone


def generate_maze(config: HeistConfig, seed: int) -> HeistState:
    """Deterministic solvable maze for a validated config."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    size = config.maze_size
    active = config.active_colors
    k = len(active)

    for _attempt in range(50):
        grid = _carve_tree(size, rng)
        floors = [tuple(p) for p in np.argwhere(grid == FLOOR)]
        start = floors[int(rng.integers(len(floors)))]
        parent, dist = _bfs_tree(grid, start)
        gem = max(dist, key=lambda cell: (dist[cell], cell))

        path = [gem]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()  # start ... gem
        if len(path) < k + 4:  # too cramped to gate; carve a fresh layout
            continue

        lock_cells = []
        if k:
            # evenly spaced interior path cells, keeping room for keys between
            lo, hi = 2, len(path) - 2
            span = hi - lo
            lock_cells = [path[min(lo + (i * span) // k, hi)] for i in range(k)]

        zone = _zone_map(grid, start, lock_cells)
        taken = {start, gem, *lock_cells}
        key_positions = {}
        placed_all = True
        for i, color in enumerate(active):
            if color in config.keys_in_inventory:
                continue
            candidates = [
                cell for cell, z in sorted(zone.items()) if z <= i and cell not in taken
            ]
            if not candidates:
                placed_all = False
                break
            cell = candidates[int(rng.integers(len(candidates)))]
            key_positions[color] = cell
            taken.add(cell)
        if not placed_all:
            continue

        # optional extra openings, never across a lock boundary
        p_remove = _REMOVAL_PROB[config.wall_density]
        if p_remove:
            lock_set = set(lock_cells)
            for r in range(1, size - 1):
                for c in range(1, size - 1):
                    if grid[r, c] != WALL:
                        continue
                    pairs = (((r - 1, c), (r + 1, c)), ((r, c - 1), (r, c + 1)))
                    for a, b in pairs:
                        if (
                            grid[a] == FLOOR
                            and grid[b] == FLOOR
                            and a not in lock_set
                            and b not in lock_set
                            and zone.get(a) == zone.get(b)
                            and rng.random() < p_remove
                        ):
                            grid[r, c] = FLOOR
                            zone[(r, c)] = zone[a]
                            break

        opened = set(LOCK_ORDER) - set(active)  # missing earlier layers pre-open
        return HeistState(
            config=config,
            seed=int(seed),
            grid=grid,
            agent=start,
            gem=gem,
            lock_positions={color: cell for color, cell in zip(active, lock_cells)},
            key_positions=key_positions,
            held_keys=set(config.keys_in_inventory),
            opened=opened,
            rng_state=rng.bit_generator.state,
        )
    raise RuntimeError(f"could not generate a solvable maze for {config} seed {seed}")


def _order_satisfied(color: str, opened: set) -> bool:
    return all(earlier in opened for earlier in LOCK_ORDER[: LOCK_ORDER.index(color)])


def step_fast(state: HeistState, action: int) -> tuple[float, bool, set]:
    """Advance one tick in place; (reward, done, newly_unlocked)."""
    if state.done:
        raise HeistDoneError("step() called on a finished episode")
    dr, dc = ACTION_DELTAS[action]
    r, c = state.agent[0] + dr, state.agent[1] + dc
    newly = set()
    reward = 0.0
    if (dr or dc) and 0 <= r < state.size and 0 <= c < state.size and state.grid[r, c] == FLOOR:
        target = (r, c)
        blocked = False
        for color, cell in state.lock_positions.items():
            if cell == target:
                if color in state.held_keys and _order_satisfied(color, state.opened):
                    state.opened.add(color)
                    state.held_keys.discard(color)  # keys are consumed
                    del state.lock_positions[color]
                else:
                    blocked = True
                break
        if not blocked:
            state.agent = target
            for color, cell in list(state.key_positions.items()):
                if cell == target:
                    state.held_keys.add(color)
                    del state.key_positions[color]
            if target == state.gem:
                state.done = True
                state.success = True
                reward = GEM_REWARD
                newly = {ACHIEVEMENT}
    state.step_count += 1
    if state.step_count >= STEP_CAP:
        state.done = True
    return reward, state.done, newly


def observe(state: HeistState) -> Observation:
    spatial = np.empty((OBS_CHANNELS, MAX_MAZE_SIZE, MAX_MAZE_SIZE), dtype=np.float32)
    status = np.empty(STATUS_DIM, dtype=np.float32)
    write_observation(state, spatial, status)
    return Observation(spatial, status, 1.0)


def write_observation(state: HeistState, out_spatial: np.ndarray, out_status: np.ndarray) -> None:
    """Full-maze one-hot view, centred and wall-padded to the maximum size."""
    out_spatial[:] = 0.0
    out_spatial[WALL] = 1.0  # padding reads as wall
    off = (MAX_MAZE_SIZE - state.size) // 2
    view = slice(off, off + state.size)
    out_spatial[WALL, view, view] = state.grid == WALL
    out_spatial[FLOOR, view, view] = state.grid == FLOOR
    out_spatial[2, state.agent[0] + off, state.agent[1] + off] = 1.0
    if not state.success:
        out_spatial[3, state.gem[0] + off, state.gem[1] + off] = 1.0
    for i, color in enumerate(LOCK_ORDER):
        if color in state.key_positions:
            r, c = state.key_positions[color]
            out_spatial[4 + i, r + off, c + off] = 1.0
        if color in state.lock_positions:
            r, c = state.lock_positions[color]
            out_spatial[7 + i, r + off, c + off] = 1.0
    for i, color in enumerate(LOCK_ORDER):
        out_status[i] = 1.0 if color in state.held_keys else 0.0
        out_status[3 + i] = 1.0 if color in state.opened else 0.0


def step(state: HeistState, action: int) -> StepResult:
    reward, done, newly = step_fast(state, action)
    return StepResult(observe(state), reward, done, newly)


def state_digest(state: HeistState) -> int:
    h = hashlib.sha256()
    h.update(state.grid.tobytes())
    h.update(struct.pack("<5i??", *state.agent, *state.gem, state.step_count,
                         state.done, state.success))
    for color in LOCK_ORDER:
        lock = state.lock_positions.get(color, (-1, -1))
        key = state.key_positions.get(color, (-1, -1))
        h.update(struct.pack("<4i??", *lock, *key,
                             color in state.held_keys, color in state.opened))
    return int.from_bytes(h.digest()[:8], "big")


# --------------------------------------------------------------------------
# ASCII fixture format: # wall, . floor, b/g/r keys, B/G/R locks, * gem, @ agent


def maze_to_ascii(state: HeistState) -> str:
    rows = [["#" if state.grid[r, c] == WALL else "." for c in range(state.size)]
            for r in range(state.size)]
    for color, (r, c) in state.key_positions.items():
        rows[r][c] = color[0]
    for color, (r, c) in state.lock_positions.items():
        rows[r][c] = color[0].upper()
    gr, gc = state.gem
    rows[gr][gc] = "*"
    ar, ac = state.agent
    rows[ar][ac] = "@"
    return "\n".join("".join(row) for row in rows)


def maze_from_ascii(text: str, *, held=(), opened=(), config: HeistConfig | None = None) -> HeistState:
    lines = [line for line in text.splitlines() if line.strip()]
    size = len(lines)
    grid = np.full((size, size), FLOOR, dtype=np.uint8)
    agent = gem = None
    locks, keys = {}, {}
    by_letter = {c[0]: c for c in LOCK_ORDER}
    for r, line in enumerate(lines):
        if len(line) != size:
            raise ValueError(f"row {r} has length {len(line)}; expected square maze of {size}")
        for c, ch in enumerate(line):
            if ch == "#":
                grid[r, c] = WALL
            elif ch == "@":
                agent = (r, c)
            elif ch == "*":
                gem = (r, c)
            elif ch in by_letter:
                keys[by_letter[ch]] = (r, c)
            elif ch.lower() in by_letter and ch.isupper():
                locks[by_letter[ch.lower()]] = (r, c)
            elif ch != ".":
                raise ValueError(f"unknown maze glyph {ch!r} at ({r},{c})")
    if agent is None or gem is None:
        raise ValueError("maze needs both an agent '@' and a gem '*'")
    opened = set(opened) | (set(LOCK_ORDER) - set(locks) - set(opened))
    if config is None:
        config = HeistConfig(maze_size=size if size in MAZE_SIZES else 13,
                             active_lock_layers=len(locks))
    return HeistState(
        config=config,
        seed=0,
        grid=grid,
        agent=agent,
        gem=gem,
        lock_positions=locks,
        key_positions=keys,
        held_keys=set(held),
        opened=set(opened),
    )


def solve(state: HeistState) -> list[int] | None:
    """Action tape reaching the gem, or None. Searches the staged reachability
    problem: fetch the next needed key, open its lock, repeat, then walk to
    the gem."""
    sim = HeistState(
        config=state.config,
        seed=state.seed,
        grid=state.grid.copy(),
        agent=state.agent,
        gem=state.gem,
        lock_positions=dict(state.lock_positions),
        key_positions=dict(state.key_positions),
        held_keys=set(state.held_keys),
        opened=set(state.opened),
    )
    tape = []
    remaining = [c for c in LOCK_ORDER if c in sim.lock_positions]
    for color in remaining:
        if color not in sim.held_keys:
            leg = _walk(sim, sim.key_positions.get(color))
            if leg is None:
                return None
            tape += leg
        leg = _walk(sim, sim.lock_positions.get(color))
        if leg is None:
            return None
        tape += leg
    leg = _walk(sim, sim.gem)
    if leg is None:
        return None
    return tape + leg


def _walk(sim: HeistState, goal) -> list[int] | None:
    """BFS through currently-enterable cells; replays the moves on ``sim``."""
    if goal is None:
        return None
    size = sim.size
    closed = {cell for color, cell in sim.lock_positions.items()
              if not (color in sim.held_keys and _order_satisfied(color, sim.opened))}
    start = sim.agent
    prev = {start: None}
    queue, head = [start], 0
    while head < len(queue):
        cell = queue[head]
        head += 1
        if cell == goal:
            break
        if cell in sim.lock_positions.values():
            continue  # opening a lock ends the leg; plan the rest afterwards
        for a, (dr, dc) in enumerate(ACTION_DELTAS[:4]):
            nxt = (cell[0] + dr, cell[1] + dc)
            if not (0 <= nxt[0] < size and 0 <= nxt[1] < size):
                continue
            if sim.grid[nxt] != FLOOR or nxt in closed or nxt in prev:
                continue
            prev[nxt] = (cell, a)
            queue.append(nxt)
    if goal not in prev:
        return None
    moves = []
    cell = goal
    while prev[cell] is not None:
        cell, action = prev[cell]
        moves.append(action)
    moves.reverse()
    for action in moves:
        step_fast(sim, action)
    return moves
