"""Seeded terrain, resource, and mob generation for the survival world."""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from . import constants as C

_DENSITIES = json.loads(
    resources.files("envgen.data").joinpath("biome_densities.json").read_text()
)
BIOME_TABLE = _DENSITIES["biomes"]
RARITY_MULTIPLIERS = _DENSITIES["rarity_multipliers"]


def value_noise(rng: np.random.Generator, size: int, coarse: int = 6) -> np.ndarray:
    """Smooth ~N(0,1) field from a bilinearly upsampled coarse lattice."""
    lattice = rng.standard_normal((coarse + 1, coarse + 1))
    xs = np.linspace(0.0, coarse, size)
    i0 = np.clip(xs.astype(np.int64), 0, coarse - 1)
    frac = xs - i0
    # interpolate rows, then columns
    rows = lattice[i0] * (1.0 - frac)[:, None] + lattice[i0 + 1] * frac[:, None]
    field = rows[:, i0] * (1.0 - frac)[None, :] + rows[:, i0 + 1] * frac[None, :]
    return field


def _interior_stone_mask(grid: np.ndarray) -> np.ndarray:
    """Stone cells whose four neighbours are stone (ore seeds keep the
    ore-touches-only-stone-or-ore invariant)."""
    stone = grid == C.MATERIAL_ID["stone"]
    inner = stone.copy()
    inner[1:, :] &= stone[:-1, :]
    inner[:-1, :] &= stone[1:, :]
    inner[:, 1:] &= stone[:, :-1]
    inner[:, :-1] &= stone[:, 1:]
    inner[0, :] = inner[-1, :] = False
    inner[:, 0] = inner[:, -1] = False
    return inner


def _rarity_factor(tier: str) -> float:
    return RARITY_MULTIPLIERS[tier]


def generate_terrain(config, rng: np.random.Generator, size: int) -> np.ndarray:
    """Material-id grid for the configured biome."""
    biome = BIOME_TABLE[config.target_biome]
    elevation = value_noise(rng, size)
    moisture = value_noise(rng, size)

    grid = np.full((size, size), C.MATERIAL_ID["grass"], dtype=np.uint8)
    grid[elevation < biome["sand_level"]] = C.MATERIAL_ID["sand"]
    grid[elevation < biome["water_level"]] = C.MATERIAL_ID["water"]
    grid[elevation > biome["stone_level"]] = C.MATERIAL_ID["stone"]
    grid[elevation > biome["lava_level"]] = C.MATERIAL_ID["lava"]

    # trees favour moist grass
    p_tree = np.clip(_rarity_factor(config.tree_rarity) * biome["tree"], 0.0, 0.85)
    tree_p = np.where(moisture > 0.45, 2.0 * p_tree, 0.6 * p_tree)
    on_grass = grid == C.MATERIAL_ID["grass"]
    grid[on_grass & (rng.random((size, size)) < tree_p)] = C.MATERIAL_ID["tree"]

    # ores only in the interior of stone regions
    interior = _interior_stone_mask(grid)
    idx = np.flatnonzero(interior)
    if idx.size:
        draw = rng.random(idx.size)
        p_coal = min(_rarity_factor(config.coal_rarity) * biome["coal"], 0.3)
        p_iron = min(_rarity_factor(config.iron_rarity) * biome["iron"], 0.3)
        p_diam = min(_rarity_factor(config.diamond_rarity) * biome["diamond"], 0.3)
        flat = grid.reshape(-1)
        flat[idx[draw < p_coal]] = C.MATERIAL_ID["coal_ore"]
        flat[idx[(draw >= p_coal) & (draw < p_coal + p_iron)]] = C.MATERIAL_ID["iron_ore"]
        flat[idx[(draw >= p_coal + p_iron) & (draw < p_coal + p_iron + p_diam)]] = (
            C.MATERIAL_ID["diamond_ore"]
        )
    return grid


def pick_start(grid: np.ndarray, rng: np.random.Generator) -> tuple[int, int]:
    """Spawn cell: safe walkable ground, biased toward the map centre."""
    size = grid.shape[0]
    safe = (grid == C.MATERIAL_ID["grass"]) | (grid == C.MATERIAL_ID["sand"])
    rows, cols = np.nonzero(safe)
    if rows.size == 0:  # degenerate map: flatten a centre cell into grass
        r = c = size // 2
        grid[r, c] = C.MATERIAL_ID["grass"]
        return r, c
    centre = (size - 1) / 2.0
    dist = np.abs(rows - centre) + np.abs(cols - centre)
    order = np.argsort(dist, kind="stable")
    k = max(1, min(32, order.size))
    pick = order[int(rng.integers(k))]
    return int(rows[pick]), int(cols[pick])


def spawn_initial_mobs(grid, rng, start, config):
    """Cows on grass, skeletons next to stone; zombies arrive at night."""
    from .world import Mob  # local import to avoid a cycle

    biome = BIOME_TABLE[config.target_biome]
    size = grid.shape[0]
    mobs = []
    occupied = {start}

    def far_enough(r, c, d=3):
        return abs(r - start[0]) + abs(c - start[1]) >= d

    grass_rows, grass_cols = np.nonzero(grid == C.MATERIAL_ID["grass"])
    if grass_rows.size:
        order = rng.permutation(grass_rows.size)
        placed = 0
        for i in order:
            if placed >= biome["cows"]:
                break
            r, c = int(grass_rows[i]), int(grass_cols[i])
            if (r, c) not in occupied and far_enough(r, c):
                mobs.append(Mob("cow", r, c, C.MOB_HEALTH["cow"]))
                occupied.add((r, c))
                placed += 1

    if biome["skeletons"]:
        stone = grid == C.MATERIAL_ID["stone"]
        near_stone = np.zeros_like(stone)
        near_stone[1:, :] |= stone[:-1, :]
        near_stone[:-1, :] |= stone[1:, :]
        near_stone[:, 1:] |= stone[:, :-1]
        near_stone[:, :-1] |= stone[:, 1:]
        walkable = np.isin(grid, [C.MATERIAL_ID["grass"], C.MATERIAL_ID["sand"], C.MATERIAL_ID["path"]])
        rows, cols = np.nonzero(near_stone & walkable)
        if rows.size:
            order = rng.permutation(rows.size)
            placed = 0
            for i in order:
                if placed >= biome["skeletons"]:
                    break
                r, c = int(rows[i]), int(cols[i])
                if (r, c) not in occupied and far_enough(r, c, 5):
                    mobs.append(Mob("skeleton", r, c, C.MOB_HEALTH["skeleton"]))
                    occupied.add((r, c))
                    placed += 1
    _ = size
    return mobs
