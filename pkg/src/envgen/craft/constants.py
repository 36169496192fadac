"""Game data for the survival simulator: tiles, items, recipes, achievements.

Everything gameplay-visible is a table in this module so tests can assert
against the same data the engine runs on.
"""

from __future__ import annotations

from enum import IntEnum

# --------------------------------------------------------------------------
# Tiles

MATERIALS = (
    "grass",
    "sand",
    "water",
    "stone",
    "tree",
    "coal_ore",
    "iron_ore",
    "diamond_ore",
    "path",
    "table",
    "furnace",
    "plant",
    "lava",
)
MATERIAL_ID = {name: i for i, name in enumerate(MATERIALS)}

# Extra pseudo-material used only in observations for cells outside the map.
OUT_OF_BOUNDS_ID = len(MATERIALS)
N_OBS_MATERIALS = len(MATERIALS) + 1

# Walkable materials. Lava is walkable and lethal; water blocks movement
# (place_stone over water is the way across).
PASSABLE = frozenset(
    MATERIAL_ID[m] for m in ("grass", "sand", "path", "lava")
)
LETHAL = frozenset((MATERIAL_ID["lava"],))

# --------------------------------------------------------------------------
# Inventory

ITEMS = (
    "sapling",
    "wood",
    "stone",
    "coal",
    "iron",
    "diamond",
    "wood_pickaxe",
    "stone_pickaxe",
    "iron_pickaxe",
    "wood_sword",
    "stone_sword",
    "iron_sword",
)
TOOL_ITEMS = frozenset(i for i in ITEMS if i.endswith(("_pickaxe", "_sword")))
# Stackable materials cap at 9, tools at 1.
ITEM_MAX = {name: (1 if name in TOOL_ITEMS else 9) for name in ITEMS}

# --------------------------------------------------------------------------
# Actions


class Action(IntEnum):
    noop = 0
    move_up = 1
    move_down = 2
    move_left = 3
    move_right = 4
    do = 5
    sleep = 6
    place_table = 7
    place_furnace = 8
    place_stone = 9
    place_plant = 10
    make_wood_pickaxe = 11
    make_stone_pickaxe = 12
    make_iron_pickaxe = 13
    make_wood_sword = 14
    make_stone_sword = 15
    make_iron_sword = 16


ACTION_NAMES = tuple(a.name for a in Action)
N_ACTIONS = len(ACTION_NAMES)

# facing: N, S, E, W -> row/col deltas
FACING_DELTAS = ((-1, 0), (1, 0), (0, 1), (0, -1))
MOVE_FACING = {
    Action.move_up: 0,
    Action.move_down: 1,
    Action.move_right: 2,
    Action.move_left: 3,
}

# --------------------------------------------------------------------------
# Crafting and placement. `near` lists stations that must be within
# Chebyshev distance 1 of the agent.

RECIPES = {
    "make_wood_pickaxe": {"uses": {"wood": 1}, "near": ("table",), "gives": "wood_pickaxe"},
    "make_stone_pickaxe": {"uses": {"wood": 1, "stone": 1}, "near": ("table",), "gives": "stone_pickaxe"},
    "make_iron_pickaxe": {
        "uses": {"wood": 1, "coal": 1, "iron": 1},
        "near": ("table", "furnace"),
        "gives": "iron_pickaxe",
    },
    "make_wood_sword": {"uses": {"wood": 1}, "near": ("table",), "gives": "wood_sword"},
    "make_stone_sword": {"uses": {"wood": 1, "stone": 1}, "near": ("table",), "gives": "stone_sword"},
    "make_iron_sword": {
        "uses": {"wood": 1, "coal": 1, "iron": 1},
        "near": ("table", "furnace"),
        "gives": "iron_sword",
    },
}

PLACEMENTS = {
    "place_table": {"uses": {"wood": 1}, "onto": ("grass", "sand", "path"), "tile": "table"},
    "place_furnace": {"uses": {"stone": 1}, "onto": ("grass", "sand", "path"), "tile": "furnace"},
    "place_stone": {"uses": {"stone": 1}, "onto": ("grass", "sand", "path", "water"), "tile": "stone"},
    "place_plant": {"uses": {"sapling": 1}, "onto": ("grass",), "tile": "plant"},
}

# Mining requirements: material -> (required pickaxe or None, yielded item, leaves tile)
MINEABLE = {
    "tree": (None, "wood", "tree"),  # trees regrow instantly (renewable)
    "stone": ("wood_pickaxe", "stone", "path"),
    "coal_ore": ("wood_pickaxe", "coal", "path"),
    "iron_ore": ("stone_pickaxe", "iron", "path"),
    "diamond_ore": ("iron_pickaxe", "diamond", "path"),
}

# --------------------------------------------------------------------------
# Achievements: the 22 goals and their prerequisite DAG.

ACHIEVEMENTS = (
    "collect_wood",
    "place_table",
    "eat_cow",
    "collect_sapling",
    "collect_drink",
    "make_wood_pickaxe",
    "make_wood_sword",
    "place_plant",
    "defeat_zombie",
    "collect_stone",
    "place_stone",
    "eat_plant",
    "defeat_skeleton",
    "collect_coal",
    "make_stone_pickaxe",
    "make_stone_sword",
    "wake_up",
    "place_furnace",
    "collect_iron",
    "make_iron_pickaxe",
    "make_iron_sword",
    "collect_diamond",
)

# achievement -> direct prerequisites (all must unlock first)
PREREQUISITES = {
    "collect_wood": (),
    "place_table": ("collect_wood",),
    "eat_cow": (),
    "collect_sapling": (),
    "collect_drink": (),
    "make_wood_pickaxe": ("place_table",),
    "make_wood_sword": ("place_table",),
    "place_plant": ("collect_sapling",),
    "defeat_zombie": (),
    "collect_stone": ("make_wood_pickaxe",),
    "place_stone": ("collect_stone",),
    "eat_plant": ("place_plant",),
    "defeat_skeleton": (),
    "collect_coal": ("make_wood_pickaxe",),
    "make_stone_pickaxe": ("collect_stone",),
    "make_stone_sword": ("collect_stone",),
    "wake_up": (),
    "place_furnace": ("collect_stone",),
    "collect_iron": ("make_stone_pickaxe",),
    "make_iron_pickaxe": ("place_furnace", "collect_coal", "collect_iron"),
    "make_iron_sword": ("place_furnace", "collect_coal", "collect_iron"),
    "collect_diamond": ("make_iron_pickaxe",),
}

# --------------------------------------------------------------------------
# Vitals and timing. A random agent on these constants survives a few
# hundred steps, which keeps episode turnover high at desk scale.

HUNGER_DECAY_TICKS = 25
THIRST_DECAY_TICKS = 20
ENERGY_DECAY_TICKS = 40
STARVATION_TICKS = 10  # health -1 per this many ticks while any vital is 0
HEALTH_REGEN_TICKS = 30  # health +1 while all vitals > 0
VITAL_MAX = 9

DAY_TICKS = 200
NIGHT_TICKS = 100

PLANT_RIPE_TICKS = 45

DEFAULT_WORLD_SIZE = 64
DEFAULT_MAX_STEPS = 10_000
VIEW_SIZE = 9  # local observation window (odd)

# --------------------------------------------------------------------------
# Mobs

MOB_KINDS = ("zombie", "skeleton", "cow")
MOB_ID = {name: i for i, name in enumerate(MOB_KINDS)}
MOB_HEALTH = {"zombie": 5, "skeleton": 3, "cow": 3}
MOB_DAMAGE = {"zombie": 1, "skeleton": 1, "cow": 0}
MOB_ATTACK_COOLDOWN = 2
ZOMBIE_CHASE_RADIUS = 8
SKELETON_CHASE_RADIUS = 4
ZOMBIE_SPAWN_PROB = 0.05  # per night tick while below cap
ZOMBIE_CAP = 3
SAPLING_PROB = 0.1  # chance `do` on grass yields a sapling

# sword tier -> damage dealt by the agent's `do` on a mob
ATTACK_DAMAGE = {"none": 1, "wood_sword": 2, "stone_sword": 3, "iron_sword": 5}

REWARD_PER_UNLOCK = 1.0
REWARD_PER_HEALTH = 0.1
