"""Schema, parsing, validation, and clamping of generated environment configs.

This is the bridge from LLM completion text to simulator initialisation. The
JSON surface mirrors what the generation prompt advertises: biome, four
resource-rarity knobs, and the twelve starting-inventory items as top-level
keys. Out-of-range counts are clamped, never rejected; unknown keys and bad
enum values are hard errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .craft.constants import ITEM_MAX, ITEMS
from .errors import (
    ConfigParseError,
    ConfigSchemaError,
    ConfigTypeError,
    ExtractionError,
)

BIOMES = ("grassland", "mountain", "beaches", "natural")
RARITIES = ("very_common", "common", "rare")
RARITY_FIELDS = ("coal_rarity", "iron_rarity", "diamond_rarity", "tree_rarity")

_ITEM_SET = frozenset(ITEMS)
_KNOWN_KEYS = frozenset(
    ("target_biome", "purpose", "starting_inventory") + RARITY_FIELDS
) | _ITEM_SET


@dataclass(frozen=True)
class EnvConfig:
    """One generated training environment for the survival game."""

    target_biome: str = "natural"
    coal_rarity: str = "common"
    iron_rarity: str = "common"
    diamond_rarity: str = "common"
    tree_rarity: str = "common"
    starting_inventory: dict = field(default_factory=dict)
    purpose: str = ""

    def to_dict(self) -> dict:
        out = {
            "target_biome": self.target_biome,
            "coal_rarity": self.coal_rarity,
            "iron_rarity": self.iron_rarity,
            "diamond_rarity": self.diamond_rarity,
            "tree_rarity": self.tree_rarity,
        }
        for item in ITEMS:  # canonical order, zero counts omitted
            count = self.starting_inventory.get(item, 0)
            if count:
                out[item] = count
        if self.purpose:
            out["purpose"] = self.purpose
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "EnvConfig":
        return parse_config_obj(data)


def _canonical_rarity(value: str) -> str:
    return value.strip().lower().replace(" ", "_")


def _check_count(key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigTypeError(f"{key!r} must be an integer count, got {value!r}")
    return value


def parse_config_obj(data: dict) -> EnvConfig:
    """Validate one decoded JSON object into an EnvConfig (no clamping)."""
    if not isinstance(data, dict):
        raise ConfigTypeError(f"environment config must be a JSON object, got {type(data).__name__}")
    fields = {"starting_inventory": {}}
    for key, value in data.items():
        if key not in _KNOWN_KEYS:
            raise ConfigSchemaError(f"unknown config key {key!r}", key=key)
        if key == "target_biome":
            if not isinstance(value, str):
                raise ConfigTypeError(f"'target_biome' must be a string, got {value!r}")
            biome = value.strip().lower()
            if biome not in BIOMES:
                raise ConfigSchemaError(
                    f"'target_biome' must be one of {', '.join(BIOMES)}; got {value!r}",
                    key=key,
                )
            fields["target_biome"] = biome
        elif key in RARITY_FIELDS:
            if not isinstance(value, str):
                raise ConfigTypeError(f"{key!r} must be a string, got {value!r}")
            rarity = _canonical_rarity(value)
            if rarity not in RARITIES:
                raise ConfigSchemaError(
                    f"{key!r} must be one of very common, common, rare; got {value!r}",
                    key=key,
                )
            fields[key] = rarity
        elif key == "purpose":
            if not isinstance(value, str):
                raise ConfigTypeError(f"'purpose' must be a string, got {value!r}")
            fields["purpose"] = value
        elif key == "starting_inventory":
            if not isinstance(value, dict):
                raise ConfigTypeError(f"'starting_inventory' must be an object, got {value!r}")
            for item, count in value.items():
                if item not in _ITEM_SET:
                    raise ConfigSchemaError(f"unknown inventory item {item!r}", key=item)
                fields["starting_inventory"][item] = _check_count(item, count)
        else:  # a bare item count at the top level
            fields["starting_inventory"][key] = _check_count(key, value)
    return EnvConfig(**fields)


def parse_config_json(text: str) -> EnvConfig:
    """Parse one JSON object; missing fields default, unknown keys error."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"malformed config JSON: {exc.msg}", offset=exc.pos) from None
    return parse_config_obj(data)


def clamp(config: EnvConfig) -> EnvConfig:
    """Clip inventory counts into simulator-legal ranges. Idempotent."""
    inventory = {
        item: min(max(int(count), 0), ITEM_MAX[item])
        for item, count in config.starting_inventory.items()
        if count  # drop zero entries so clamping is canonicalising
    }
    inventory = {item: count for item, count in inventory.items() if count > 0}
    return EnvConfig(
        target_biome=config.target_biome,
        coal_rarity=config.coal_rarity,
        iron_rarity=config.iron_rarity,
        diamond_rarity=config.diamond_rarity,
        tree_rarity=config.tree_rarity,
        starting_inventory=inventory,
        purpose=config.purpose,
    )


@dataclass
class ConfigBundle:
    """The set of environments one generation step produced."""

    configs: list
    provenance: str  # llm | scripted | fixture
    cycle_index: int = 0

    def __post_init__(self):
        if self.provenance not in ("llm", "scripted", "fixture"):
            raise ConfigSchemaError(
                f"provenance must be llm, scripted, or fixture; got {self.provenance!r}",
                key="provenance",
            )

    def __len__(self) -> int:
        return len(self.configs)

    def to_json(self) -> str:
        return json.dumps([c.to_dict() for c in self.configs])


def _scan_json_objects(text: str):
    """Yield (start, end) spans of balanced top-level {...} groups.

    An unbalanced open brace (prose, truncated output) is skipped so that
    later complete objects are still found.
    """
    i, n = 0, len(text)
    while i < n:
        if text[i] != "{":
            i += 1
            continue
        depth, j, in_string, escaped = 0, i, False, False
        end = None
        while j < n:
            ch = text[j]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    end = j + 1
                    break
            j += 1
        if end is None:
            i += 1
        else:
            yield i, end
            i = end


def extract_bundle(llm_text: str, expected_n: int, *, game: str = "craftbench",
                   provenance: str = "llm", cycle_index: int = 0) -> ConfigBundle:
    """Recover ``expected_n`` valid configs from free-form completion text.

    Scans for balanced JSON objects (this covers bare objects, arrays, and
    fenced code blocks alike), validates and clamps each, and skips anything
    that fails the schema. Raises ExtractionError when too few survive.
    """
    if game == "craftbench":
        parse_obj, clamp_fn = parse_config_obj, clamp
    elif game == "heist":
        from .heist.maze import clamp_heist_config, parse_heist_config_obj

        parse_obj, clamp_fn = parse_heist_config_obj, clamp_heist_config
    else:
        raise ValueError(f"unknown game {game!r}")

    configs = []
    cursor = 0
    for start, end in _scan_json_objects(llm_text):
        if start < cursor:  # nested inside an object we already took
            continue
        try:
            data = json.loads(llm_text[start:end])
        except json.JSONDecodeError:
            continue
        try:
            configs.append(clamp_fn(parse_obj(data)))
        except (ConfigSchemaError, ConfigTypeError):
            continue
        cursor = end
    if len(configs) < expected_n:
        raise ExtractionError(
            f"recovered {len(configs)} valid config(s), expected {expected_n}",
            raw_text=llm_text,
        )
    return ConfigBundle(configs[:expected_n], provenance=provenance, cycle_index=cycle_index)
