"""Run configuration: TOML files, named presets, and flag overrides.

Precedence is preset < config file < command-line flags. The effective
configuration is echoed into the output directory as TOML and reproduces the
run when passed back via --config.
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .craft.constants import ACHIEVEMENTS, DEFAULT_MAX_STEPS, DEFAULT_WORLD_SIZE
from .run.games import DEFAULT_CONV_CHANNELS, DEFAULT_HIDDEN, MINI_ACHIEVEMENTS
from .run.plan import CURRICULA

GAMES = ("craftbench", "heist")
GENERATORS = ("llm", "scripted", "fixture")

# CLI spelling -> canonical curriculum kind
CURRICULUM_ALIASES = {
    "envgen": "envgen_adaptive",
    "envgen_adaptive": "envgen_adaptive",
    "fixed": "fixed_llm",
    "fixed_llm": "fixed_llm",
    "easy-to-hard": "easy_to_hard",
    "easy_to_hard": "easy_to_hard",
    "adversarial": "adversarial",
    "original-only": "original_only",
    "original_only": "original_only",
}


class RunConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    game: str = "craftbench"
    curriculum: str = "envgen_adaptive"
    generator: str = "scripted"
    seeds: list = field(default_factory=lambda: [0])
    out: str = "runs/latest"
    n_envs: int = 32
    workers: int = 0
    # CyclePlan fields
    n_cycles: int = 4
    n_llm_envs: int = 4
    t_llm_env: int = 120_000
    t_orig_env: int = 120_000
    final_orig_steps: int = 1_000_000
    mixture_ratio: list = field(default_factory=lambda: [1, 1])
    eval_seeds: int = 12
    episodes_per_seed: int = 16
    # PPO overrides (None -> package default)
    ppo: dict = field(default_factory=dict)
    # world construction (craftbench)
    world_size: int = DEFAULT_WORLD_SIZE
    world_max_steps: int = DEFAULT_MAX_STEPS
    achievements: list = field(default_factory=lambda: list(ACHIEVEMENTS))
    # policy architecture
    conv_channels: list = field(default_factory=lambda: list(DEFAULT_CONV_CHANNELS))
    hidden: int = DEFAULT_HIDDEN
    # generation endpoint
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4-turbo"
    temperature: float = 0.7
    timeout: float = 60.0
    max_retries: int = 2
    fixture_dir: str = ""
    # curriculum knobs
    validation_steps: int = 20_000

    def validate(self) -> "RunConfig":
        if self.game not in GAMES:
            raise RunConfigError(f"game must be one of {GAMES}; got {self.game!r}")
        if self.curriculum not in CURRICULA:
            raise RunConfigError(
                f"curriculum must be one of {sorted(CURRICULUM_ALIASES)}; got {self.curriculum!r}"
            )
        if self.generator not in GENERATORS:
            raise RunConfigError(f"generator must be one of {GENERATORS}; got {self.generator!r}")
        if not self.seeds:
            raise RunConfigError("seeds must not be empty")
        unknown_ppo = set(self.ppo) - {
            "discount", "gae_lambda", "rollout_steps", "epochs", "minibatches",
            "entropy_coef", "clip_range", "reward_normalization", "ewma_decay",
            "learning_rate", "max_grad_norm", "vf_coef", "adam_eps",
        }
        if unknown_ppo:
            raise RunConfigError(f"unknown [ppo] keys: {sorted(unknown_ppo)}")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


PRESETS = {
    "default": {},
    # CI-scale: reduced 6-achievement world, small policy, short schedule
    "mini": {
        "n_cycles": 2,
        "t_llm_env": 20_000,
        "t_orig_env": 20_000,
        "final_orig_steps": 100_000,
        "eval_seeds": 4,
        "episodes_per_seed": 4,
        "world_size": 32,
        "world_max_steps": 500,
        "achievements": list(MINI_ACHIEVEMENTS),
        "conv_channels": [16, 32, 32],
        "hidden": 256,
        "n_envs": 32,
    },
    # seconds-scale smoke runs for demos and CLI tests
    "smoke": {
        "n_cycles": 2,
        "t_llm_env": 2_048,
        "t_orig_env": 2_048,
        "final_orig_steps": 4_096,
        "eval_seeds": 2,
        "episodes_per_seed": 2,
        "world_size": 24,
        "world_max_steps": 200,
        "achievements": list(MINI_ACHIEVEMENTS),
        "conv_channels": [8, 16, 16],
        "hidden": 64,
        "n_envs": 8,
        "ppo": {"rollout_steps": 1024},
    },
}

# heist has no reduced-achievement analogue; its presets tune the schedule
HEIST_PRESETS = {
    "default": {
        "n_cycles": 1,
        "t_llm_env": 5_000_000,
        "t_orig_env": 5_000_000,
        "final_orig_steps": 15_000_000,
        "eval_seeds": 10,
        "episodes_per_seed": 100,
    },
    "mini": {
        "n_cycles": 1,
        "t_llm_env": 16_384,
        "t_orig_env": 16_384,
        "final_orig_steps": 32_768,
        "eval_seeds": 4,
        "episodes_per_seed": 8,
        "conv_channels": [16, 32, 32],
        "hidden": 256,
        "n_envs": 32,
    },
    "smoke": {
        "n_cycles": 1,
        "t_llm_env": 2_048,
        "t_orig_env": 2_048,
        "final_orig_steps": 4_096,
        "eval_seeds": 2,
        "episodes_per_seed": 2,
        "conv_channels": [8, 16, 16],
        "hidden": 64,
        "n_envs": 8,
        "ppo": {"rollout_steps": 1024},
    },
}


def preset_overrides(game: str, preset: str) -> dict:
    table = HEIST_PRESETS if game == "heist" else PRESETS
    if preset not in table:
        raise RunConfigError(f"unknown preset {preset!r} for {game}; have {sorted(table)}")
    return dict(table[preset])


_FIELD_NAMES = {f for f in RunConfig.__dataclass_fields__}


def apply_overrides(config: RunConfig, overrides: dict, source: str) -> RunConfig:
    for key, value in overrides.items():
        if key not in _FIELD_NAMES:
            raise RunConfigError(f"unknown config key {key!r} (from {source})")
        if key == "ppo":
            merged = dict(config.ppo)
            merged.update(value)
            value = merged
        setattr(config, key, value)
    return config


def load_toml(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise RunConfigError(f"config file not found: {path}")
    with path.open("rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise RunConfigError(f"bad TOML in {path}: {exc}") from exc
    flat = {}
    for key, value in data.items():
        if key == "ppo":
            if not isinstance(value, dict):
                raise RunConfigError("[ppo] must be a table")
            flat["ppo"] = value
        elif isinstance(value, dict):
            raise RunConfigError(f"unexpected table [{key}]; only [ppo] is nested")
        else:
            flat[key] = value
    return flat


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise RunConfigError(f"cannot serialise {value!r} to TOML")


def dump_toml(config: RunConfig) -> str:
    """Minimal TOML emitter for the flat RunConfig schema (+ [ppo] table)."""
    lines = []
    data = config.to_dict()
    ppo = data.pop("ppo")
    for key, value in data.items():
        lines.append(f"{key} = {_toml_value(value)}")
    if ppo:
        lines.append("")
        lines.append("[ppo]")
        for key, value in ppo.items():
            lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def build_run_config(*, preset: str | None = None, config_path=None,
                     flag_overrides: dict | None = None) -> RunConfig:
    """Assemble the effective config: preset, then file, then flags."""
    flag_overrides = dict(flag_overrides or {})
    game = flag_overrides.get("game")
    file_overrides = load_toml(config_path) if config_path else {}
    game = game or file_overrides.get("game") or "craftbench"

    config = RunConfig(game=game)
    if preset:
        apply_overrides(config, preset_overrides(game, preset), f"preset {preset!r}")
    if file_overrides:
        apply_overrides(config, file_overrides, str(config_path))
    if flag_overrides:
        apply_overrides(config, flag_overrides, "command line")
    return config.validate()
