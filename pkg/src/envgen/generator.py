"""Environment generation: prompt assembly, the chat-completion client, the
deterministic scripted generator, and evaluation summaries.

The scripted generator implements the same adaptation contract as the live
endpoint (weakest skills get targeted environments) so the whole training
loop runs offline and in CI.
"""

from __future__ import annotations

import json
import math
import os
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import requests

from .config import ConfigBundle, clamp, extract_bundle, parse_config_obj
from .craft.constants import ACHIEVEMENTS, ITEM_MAX, ITEMS
from .errors import ExtractionError, GenerationError
from .heist.maze import (
    LOCK_ORDER,
    MAZE_SIZES,
    clamp_heist_config,
    parse_heist_config_obj,
)

API_KEY_ENV = "ENVGEN_LLM_API_KEY"

_LEVERS = json.loads(
    resources.files("envgen.data").joinpath("achievement_levers.json").read_text()
)["levers"]


# --------------------------------------------------------------------------
# prompts and feedback


@dataclass(frozen=True)
class PromptSpec:
    """The four-part generation prompt: task, game details, output template,
    and (from the second cycle on) performance feedback."""

    task_description: str
    objectives: tuple
    controllable_settings: tuple
    constraints: tuple
    output_template: str
    n_envs: int


@dataclass
class PerfReport:
    """Per-achievement success rates (percent, mean and std over seeds)."""

    per_achievement: dict  # name -> {"mean": float, "std": float}
    n_seeds: int
    cycle_index: int = 0

    def weakest(self, k: int) -> list[str]:
        """The k lowest-mean achievements; ties break in canonical order."""
        names = list(self.per_achievement)
        order = {name: i for i, name in enumerate(names)}
        return sorted(names, key=lambda a: (self.per_achievement[a]["mean"], order[a]))[:k]

    def to_dict(self) -> dict:
        return {
            "per_achievement": self.per_achievement,
            "n_seeds": self.n_seeds,
            "cycle_index": self.cycle_index,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PerfReport":
        return cls(**data)


def summarize_eval(per_seed_rates, achievements=None, *, cycle_index: int = 0) -> PerfReport:
    """Mean and sample std (percent) per achievement over evaluation seeds."""
    rates = np.asarray(per_seed_rates, dtype=np.float64)
    if rates.ndim != 2 or rates.size == 0:
        raise ValueError(f"need a seeds x achievements matrix, got shape {rates.shape}")
    names = tuple(achievements) if achievements is not None else ACHIEVEMENTS
    if rates.shape[1] != len(names):
        raise ValueError(f"{rates.shape[1]} columns for {len(names)} achievements")
    means = rates.mean(axis=0) * 100.0
    if rates.shape[0] > 1:
        stds = rates.std(axis=0, ddof=1) * 100.0
    else:
        stds = np.zeros(rates.shape[1])
    per = {
        name: {"mean": float(m), "std": float(s)}
        for name, m, s in zip(names, means, stds)
    }
    return PerfReport(per, n_seeds=rates.shape[0], cycle_index=cycle_index)


def _pct(x: float) -> int:
    return int(math.floor(x + 0.5))  # half-up, matching human-facing rounding


def render_feedback(report: PerfReport) -> str:
    """``collect coal: 38% ± 6%, defeat skeleton: 10% ± 4%`` style listing."""
    parts = [
        f"{name.replace('_', ' ')}: {_pct(stat['mean'])}% ± {_pct(stat['std'])}%"
        for name, stat in report.per_achievement.items()
    ]
    return ", ".join(parts)


_FEEDBACK_ITEM = re.compile(r"^([a-z][a-z ]*): (\d+)% ± (\d+)%$")


def parse_feedback(text: str) -> PerfReport:
    """Inverse of render_feedback (integer percents)."""
    per = {}
    for chunk in text.split(", "):
        m = _FEEDBACK_ITEM.match(chunk.strip())
        if m is None:
            raise ValueError(f"feedback item {chunk!r} does not match the grammar")
        per[m.group(1).replace(" ", "_")] = {
            "mean": float(m.group(2)),
            "std": float(m.group(3)),
        }
    return PerfReport(per, n_seeds=0)


def render_prompt(spec: PromptSpec, feedback: PerfReport | None = None) -> str:
    """Deterministic prompt text; feedback (when present) comes last."""
    lines = [spec.task_description, ""]
    lines.append("Objectives the agent should learn:")
    lines.extend(f"- {obj}" for obj in spec.objectives)
    lines.append("")
    lines.append("Simulator settings you can control:")
    lines.extend(f"- {s}" for s in spec.controllable_settings)
    lines.append("")
    lines.append("Simulator constraints and rules:")
    lines.extend(f"- {c}" for c in spec.constraints)
    lines.append("")
    lines.append(
        f"Respond with a JSON array of exactly {spec.n_envs} environment "
        "configuration objects filling in this template, and explain the "
        'purpose of each environment in its "purpose" field:'
    )
    lines.append(spec.output_template)
    if feedback is not None:
        lines.append("")
        lines.append(
            "Feedback: the agent's current success rates in the original "
            "environment (mean ± one standard deviation over "
            f"{feedback.n_seeds} evaluation seeds) are:"
        )
        lines.append(render_feedback(feedback))
        lines.append(
            f"Generate {spec.n_envs} new environment configurations that "
            "focus on improving the skills the agent is weakest at."
        )
    return "\n".join(lines)


def craftbench_prompt_spec(n_envs: int, achievements=ACHIEVEMENTS) -> PromptSpec:
    rarity_settings = tuple(
        f"{k}: very common | common | rare"
        for k in ("coal_rarity", "iron_rarity", "diamond_rarity", "tree_rarity")
    )
    item_settings = tuple(f"{item}: 0-{ITEM_MAX[item]}" for item in ITEMS)
    template = json.dumps(
        {
            "target_biome": "",
            "coal_rarity": "",
            "iron_rarity": "",
            "diamond_rarity": "",
            "tree_rarity": "",
            **{item: 0 for item in ITEMS},
            "purpose": "",
        },
        indent=2,
    )
    return PromptSpec(
        task_description=(
            "You design training environments for a reinforcement-learning "
            "agent playing a 2D open-world survival game. Generate a set of "
            "training environments that teach the agent different skills in "
            "parallel."
        ),
        objectives=tuple(a.replace("_", " ") for a in achievements),
        controllable_settings=(
            "target_biome: grassland | mountain | beaches | natural",
            *rarity_settings,
            "starting items the agent begins with:",
            *item_settings,
        ),
        constraints=(
            "skeletons only spawn near mountain (stone) terrain",
            "cows and trees are most common in grassland",
            "beaches are mostly sand and water",
            "stackable items cap at 9; tools cap at 1",
            "out-of-range values are clamped to simulator capabilities",
        ),
        output_template=template,
        n_envs=n_envs,
    )


def heist_prompt_spec(n_envs: int) -> PromptSpec:
    template = json.dumps(
        {
            "maze_size": 0,
            "active_lock_layers": 0,
            "keys_in_inventory": [],
            "wall_density": "",
            "purpose": "",
        },
        indent=2,
    )
    return PromptSpec(
        task_description=(
            "You design training mazes for a reinforcement-learning agent "
            "that must open colour-ordered locks and steal a gem. Generate a "
            "set of training environments covering easy to hard scenarios."
        ),
        objectives=("steal gem",),
        controllable_settings=(
            f"maze_size: one of {', '.join(str(s) for s in MAZE_SIZES)}",
            "active_lock_layers: 0-3 (how many of the blue, green, red lock "
            "layers exist; missing earlier layers count as already open)",
            f"keys_in_inventory: subset of {list(LOCK_ORDER)} the agent starts holding",
            "wall_density: sparse | normal | dense",
        ),
        constraints=(
            "locks open strictly in blue, green, red order",
            "the gem is reachable only after all active locks are open",
            "keys only exist for active lock layers",
        ),
        output_template=template,
        n_envs=n_envs,
    )


def prompt_spec_for(game: str, n_envs: int, achievements=None) -> PromptSpec:
    if game == "craftbench":
        return craftbench_prompt_spec(n_envs, achievements or ACHIEVEMENTS)
    if game == "heist":
        return heist_prompt_spec(n_envs)
    raise ValueError(f"unknown game {game!r}")


# --------------------------------------------------------------------------
# chat-completion endpoint (live or fixture replay)


DEFAULT_SYSTEM_PROMPT = (
    "You are an expert game-environment designer helping train a "
    "reinforcement-learning agent. Always answer with valid JSON when asked "
    "for configurations."
)


class TransportError(RuntimeError):
    """HTTP-level failure talking to the completion endpoint."""


@dataclass
class LlmEndpoint:
    """A chat-completion endpoint, or a replay of recorded response bodies
    when ``fixture_dir`` is set. The API key comes from the environment
    variable ENVGEN_LLM_API_KEY and is never stored."""

    base_url: str = "https://api.openai.com/v1/chat/completions"
    model_name: str = "gpt-4-turbo"
    temperature: float = 0.7
    timeout: float = 60.0
    max_retries: int = 2
    backoff_seconds: float = 1.0
    fixture_dir: str | None = None
    # runtime bookkeeping, not configuration
    last_attempts: int = field(default=0, repr=False)
    last_completion: str = field(default="", repr=False)
    _fixture_cursor: int = field(default=0, repr=False)

    def _fixture_completion(self) -> str:
        files = sorted(Path(self.fixture_dir).glob("*.json"))
        if not files:
            raise TransportError(f"no fixture responses in {self.fixture_dir}")
        path = files[self._fixture_cursor % len(files)]
        self._fixture_cursor += 1
        body = json.loads(path.read_text())
        return body["choices"][0]["message"]["content"]

    def complete(self, messages: list[dict]) -> str:
        if self.fixture_dir is not None:
            return self._fixture_completion()
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(API_KEY_ENV, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {
            "model": self.model_name,
            "messages": messages,
            "temperature": self.temperature,
        }
        try:
            response = requests.post(
                self.base_url, json=body, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(
                f"endpoint returned HTTP {response.status_code}: {response.text[:200]}"
            )
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"malformed completion body: {exc}") from exc


def request_bundle(endpoint: LlmEndpoint, prompt: str, expected_n: int, *,
                   game: str = "craftbench", history: tuple = (),
                   system_prompt: str = DEFAULT_SYSTEM_PROMPT,
                   provenance: str | None = None,
                   cycle_index: int = 0) -> ConfigBundle:
    """One generation round trip with retry on transport or extraction
    failure (exponential backoff, at most 1 + max_retries attempts)."""
    messages = [{"role": "system", "content": system_prompt}]
    messages.extend(history)
    messages.append({"role": "user", "content": prompt})
    if provenance is None:
        provenance = "fixture" if endpoint.fixture_dir is not None else "llm"

    last_error = None
    endpoint.last_attempts = 0
    for attempt in range(1 + endpoint.max_retries):
        endpoint.last_attempts = attempt + 1
        try:
            completion = endpoint.complete(messages)
            endpoint.last_completion = completion
            return extract_bundle(
                completion, expected_n, game=game,
                provenance=provenance, cycle_index=cycle_index,
            )
        except (TransportError, ExtractionError) as exc:
            last_error = exc
            if attempt < endpoint.max_retries and endpoint.backoff_seconds > 0:
                time.sleep(endpoint.backoff_seconds * (2 ** attempt))
    raise GenerationError(
        f"generation failed after {endpoint.last_attempts} attempts: {last_error}"
    ) from last_error


# --------------------------------------------------------------------------
# scripted generator


_BIOME_ROTATION = ("grassland", "mountain", "beaches", "natural")
_RARITY_CHOICES = ("very_common", "common", "common", "rare")  # common-weighted


def _random_config(rng: np.random.Generator, biome: str) -> dict:
    data = {"target_biome": biome}
    for knob in ("coal_rarity", "iron_rarity", "diamond_rarity", "tree_rarity"):
        data[knob] = _RARITY_CHOICES[int(rng.integers(len(_RARITY_CHOICES)))]
    for _ in range(int(rng.integers(3))):  # at most two starting items
        item = ITEMS[int(rng.integers(len(ITEMS)))]
        data[item] = int(rng.integers(1, ITEM_MAX[item] + 1))
    data["purpose"] = f"varied practice in a {biome} world"
    return data


def scripted_generate(feedback: PerfReport | None, n_envs: int, seed: int,
                      *, cycle_index: int = 0) -> ConfigBundle:
    """Deterministic stand-in for the LLM.

    Without feedback: diverse configs rotating through the biomes. With
    feedback: one lever-table config per weakest achievement.
    """
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    configs = []
    if feedback is not None:
        for name in feedback.weakest(n_envs):
            lever = _LEVERS.get(name)
            if lever is not None:
                configs.append(clamp(parse_config_obj(lever)))
    offset = int(rng.integers(len(_BIOME_ROTATION)))
    i = 0
    while len(configs) < n_envs:
        biome = _BIOME_ROTATION[(offset + i) % len(_BIOME_ROTATION)]
        configs.append(clamp(parse_config_obj(_random_config(rng, biome))))
        i += 1
    return ConfigBundle(configs[:n_envs], provenance="scripted", cycle_index=cycle_index)


_HEIST_LADDER = (
    {"maze_size": 9, "active_lock_layers": 0, "wall_density": "sparse"},
    {"maze_size": 9, "active_lock_layers": 1, "wall_density": "sparse"},
    {"maze_size": 11, "active_lock_layers": 1, "wall_density": "normal"},
    {"maze_size": 11, "active_lock_layers": 2, "keys_in_inventory": ["green"], "wall_density": "normal"},
    {"maze_size": 13, "active_lock_layers": 2, "wall_density": "normal"},
    {"maze_size": 13, "active_lock_layers": 3, "keys_in_inventory": ["red"], "wall_density": "normal"},
    {"maze_size": 13, "active_lock_layers": 3, "wall_density": "normal"},
    {"maze_size": 15, "active_lock_layers": 3, "wall_density": "dense"},
)


def scripted_generate_heist(feedback: PerfReport | None, n_envs: int, seed: int,
                            *, cycle_index: int = 0) -> ConfigBundle:
    """Difficulty-ladder sampler: feedback shifts the window toward easier
    mazes when the gem success rate is low."""
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    ladder = len(_HEIST_LADDER)
    if feedback is None:
        lo, hi = 0, ladder
    else:
        success = next(iter(feedback.per_achievement.values()))["mean"]
        centre = min(int(success / 100.0 * ladder), ladder - 1)
        lo, hi = max(0, centre - 2), min(ladder, centre + 3)
    configs = []
    for i in range(n_envs):
        if feedback is None:
            idx = (i * ladder) // n_envs if n_envs > 1 else int(rng.integers(ladder))
        else:
            idx = lo + int(rng.integers(hi - lo))
        data = dict(_HEIST_LADDER[idx])
        data["purpose"] = f"maze practice at difficulty {idx + 1} of {ladder}"
        configs.append(clamp_heist_config(parse_heist_config_obj(data)))
    return ConfigBundle(configs, provenance="scripted", cycle_index=cycle_index)


def scripted_generate_for(game: str, feedback, n_envs: int, seed: int,
                          *, cycle_index: int = 0) -> ConfigBundle:
    if game == "craftbench":
        return scripted_generate(feedback, n_envs, seed, cycle_index=cycle_index)
    if game == "heist":
        return scripted_generate_heist(feedback, n_envs, seed, cycle_index=cycle_index)
    raise ValueError(f"unknown game {game!r}")
