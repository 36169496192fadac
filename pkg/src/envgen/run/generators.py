"""Generator drivers used by the training loop: scripted rules, or a chat
endpoint (live or fixture replay) with persistent conversation history."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..config import ConfigBundle
from ..generator import (
    LlmEndpoint,
    PerfReport,
    prompt_spec_for,
    render_prompt,
    request_bundle,
    scripted_generate_for,
)
from .games import derive_seed


@dataclass
class GenerationResult:
    bundle: ConfigBundle
    prompt: str | None = None
    completion: str | None = None


class ScriptedGenerator:
    """Deterministic rule-based generation; no prompts are ever rendered."""

    kind = "scripted"

    def __init__(self, game: str, seed: int = 0):
        self.game = game
        self.seed = int(seed)

    def generate(self, cycle_index: int, feedback: PerfReport | None,
                 n_envs: int) -> GenerationResult:
        bundle = scripted_generate_for(
            self.game, feedback, n_envs,
            derive_seed(self.seed, 97, cycle_index),
            cycle_index=cycle_index,
        )
        return GenerationResult(bundle)

    def save_conversation(self, path) -> None:  # nothing to persist
        pass


class LlmGenerator:
    """Endpoint-backed generation keeping a chat history, so each feedback
    prompt extends the same conversation. Simulator details are re-sent every
    cycle rather than trusting history alone."""

    def __init__(self, game: str, endpoint: LlmEndpoint, achievements=None):
        self.game = game
        self.endpoint = endpoint
        self.achievements = achievements
        self.history: list[dict] = []
        self.kind = "fixture" if endpoint.fixture_dir is not None else "llm"

    def generate(self, cycle_index: int, feedback: PerfReport | None,
                 n_envs: int) -> GenerationResult:
        spec = prompt_spec_for(self.game, n_envs, self.achievements)
        prompt = render_prompt(spec, feedback)
        bundle = request_bundle(
            self.endpoint, prompt, n_envs, game=self.game,
            history=tuple(self.history), cycle_index=cycle_index,
        )
        completion = self.endpoint.last_completion
        self.history.append({"role": "user", "content": prompt})
        self.history.append({"role": "assistant", "content": completion})
        return GenerationResult(bundle, prompt=prompt, completion=completion)

    def save_conversation(self, path) -> None:
        Path(path).write_text(json.dumps(self.history, indent=2))


def make_generator(kind: str, game: str, *, seed: int = 0,
                   endpoint: LlmEndpoint | None = None,
                   fixture_dir=None, achievements=None):
    if kind == "scripted":
        return ScriptedGenerator(game, seed=seed)
    if kind == "fixture":
        endpoint = endpoint or LlmEndpoint()
        endpoint.fixture_dir = str(fixture_dir)
        return LlmGenerator(game, endpoint, achievements=achievements)
    if kind == "llm":
        return LlmGenerator(game, endpoint or LlmEndpoint(), achievements=achievements)
    raise ValueError(f"unknown generator kind {kind!r}")
