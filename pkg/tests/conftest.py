"""Shared fixtures: tiny game setups and one reusable smoke-scale run."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from envgen.rl import Agent, PpoConfig
from envgen.run import CyclePlan, MINI_ACHIEVEMENTS, craftbench_game, make_generator, run_envgen

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def completion_corpus():
    return json.loads((FIXTURES / "completions" / "corpus.json").read_text())["cases"]


@pytest.fixture(scope="session")
def craft_responses_dir():
    return FIXTURES / "responses" / "craftbench"


@pytest.fixture(scope="session")
def heist_responses_dir():
    return FIXTURES / "responses" / "heist"


def smoke_game():
    return craftbench_game(
        size=24, max_steps=200, tracked=MINI_ACHIEVEMENTS,
        conv_channels=(8, 16, 16), hidden=64,
    )


def smoke_plan(**overrides):
    base = dict(
        n_cycles=2, n_llm_envs=4, t_llm_env=2048, t_orig_env=2048,
        final_orig_steps=4096, eval_seeds=2, episodes_per_seed=2,
    )
    base.update(overrides)
    return CyclePlan(**base)


def smoke_agent(game, seed=0, **ppo_overrides):
    ppo = PpoConfig(rollout_steps=1024, **ppo_overrides)
    return Agent(game.policy_spec, ppo, seed=seed)


@pytest.fixture(scope="session")
def smoke_fixture_run(tmp_path_factory, craft_responses_dir):
    """One smoke-scale adaptive run with the fixture generator, shared by the
    transcript-shape, feedback-chain, and plotting tests."""
    out_dir = tmp_path_factory.mktemp("smoke_fixture_run")
    game = smoke_game()
    agent = smoke_agent(game, seed=0)
    generator = make_generator("fixture", "craftbench",
                               fixture_dir=craft_responses_dir,
                               achievements=game.achievements)
    result = run_envgen(smoke_plan(generator="fixture"), agent, generator, game,
                        seed=0, out_dir=out_dir, n_envs=8)
    return result
