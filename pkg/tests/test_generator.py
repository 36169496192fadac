"""Prompt rendering, feedback summaries, the scripted generator, and the
completion client."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from envgen.craft.constants import ACHIEVEMENTS
from envgen.errors import GenerationError
from envgen.generator import (
    LlmEndpoint,
    PerfReport,
    parse_feedback,
    prompt_spec_for,
    render_feedback,
    render_prompt,
    request_bundle,
    scripted_generate,
    scripted_generate_heist,
    summarize_eval,
)


def report_from(means, stds=None, names=None):
    names = names or list(ACHIEVEMENTS)[: len(means)]
    stds = stds or [0.0] * len(means)
    return PerfReport(
        {n: {"mean": m, "std": s} for n, m, s in zip(names, means, stds)}, n_seeds=12
    )


class TestSummaries:
    def test_all_perfect(self):
        report = summarize_eval(np.ones((12, 22)))
        assert all(s["mean"] == 100.0 and s["std"] == 0.0
                   for s in report.per_achievement.values())

    def test_two_seed_sample_std(self):
        report = summarize_eval(np.array([[0.32], [0.44]]), ["collect_coal"])
        stat = report.per_achievement["collect_coal"]
        assert stat["mean"] == pytest.approx(38.0)
        # sample standard deviation: sqrt(((.32-.38)^2 + (.44-.38)^2) / 1) * 100
        assert stat["std"] == pytest.approx(8.485281374238571, abs=1e-9)

    def test_single_seed_std_zero(self):
        report = summarize_eval(np.array([[0.5, 0.25]]), ["collect_wood", "eat_cow"])
        assert all(s["std"] == 0.0 for s in report.per_achievement.values())

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError):
            summarize_eval(np.zeros((0, 22)))


class TestFeedbackFormat:
    def test_documented_example(self):
        report = report_from([38.2, 10.4], [5.8, 4.2],
                             ["collect_coal", "defeat_skeleton"])
        assert render_feedback(report) == "collect coal: 38% ± 6%, defeat skeleton: 10% ± 4%"

    def test_parse_inverse(self):
        report = parse_feedback("collect coal: 38% ± 6%, defeat skeleton: 10% ± 4%")
        assert report.per_achievement["collect_coal"] == {"mean": 38.0, "std": 6.0}
        assert report.per_achievement["defeat_skeleton"] == {"mean": 10.0, "std": 4.0}

    def test_bad_grammar_rejected(self):
        with pytest.raises(ValueError):
            parse_feedback("collect coal: 38%")

    @given(
        means=st.lists(st.floats(0, 100), min_size=1, max_size=22),
        stds=st.lists(st.floats(0, 100), min_size=22, max_size=22),
    )
    @settings(max_examples=200, deadline=None)
    def test_grammar_round_trip(self, means, stds):
        report = report_from(means, stds[: len(means)])
        rendered = render_feedback(report)
        parsed = parse_feedback(rendered)
        assert render_feedback(parsed) == rendered  # fixed point on roundings


class TestPrompt:
    def test_components_in_order(self):
        spec = prompt_spec_for("craftbench", 4)
        report = report_from([38.0], [6.0], ["collect_coal"])
        prompt = render_prompt(spec, report)
        i_task = prompt.index("You design training environments")
        i_details = prompt.index("Simulator settings you can control")
        i_template = prompt.index('"target_biome"')
        i_feedback = prompt.index("collect coal: 38% ± 6%")
        assert i_task < i_details < i_template < i_feedback
        assert "4" in prompt

    def test_no_feedback_block_on_first_cycle(self):
        prompt = render_prompt(prompt_spec_for("craftbench", 4), None)
        assert "Feedback" not in prompt

    def test_deterministic(self):
        spec = prompt_spec_for("heist", 2)
        report = PerfReport({"steal_gem": {"mean": 12.0, "std": 3.0}}, n_seeds=10)
        assert render_prompt(spec, report) == render_prompt(spec, report)


class TestScriptedGenerator:
    def test_diverse_biomes_without_feedback(self):
        bundle = scripted_generate(None, 4, seed=0)
        assert len({c.target_biome for c in bundle.configs}) >= 3

    def test_pure_function_of_inputs(self):
        a = scripted_generate(None, 6, seed=9)
        b = scripted_generate(None, 6, seed=9)
        assert [c.to_dict() for c in a.configs] == [c.to_dict() for c in b.configs]

    def test_weakest_coal_gets_coal_lever(self):
        means = [50.0] * 22
        means[ACHIEVEMENTS.index("collect_coal")] = 1.0
        bundle = scripted_generate(report_from(means), 4, seed=0)
        assert any(c.coal_rarity == "very_common" for c in bundle.configs)

    def test_weakest_stone_pickaxe_gets_materials(self):
        means = [50.0] * 22
        means[ACHIEVEMENTS.index("make_stone_pickaxe")] = 0.0
        bundle = scripted_generate(report_from(means), 4, seed=0)
        assert any(
            c.starting_inventory.get("wood_pickaxe") == 1
            and c.starting_inventory.get("stone", 0) >= 1
            for c in bundle.configs
        )

    def test_heist_ladder_eases_on_low_success(self):
        low = PerfReport({"steal_gem": {"mean": 2.0, "std": 1.0}}, n_seeds=10)
        bundle = scripted_generate_heist(low, 4, seed=0)
        assert all(c.active_lock_layers <= 1 for c in bundle.configs)
        high = PerfReport({"steal_gem": {"mean": 95.0, "std": 2.0}}, n_seeds=10)
        bundle = scripted_generate_heist(high, 4, seed=0)
        assert any(c.active_lock_layers == 3 for c in bundle.configs)


class FlakyEndpoint(LlmEndpoint):
    """Scripted transport behaviour for retry tests."""

    def __init__(self, outcomes):
        super().__init__(max_retries=2, backoff_seconds=0.0)
        self.outcomes = list(outcomes)

    def complete(self, messages):
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


GOOD = json.dumps([{"target_biome": "grassland"}, {"target_biome": "mountain"},
                   {"target_biome": "beaches"}, {"target_biome": "natural"}])


class TestRequestBundle:
    def test_fixture_replay(self, craft_responses_dir):
        endpoint = LlmEndpoint(fixture_dir=str(craft_responses_dir))
        bundle = request_bundle(endpoint, "prompt", 4)
        assert len(bundle) == 4
        assert bundle.provenance == "fixture"
        assert endpoint.last_attempts == 1

    def test_retry_then_success_counts_attempts(self):
        from envgen.generator import TransportError

        endpoint = FlakyEndpoint([
            TransportError("HTTP 500"), TransportError("HTTP 500"), GOOD,
        ])
        bundle = request_bundle(endpoint, "prompt", 4)
        assert len(bundle) == 4
        assert endpoint.last_attempts == 3

    def test_exhausted_retries_raise_generation_error(self):
        from envgen.generator import TransportError

        endpoint = FlakyEndpoint([TransportError("boom")] * 3)
        with pytest.raises(GenerationError):
            request_bundle(endpoint, "prompt", 4)
        assert endpoint.last_attempts == 3

    def test_extraction_failure_also_retries(self):
        endpoint = FlakyEndpoint(["no json here", GOOD])
        bundle = request_bundle(endpoint, "prompt", 4)
        assert len(bundle) == 4
        assert endpoint.last_attempts == 2
