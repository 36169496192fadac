"""Training-run orchestration: cycle loop, baselines, evaluation, scoring."""

from .curricula import run_adversarial, run_easy_to_hard, run_original_only
from .evaluate import evaluate, measure_mean_return
from .games import GameSpec, MINI_ACHIEVEMENTS, craftbench_game, derive_seed, game_for, heist_game
from .generators import LlmGenerator, ScriptedGenerator, make_generator
from .loop import RunResult, run_envgen, train_phase
from .plan import (
    CURRICULA,
    CyclePlan,
    ScoreReport,
    crafter_score,
    geometric_mean_score,
    score_from_records,
)
from .transcript import MetricsWriter, TranscriptWriter, read_jsonl

__all__ = [
    "CURRICULA",
    "CyclePlan",
    "GameSpec",
    "LlmGenerator",
    "MINI_ACHIEVEMENTS",
    "MetricsWriter",
    "RunResult",
    "ScoreReport",
    "ScriptedGenerator",
    "TranscriptWriter",
    "crafter_score",
    "craftbench_game",
    "derive_seed",
    "evaluate",
    "game_for",
    "geometric_mean_score",
    "heist_game",
    "make_generator",
    "measure_mean_return",
    "read_jsonl",
    "run_adversarial",
    "run_easy_to_hard",
    "run_envgen",
    "run_original_only",
    "score_from_records",
    "train_phase",
]
