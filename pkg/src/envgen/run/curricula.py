"""Baseline environment schedules: original-only, easy-to-hard, adversarial.

Both curricula draw a pool of 16 generated environments, rank them by how
well an agent scores in them (mean episode return), and train on groups of
four. Easy-to-hard ranks once with throwaway validation agents and walks from
easiest to hardest; adversarial re-ranks the live agent every phase and picks
the four hardest.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..rl.checkpoint import save_checkpoint
from .evaluate import measure_mean_return
from .games import GameSpec, derive_seed
from .loop import RunResult, _phase_stats_event, train_phase
from .plan import CyclePlan, score_from_records
from .transcript import MetricsWriter, TranscriptWriter

PROBE_ENVS = 16
GROUP_SIZE = 4
N_PHASES = PROBE_ENVS // GROUP_SIZE


def run_original_only(plan: CyclePlan, agent, game: GameSpec, *, seed: int = 0,
                      out_dir=None, n_envs: int = 32, workers: int = 0) -> RunResult:
    """Equal-total-steps baseline: the whole cycle budget becomes original-env
    warm-up, then the usual scored final window."""
    from .loop import run_envgen

    return run_envgen(
        plan, agent, generator=None, game=game, seed=seed, out_dir=out_dir,
        n_envs=n_envs, workers=workers, mode="original_only",
    )


def _curriculum_scaffold(out_dir):
    out_dir = Path(out_dir) if out_dir is not None else None
    tw = TranscriptWriter(out_dir / "transcript.jsonl" if out_dir else None)
    mw = MetricsWriter(out_dir / "metrics.jsonl" if out_dir else None)
    return out_dir, tw, mw


def _finish(plan, agent, game, tw, mw, out_dir, *, seed, n_envs, workers,
            final_records, final_updates) -> RunResult:
    window = (plan.cycle_steps + 1, plan.total_steps)
    score = score_from_records(final_records, game.achievements, window)
    score.extra["final_updates"] = final_updates
    tw.event("score", report=score.to_dict())
    if out_dir is not None:
        save_checkpoint(out_dir / "checkpoints" / "final.ckpt", agent,
                        extra={"phase": "final"})
        (out_dir / "score.json").write_text(json.dumps(score.to_dict(), indent=2))
    tw.close()
    mw.close()
    return RunResult(agent, score, tw.events, out_dir)


def run_easy_to_hard(plan: CyclePlan, agent, generator, game: GameSpec, *,
                     seed: int = 0, out_dir=None, n_envs: int = 32,
                     workers: int = 0, validation_steps: int = 20_000,
                     validation_episodes: int = 16,
                     difficulty_fn=None) -> RunResult:
    """Pre-ranked curriculum: 16 generated environments sorted easiest first
    (highest validation-agent score), trained in groups of four, swapping
    every quarter of the cycle budget.

    ``difficulty_fn(config, index) -> score`` replaces validation-agent
    training when supplied (higher = easier); ties keep bundle order.
    """
    out_dir, tw, mw = _curriculum_scaffold(out_dir)
    tw.event("run_start", game=game.name, mode="easy_to_hard", seed=seed,
             n_envs=n_envs, plan=plan.to_dict())

    result = generator.generate(1, None, PROBE_ENVS)
    pool = list(result.bundle.configs)
    tw.event("bundle", cycle=1, provenance=result.bundle.provenance,
             configs=[c.to_dict() for c in pool])

    if difficulty_fn is not None:
        scores = [float(difficulty_fn(config, i)) for i, config in enumerate(pool)]
    else:
        scores = []
        for i, config in enumerate(pool):
            probe = agent.fresh_like(derive_seed(seed, 41, i))
            train_phase(
                probe, game, [config], validation_steps, seed=seed,
                ordinal=(41, i), phase_key=f"validation{i:02d}",
                n_envs=min(n_envs, 8), workers=workers,
            )
            scores.append(
                measure_mean_return(
                    probe, game, config, validation_episodes,
                    base_seed=derive_seed(seed, 42, i), workers=workers,
                )
            )
    order = sorted(range(PROBE_ENVS), key=lambda i: (-scores[i], i))  # easiest first
    tw.event("validation_scores", scores=scores, order=order)

    phase_steps = plan.cycle_steps // N_PHASES
    final_records: list = []
    final_updates = 0
    for phase_index in range(N_PHASES):
        group = [pool[i] for i in order[phase_index * GROUP_SIZE:(phase_index + 1) * GROUP_SIZE]]
        tw.event("curriculum_phase", phase=phase_index + 1,
                 env_indices=order[phase_index * GROUP_SIZE:(phase_index + 1) * GROUP_SIZE])
        phase = {"key": f"stage{phase_index + 1:02d}", "kind": "llm",
                 "cycle": phase_index + 1, "steps": phase_steps,
                 "ordinal": (phase_index + 1, 1)}
        records, updates = train_phase(
            agent, game, group, phase_steps, seed=seed, ordinal=phase["ordinal"],
            phase_key=phase["key"], n_envs=n_envs, workers=workers, metrics=mw,
        )
        _phase_stats_event(tw, phase, records, updates, agent, game.achievements)

    phase = {"key": "final", "kind": "final", "cycle": N_PHASES + 1,
             "steps": plan.final_orig_steps, "ordinal": (N_PHASES + 1, 0)}
    final_records, final_updates = train_phase(
        agent, game, None, plan.final_orig_steps, seed=seed,
        ordinal=phase["ordinal"], phase_key="final", n_envs=n_envs,
        workers=workers, metrics=mw,
    )
    _phase_stats_event(tw, phase, final_records, final_updates, agent, game.achievements)
    return _finish(plan, agent, game, tw, mw, out_dir, seed=seed, n_envs=n_envs,
                   workers=workers, final_records=final_records,
                   final_updates=final_updates)


def run_adversarial(plan: CyclePlan, agent, generator, game: GameSpec, *,
                    seed: int = 0, out_dir=None, n_envs: int = 32,
                    workers: int = 0, probe_episodes: int = 8,
                    difficulty_fn=None) -> RunResult:
    """Hardest-first curriculum: every phase draws a fresh pool of 16, ranks
    it with the *current* agent, and trains on the four lowest-scoring
    environments."""
    out_dir, tw, mw = _curriculum_scaffold(out_dir)
    tw.event("run_start", game=game.name, mode="adversarial", seed=seed,
             n_envs=n_envs, plan=plan.to_dict())

    phase_steps = plan.cycle_steps // N_PHASES
    final_records: list = []
    final_updates = 0
    for phase_index in range(N_PHASES):
        result = generator.generate(phase_index + 1, None, PROBE_ENVS)
        pool = list(result.bundle.configs)
        tw.event("bundle", cycle=phase_index + 1, provenance=result.bundle.provenance,
                 configs=[c.to_dict() for c in pool])
        if difficulty_fn is not None:
            scores = [float(difficulty_fn(config, i)) for i, config in enumerate(pool)]
        else:
            scores = [
                measure_mean_return(
                    agent, game, config, probe_episodes,
                    base_seed=derive_seed(seed, 51, phase_index, i), workers=workers,
                )
                for i, config in enumerate(pool)
            ]
        hardest = sorted(range(PROBE_ENVS), key=lambda i: (scores[i], i))[:GROUP_SIZE]
        tw.event("adversarial_selection", phase=phase_index + 1, scores=scores,
                 env_indices=hardest)
        group = [pool[i] for i in hardest]
        phase = {"key": f"stage{phase_index + 1:02d}", "kind": "llm",
                 "cycle": phase_index + 1, "steps": phase_steps,
                 "ordinal": (phase_index + 1, 1)}
        records, updates = train_phase(
            agent, game, group, phase_steps, seed=seed, ordinal=phase["ordinal"],
            phase_key=phase["key"], n_envs=n_envs, workers=workers, metrics=mw,
        )
        _phase_stats_event(tw, phase, records, updates, agent, game.achievements)

    phase = {"key": "final", "kind": "final", "cycle": N_PHASES + 1,
             "steps": plan.final_orig_steps, "ordinal": (N_PHASES + 1, 0)}
    final_records, final_updates = train_phase(
        agent, game, None, plan.final_orig_steps, seed=seed,
        ordinal=phase["ordinal"], phase_key="final", n_envs=n_envs,
        workers=workers, metrics=mw,
    )
    _phase_stats_event(tw, phase, final_records, final_updates, agent, game.achievements)
    return _finish(plan, agent, game, tw, mw, out_dir, seed=seed, n_envs=n_envs,
                   workers=workers, final_records=final_records,
                   final_updates=final_updates)
