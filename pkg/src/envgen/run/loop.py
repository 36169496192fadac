"""The adaptive training loop and its non-adaptive baselines.

One run is a sequence of phases (generated-env training, original-env
training with evaluation, then one long final original-env phase that the
score is computed over). Every phase boundary writes a checkpoint, so a run
can resume from the first unfinished phase.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ..generator import PerfReport, summarize_eval
from ..rl.checkpoint import load_checkpoint, save_checkpoint
from ..rl.rollout import VecEnv, collect_rollout
from .evaluate import evaluate
from .games import GameSpec, derive_seed
from .generators import GenerationResult
from .plan import CyclePlan, ScoreReport, score_from_records
from .transcript import MetricsWriter, TranscriptWriter, read_jsonl


@dataclass
class RunResult:
    agent: object
    score: ScoreReport
    events: list
    out_dir: Path | None


def _phase_sequence(plan: CyclePlan, mode: str):
    """Ordered phase descriptors for one run."""
    phases = []
    for cycle in range(1, plan.n_cycles + 1):
        if mode == "original_only":
            phases.append(
                {"key": f"cycle{cycle:02d}/warmup", "kind": "warmup", "cycle": cycle,
                 "steps": plan.t_llm_env + plan.t_orig_env, "ordinal": (cycle, 0)}
            )
            continue
        phases.append(
            {"key": f"cycle{cycle:02d}/llm", "kind": "llm", "cycle": cycle,
             "steps": plan.t_llm_env, "ordinal": (cycle, 1)}
        )
        phases.append(
            {"key": f"cycle{cycle:02d}/orig", "kind": "orig", "cycle": cycle,
             "steps": plan.t_orig_env, "ordinal": (cycle, 2)}
        )
    phases.append(
        {"key": "final", "kind": "final", "cycle": plan.n_cycles + 1,
         "steps": plan.final_orig_steps, "ordinal": (plan.n_cycles + 1, 0)}
    )
    return phases


def train_phase(agent, game: GameSpec, configs, steps: int, *, seed: int,
                ordinal: tuple, phase_key: str, n_envs: int, workers: int = 0,
                metrics: MetricsWriter | None = None):
    """Consume exactly ``steps`` environment steps of PPO training.

    ``configs`` is round-robined across the vector slots; None trains in the
    original environment. Returns the finished-episode records.
    """
    if steps % n_envs != 0:
        raise ValueError(f"phase budget {steps} is not divisible by {n_envs} envs")
    envs = []
    for slot in range(n_envs):
        config = configs[slot % len(configs)] if configs else None
        env_seed = derive_seed(seed, *ordinal, slot)
        if config is None:
            envs.append(game.make_original(env_seed))
        else:
            envs.append(game.make_from_config(config, env_seed))
    venv = VecEnv(envs, workers=workers)
    records: list = []
    updates = 0
    try:
        remaining = steps
        while remaining > 0:
            chunk = min(agent.cfg.rollout_steps, remaining)
            chunk -= chunk % n_envs
            batch = collect_rollout(agent, venv, chunk, base_gstep=agent.global_step)
            records.extend(batch.episode_records)
            stats = agent.update(batch)
            updates += 1
            remaining -= chunk
            if metrics is not None:
                metrics.update(agent.global_step, phase_key, stats)
                for gstep, slot, name in batch.unlock_events:
                    metrics.unlock(gstep, phase_key, slot, name)
    finally:
        venv.close()
    return records, updates


def _phase_stats_event(tw, phase, records, updates, agent, achievements):
    unlock_counts = {a: 0 for a in achievements}
    for record in records:
        for name in record.unlocked:
            unlock_counts[name] += 1
    n = len(records)
    tw.event(
        "phase_stats",
        phase=phase["key"],
        kind=phase["kind"],
        cycle=phase["cycle"],
        steps=phase["steps"],
        updates=updates,
        episodes=n,
        mean_return=(sum(r.shaped_return for r in records) / n) if n else 0.0,
        mean_length=(sum(r.length for r in records) / n) if n else 0.0,
        mean_raw_unlocks=(sum(r.raw_unlocks for r in records) / n) if n else 0.0,
        unlock_counts=unlock_counts,
        gstep=agent.global_step,
    )


def _restore_for_resume(out_dir: Path, generator):
    """Completed-phase bookkeeping from an existing transcript; rewrites the
    transcript/metrics files so the aborted phase leaves no partial events."""
    transcript_path = out_dir / "transcript.jsonl"
    events = read_jsonl(transcript_path) if transcript_path.exists() else []
    last_marker = -1
    completed = []
    for i, event in enumerate(events):
        if event["event"] == "phase_stats":
            last_marker = i
            completed.append(event["phase"])
    kept = events[: last_marker + 1]
    feedback = None
    bundles = {}
    for event in kept:
        if event["event"] == "perf_report":
            feedback = PerfReport.from_dict(event["report"])
        if event["event"] == "bundle":
            bundles[event["cycle"]] = event
    metrics_path = out_dir / "metrics.jsonl"
    if metrics_path.exists():
        keep_keys = set(completed)
        lines = [
            line for line in read_jsonl(metrics_path) if line.get("phase") in keep_keys
        ]
        metrics_path.write_text("".join(json.dumps(line) + "\n" for line in lines))
    conversation_path = out_dir / "conversation.json"
    if conversation_path.exists() and hasattr(generator, "history"):
        generator.history = json.loads(conversation_path.read_text())
        if generator.endpoint.fixture_dir is not None:
            generator.endpoint._fixture_cursor = len(generator.history) // 2
    return kept, completed, feedback, bundles


def _completion_digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _parse_bundle_event(game: GameSpec, event: dict) -> list:
    """Configs from a transcript bundle event (used when resuming)."""
    if game.name == "craftbench":
        from ..config import parse_config_obj as parse
    else:
        from ..heist.maze import parse_heist_config_obj as parse
    return [parse(data) for data in event["configs"]]


def run_envgen(plan: CyclePlan, agent, generator, game: GameSpec, *,
               seed: int = 0, out_dir=None, n_envs: int = 32, workers: int = 0,
               mode: str = "adaptive", resume: bool = False) -> RunResult:
    """The full cycle loop: generate, train in generated envs, train and
    evaluate in the original env, feed performance back, then one long
    original-env phase that the score report covers.

    ``mode="fixed"`` generates one bundle up front and never adapts;
    ``mode="original_only"`` replaces cycle training with original-env steps.
    """
    if mode not in ("adaptive", "fixed", "original_only"):
        raise ValueError(f"unknown mode {mode!r}")
    out_dir = Path(out_dir) if out_dir is not None else None
    phases = _phase_sequence(plan, mode)

    prior_events, completed, feedback, prior_bundles = [], [], None, {}
    if resume:
        if out_dir is None:
            raise ValueError("resume needs an out_dir with transcript and checkpoints")
        prior_events, completed, feedback, prior_bundles = _restore_for_resume(
            out_dir, generator
        )
        if completed:
            agent = load_checkpoint(out_dir / "checkpoints" / "latest.ckpt")

    tw = TranscriptWriter(out_dir / "transcript.jsonl" if out_dir else None)
    mw = MetricsWriter(out_dir / "metrics.jsonl" if out_dir else None)
    if prior_events:
        tw.events.extend(prior_events)
        if tw._fh is not None:
            for event in prior_events:
                tw._fh.write(json.dumps(event) + "\n")
            tw._fh.flush()
    else:
        tw.event(
            "run_start", game=game.name, mode=mode, seed=seed, n_envs=n_envs,
            plan=plan.to_dict(), generator=getattr(generator, "kind", "scripted"),
        )

    def generate(cycle: int) -> list:
        gen_feedback = feedback if (mode == "adaptive" and cycle > 1) else None
        tw.event("cycle_start", cycle=cycle)
        result: GenerationResult = generator.generate(cycle, gen_feedback, plan.n_llm_envs)
        if result.prompt is not None:
            tw.event("prompt", cycle=cycle, text=result.prompt)
        if result.completion is not None:
            tw.event("completion_digest", cycle=cycle,
                     sha256=_completion_digest(result.completion))
        tw.event("bundle", cycle=cycle, provenance=result.bundle.provenance,
                 configs=[c.to_dict() for c in result.bundle.configs])
        if out_dir is not None:
            generator.save_conversation(out_dir / "conversation.json")
        return list(result.bundle.configs)

    configs = None  # the bundle in play (reused across cycles in fixed mode)
    final_records: list = []
    final_updates = 0
    try:
        for phase in phases:
            cycle = phase["cycle"]
            skip = phase["key"] in completed

            if phase["kind"] == "llm":
                if mode == "fixed" and configs is None and prior_bundles:
                    first = prior_bundles[min(prior_bundles)]
                    configs = _parse_bundle_event(game, first)
                if not skip and (mode == "adaptive" or configs is None):
                    configs = generate(cycle)
            if skip:
                continue
            phase_configs = configs if phase["kind"] == "llm" else None
            records, updates = train_phase(
                agent, game, phase_configs, phase["steps"], seed=seed,
                ordinal=phase["ordinal"], phase_key=phase["key"],
                n_envs=n_envs, workers=workers, metrics=mw,
            )
            if phase["kind"] == "final":
                final_records = records
                final_updates = updates

            if phase["kind"] == "orig" and mode == "adaptive":
                matrix = evaluate(
                    agent, game, plan.eval_seeds, plan.episodes_per_seed,
                    base_seed=derive_seed(seed, 23, cycle), workers=workers,
                )
                feedback = summarize_eval(matrix, game.achievements, cycle_index=cycle)
                tw.event("perf_report", cycle=cycle, report=feedback.to_dict())

            _phase_stats_event(tw, phase, records, updates, agent, game.achievements)
            if out_dir is not None:
                save_checkpoint(
                    out_dir / "checkpoints" / "latest.ckpt", agent,
                    extra={"phase": phase["key"]},
                )

        window = (plan.cycle_steps + 1, plan.total_steps)
        score = score_from_records(final_records, game.achievements, window)
        score.extra["final_updates"] = final_updates
        tw.event("score", report=score.to_dict())
        if out_dir is not None:
            save_checkpoint(out_dir / "checkpoints" / "final.ckpt", agent,
                            extra={"phase": "final"})
            (out_dir / "score.json").write_text(json.dumps(score.to_dict(), indent=2))
    finally:
        tw.close()
        mw.close()
    return RunResult(agent, score, tw.events, out_dir)
