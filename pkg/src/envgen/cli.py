"""Command-line entry point: train, eval, plot, gen-envs.

Exit codes: 0 success, 2 usage error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import CheckpointError
from .generator import LlmEndpoint, PerfReport, summarize_eval
from .plotting import (
    PlotInputError,
    plot_score_curve,
    plot_success_rates,
    plot_unlock_curves,
    write_rates_csv,
)
from .presets import (
    CURRICULUM_ALIASES,
    GAMES,
    GENERATORS,
    RunConfig,
    RunConfigError,
    build_run_config,
    dump_toml,
)
from .rl import Agent, PpoConfig, load_checkpoint
from .run import (
    CyclePlan,
    craftbench_game,
    evaluate,
    heist_game,
    make_generator,
    read_jsonl,
    run_adversarial,
    run_easy_to_hard,
    run_envgen,
    run_original_only,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _game_from_config(config: RunConfig):
    if config.game == "craftbench":
        return craftbench_game(
            size=config.world_size,
            max_steps=config.world_max_steps,
            tracked=tuple(config.achievements),
            conv_channels=tuple(config.conv_channels),
            hidden=config.hidden,
        )
    return heist_game(
        conv_channels=tuple(config.conv_channels), hidden=config.hidden
    )


def _endpoint_from_config(config: RunConfig) -> LlmEndpoint:
    return LlmEndpoint(
        base_url=config.endpoint_url,
        model_name=config.model,
        temperature=config.temperature,
        timeout=config.timeout,
        max_retries=config.max_retries,
        fixture_dir=config.fixture_dir or None,
    )


def _plan_from_config(config: RunConfig) -> CyclePlan:
    return CyclePlan(
        n_cycles=config.n_cycles,
        n_llm_envs=config.n_llm_envs,
        t_llm_env=config.t_llm_env,
        t_orig_env=config.t_orig_env,
        final_orig_steps=config.final_orig_steps,
        mixture_ratio=tuple(config.mixture_ratio),
        eval_seeds=config.eval_seeds,
        episodes_per_seed=config.episodes_per_seed,
        generator=config.generator,
    )


def _run_one_seed(config: RunConfig, seed: int, out_dir: Path, resume: bool) -> dict:
    game = _game_from_config(config)
    plan = _plan_from_config(config)
    ppo = PpoConfig(**config.ppo)
    agent = Agent(game.policy_spec, ppo, seed=seed)
    generator = make_generator(
        config.generator, game.name, seed=seed,
        endpoint=_endpoint_from_config(config),
        fixture_dir=config.fixture_dir or None,
        achievements=game.achievements,
    )
    common = dict(seed=seed, out_dir=out_dir, n_envs=config.n_envs,
                  workers=config.workers)
    if config.curriculum == "envgen_adaptive":
        result = run_envgen(plan, agent, generator, game, mode="adaptive",
                            resume=resume, **common)
    elif config.curriculum == "fixed_llm":
        result = run_envgen(plan, agent, generator, game, mode="fixed",
                            resume=resume, **common)
    elif config.curriculum == "original_only":
        result = run_original_only(plan, agent, game, **common)
    elif config.curriculum == "easy_to_hard":
        result = run_easy_to_hard(plan, agent, generator, game,
                                  validation_steps=config.validation_steps, **common)
    else:
        result = run_adversarial(plan, agent, generator, game, **common)

    write_rates_csv(
        out_dir / "per_achievement.csv",
        {name: rate * 100.0 for name, rate in result.score.rates.items()},
    )
    return result.score.to_dict()


def cmd_train(args) -> int:
    flag_overrides = {}
    if args.game:
        flag_overrides["game"] = args.game
    if args.curriculum:
        flag_overrides["curriculum"] = CURRICULUM_ALIASES[args.curriculum]
    if args.generator:
        flag_overrides["generator"] = args.generator
    if args.seed is not None:
        flag_overrides["seeds"] = [args.seed]
    if args.out:
        flag_overrides["out"] = args.out
    for flag, key in (
        ("cycles", "n_cycles"), ("llm_steps", "t_llm_env"),
        ("orig_steps", "t_orig_env"), ("final_steps", "final_orig_steps"),
        ("n_llm_envs", "n_llm_envs"), ("n_envs", "n_envs"),
        ("workers", "workers"), ("fixture_dir", "fixture_dir"),
        ("endpoint_url", "endpoint_url"), ("model", "model"),
    ):
        value = getattr(args, flag)
        if value is not None:
            flag_overrides[key] = value
    config = build_run_config(
        preset=args.preset, config_path=args.config, flag_overrides=flag_overrides
    )

    out_root = Path(config.out)
    out_root.mkdir(parents=True, exist_ok=True)
    (out_root / "effective_config.toml").write_text(dump_toml(config))

    summary = {}
    for seed in config.seeds:
        out_dir = out_root if len(config.seeds) == 1 else out_root / f"seed{seed:03d}"
        score = _run_one_seed(config, seed, out_dir, args.resume)
        summary[str(seed)] = score
        print(f"seed {seed}: score {score['score']:.4f} over {score['n_episodes']} episodes")
    if len(config.seeds) > 1:
        (out_root / "summary.json").write_text(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_eval(args) -> int:
    agent = load_checkpoint(args.checkpoint)
    flag_overrides = {"game": args.game} if args.game else {}
    config = build_run_config(preset=args.preset, config_path=args.config,
                              flag_overrides=flag_overrides)
    game = _game_from_config(config)
    if game.policy_spec != agent.spec:
        raise RunConfigError(
            f"checkpoint policy {agent.spec} does not match the {game.name} "
            f"environment ({game.policy_spec}); pass the matching --preset/--config"
        )
    n_seeds = args.seeds if args.seeds is not None else (10 if game.name == "heist" else 12)
    episodes = args.episodes if args.episodes is not None else (
        100 if game.name == "heist" else 16
    )
    matrix = evaluate(agent, game, n_seeds, episodes, base_seed=args.seed,
                      workers=config.workers)
    report = summarize_eval(matrix, game.achievements)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "perf_report.json").write_text(json.dumps(report.to_dict(), indent=2))
    write_rates_csv(
        out_dir / "per_achievement.csv",
        {name: stat["mean"] for name, stat in report.per_achievement.items()},
        {name: stat["std"] for name, stat in report.per_achievement.items()},
    )
    print(f"evaluated {n_seeds} seeds x {episodes} episodes -> {out_dir}")
    return EXIT_OK


def cmd_plot(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    runs = [Path(r) for r in args.runs]
    emitted = []

    if len(runs) >= 2:
        emitted.append(
            plot_success_rates(
                [r / "per_achievement.csv" for r in runs],
                out_dir / "success_rates.svg",
                labels=[r.name for r in runs],
            )
        )
    for i, run in enumerate(runs):
        suffix = "" if len(runs) == 1 else f"_{run.name}"
        metrics = run / "metrics.jsonl"
        if metrics.exists():
            achievements = args.achievements
            if not achievements:
                events = [e for e in read_jsonl(metrics) if e.get("type") == "unlock"]
                achievements = sorted({e["achievement"] for e in events})[:4]
            if achievements:
                emitted.append(
                    plot_unlock_curves(metrics, out_dir / f"unlock_times{suffix}.svg",
                                       achievements)
                )
        transcript = run / "transcript.jsonl"
        if transcript.exists():
            has_reports = any(
                e["event"] == "perf_report" for e in read_jsonl(transcript)
            )
            if has_reports:
                emitted.append(
                    plot_score_curve(transcript, out_dir / f"score_curve{suffix}.svg")
                )
    if not emitted:
        raise PlotInputError(
            "nothing to plot: need per_achievement.csv (2+ runs), metrics.jsonl, "
            "or transcript.jsonl with perf_report events in the run directories"
        )
    for path in emitted:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_gen_envs(args) -> int:
    config = build_run_config(
        preset=args.preset, config_path=args.config,
        flag_overrides={"game": args.game} if args.game else {},
    )
    if args.generator:
        config.generator = args.generator
        config.validate()
    feedback = None
    if args.feedback:
        feedback = PerfReport.from_dict(json.loads(Path(args.feedback).read_text()))
    generator = make_generator(
        config.generator, config.game, seed=args.seed,
        endpoint=_endpoint_from_config(config),
        fixture_dir=config.fixture_dir or None,
        achievements=tuple(config.achievements) if config.game == "craftbench" else None,
    )
    result = generator.generate(1, feedback, args.n)
    text = json.dumps([c.to_dict() for c in result.bundle.configs], indent=2)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="envgen",
        description="Adaptive environment generation for training small RL agents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run a training curriculum")
    train.add_argument("--game", choices=GAMES)
    train.add_argument("--curriculum", choices=sorted(CURRICULUM_ALIASES))
    train.add_argument("--generator", choices=GENERATORS)
    train.add_argument("--preset", choices=("default", "mini", "smoke"))
    train.add_argument("--config", help="run-config TOML (flags win)")
    train.add_argument("--seed", type=int)
    train.add_argument("--cycles", type=int, dest="cycles")
    train.add_argument("--llm-steps", type=int, dest="llm_steps")
    train.add_argument("--orig-steps", type=int, dest="orig_steps")
    train.add_argument("--final-steps", type=int, dest="final_steps")
    train.add_argument("--n-llm-envs", type=int, dest="n_llm_envs")
    train.add_argument("--n-envs", type=int, dest="n_envs")
    train.add_argument("--workers", type=int)
    train.add_argument("--fixture-dir", dest="fixture_dir")
    train.add_argument("--endpoint-url", dest="endpoint_url")
    train.add_argument("--model")
    train.add_argument("--out")
    train.add_argument("--resume", action="store_true",
                       help="continue from the last completed phase in --out")
    train.set_defaults(func=cmd_train)

    evaluate_p = sub.add_parser("eval", help="evaluate a checkpoint")
    evaluate_p.add_argument("--checkpoint", required=True)
    evaluate_p.add_argument("--game", choices=GAMES)
    evaluate_p.add_argument("--preset", choices=("default", "mini", "smoke"))
    evaluate_p.add_argument("--config")
    evaluate_p.add_argument("--seeds", type=int, help="number of evaluation seeds")
    evaluate_p.add_argument("--episodes", type=int, help="episodes per seed")
    evaluate_p.add_argument("--seed", type=int, default=0, help="base seed")
    evaluate_p.add_argument("--out", default="eval")
    evaluate_p.set_defaults(func=cmd_eval)

    plot = sub.add_parser("plot", help="emit SVG charts from run artifacts")
    plot.add_argument("--runs", nargs="+", required=True, help="run directories")
    plot.add_argument("--out", default="plots")
    plot.add_argument("--achievements", nargs="*", default=None,
                      help="achievement names for the unlock-time curves")
    plot.set_defaults(func=cmd_plot)

    gen = sub.add_parser("gen-envs", help="one-shot bundle generation")
    gen.add_argument("--game", choices=GAMES)
    gen.add_argument("--generator", choices=GENERATORS)
    gen.add_argument("--preset", choices=("default", "mini", "smoke"))
    gen.add_argument("--config")
    gen.add_argument("--n", type=int, default=4)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--feedback", help="PerfReport JSON to adapt against")
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_gen_envs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RunConfigError, PlotInputError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        print("interrupted; checkpoints and transcript are preserved", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001  (CLI boundary)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
