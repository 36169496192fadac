"""Command-line contract: exit codes, artifacts, config echo closure."""

import json
from pathlib import Path

import pytest

from envgen.cli import main
from envgen.presets import RunConfig, build_run_config, dump_toml, load_toml


def test_train_smoke_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    code = main([
        "train", "--game", "craftbench", "--curriculum", "envgen",
        "--generator", "scripted", "--preset", "smoke", "--seed", "1",
        "--out", str(out),
    ])
    assert code == 0
    for name in ("score.json", "transcript.jsonl", "metrics.jsonl",
                 "per_achievement.csv", "effective_config.toml"):
        assert (out / name).exists(), name
    score = json.loads((out / "score.json").read_text())
    assert 0.0 <= score["score"] <= 1.0


def test_invalid_curriculum_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["train", "--curriculum", "bogus"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_heist_single_cycle_via_cli(tmp_path, heist_responses_dir):
    out = tmp_path / "heist"
    code = main([
        "train", "--game", "heist", "--curriculum", "envgen",
        "--generator", "fixture", "--fixture-dir", str(heist_responses_dir),
        "--preset", "smoke", "--cycles", "1", "--seed", "0", "--out", str(out),
    ])
    assert code == 0
    events = [json.loads(line) for line in (out / "transcript.jsonl").read_text().splitlines()]
    assert sum(1 for e in events if e["event"] == "bundle") == 1


def test_eval_and_plot_round_trip(tmp_path, heist_responses_dir):
    run_a = tmp_path / "a"
    run_b = tmp_path / "b"
    for seed, out in ((3, run_a), (4, run_b)):
        assert main([
            "train", "--game", "craftbench", "--curriculum", "envgen",
            "--generator", "scripted", "--preset", "smoke",
            "--seed", str(seed), "--out", str(out),
        ]) == 0

    eval_dir = tmp_path / "eval"
    assert main([
        "eval", "--checkpoint", str(run_a / "checkpoints" / "final.ckpt"),
        "--game", "craftbench", "--preset", "smoke",
        "--seeds", "2", "--episodes", "2", "--out", str(eval_dir),
    ]) == 0
    report = json.loads((eval_dir / "perf_report.json").read_text())
    assert report["n_seeds"] == 2
    assert (eval_dir / "per_achievement.csv").exists()

    plots = tmp_path / "plots"
    assert main(["plot", "--runs", str(run_a), str(run_b), "--out", str(plots)]) == 0
    assert (plots / "success_rates.svg").exists()
    svgs = sorted(p.name for p in plots.glob("*.svg"))
    assert any(name.startswith("unlock_times") for name in svgs)

    # identical inputs give byte-identical SVGs
    plots2 = tmp_path / "plots2"
    assert main(["plot", "--runs", str(run_a), str(run_b), "--out", str(plots2)]) == 0
    for path in plots.glob("*.svg"):
        assert path.read_bytes() == (plots2 / path.name).read_bytes(), path.name


def test_eval_missing_checkpoint_is_runtime_error(tmp_path, capsys):
    code = main(["eval", "--checkpoint", str(tmp_path / "none.ckpt"),
                 "--game", "craftbench", "--out", str(tmp_path / "out")])
    assert code == 3
    assert "none.ckpt" in capsys.readouterr().err


def test_plot_without_inputs_is_runtime_error(tmp_path, capsys):
    code = main(["plot", "--runs", str(tmp_path / "empty"), "--out", str(tmp_path / "p")])
    assert code == 3
    err = capsys.readouterr().err
    assert "metrics.jsonl" in err or "per_achievement" in err


def test_gen_envs_scripted_stdout(capsys):
    assert main(["gen-envs", "--game", "craftbench", "--generator", "scripted",
                 "--n", "4", "--seed", "2"]) == 0
    bundle = json.loads(capsys.readouterr().out)
    assert len(bundle) == 4
    assert {"grassland", "mountain", "beaches", "natural"} >= {
        c["target_biome"] for c in bundle
    }


def test_gen_envs_with_feedback_file(tmp_path, capsys):
    feedback = {
        "per_achievement": {"collect_coal": {"mean": 1.0, "std": 0.5},
                            "collect_wood": {"mean": 90.0, "std": 3.0}},
        "n_seeds": 12,
    }
    path = tmp_path / "feedback.json"
    path.write_text(json.dumps(feedback))
    assert main(["gen-envs", "--game", "craftbench", "--generator", "scripted",
                 "--n", "2", "--feedback", str(path)]) == 0
    bundle = json.loads(capsys.readouterr().out)
    assert any(c.get("coal_rarity") == "very_common" for c in bundle)


class TestRunConfig:
    def test_effective_config_closure(self, tmp_path):
        out = tmp_path / "run"
        assert main([
            "train", "--game", "craftbench", "--curriculum", "original-only",
            "--preset", "smoke", "--seed", "5", "--out", str(out),
        ]) == 0
        echoed = out / "effective_config.toml"
        rebuilt = build_run_config(config_path=echoed)
        original = build_run_config(
            preset="smoke",
            flag_overrides={"game": "craftbench", "curriculum": "original_only",
                            "seeds": [5], "out": str(out)},
        )
        assert rebuilt == original

    def test_unknown_toml_key_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text('game = "craftbench"\nturbo_mode = true\n')
        from envgen.presets import RunConfigError

        with pytest.raises(RunConfigError, match="turbo_mode"):
            build_run_config(config_path=path)

    def test_unknown_ppo_key_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text('[ppo]\nmomentum = 0.9\n')
        from envgen.presets import RunConfigError

        with pytest.raises(RunConfigError, match="momentum"):
            build_run_config(config_path=path)

    def test_toml_round_trip(self, tmp_path):
        config = RunConfig(game="heist", seeds=[1, 2], ppo={"epochs": 2})
        path = tmp_path / "echo.toml"
        path.write_text(dump_toml(config))
        data = load_toml(path)
        assert data["game"] == "heist"
        assert data["seeds"] == [1, 2]
        assert data["ppo"]["epochs"] == 2

    def test_flags_beat_file_beat_preset(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("n_cycles = 7\n")
        config = build_run_config(preset="smoke", config_path=path,
                                  flag_overrides={"n_cycles": 9})
        assert config.n_cycles == 9
        config = build_run_config(preset="smoke", config_path=path)
        assert config.n_cycles == 7
