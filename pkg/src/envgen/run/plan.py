"""Training-cycle schedule and score reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

CURRICULA = ("envgen_adaptive", "fixed_llm", "easy_to_hard", "adversarial", "original_only")


@dataclass(frozen=True)
class CyclePlan:
    """The loop schedule: how many cycles, how many generated environments,
    and how the step budget is split between generated and original worlds."""

    n_cycles: int = 4
    n_llm_envs: int = 4
    t_llm_env: int = 120_000
    t_orig_env: int = 120_000
    final_orig_steps: int = 1_000_000
    mixture_ratio: tuple = (1, 1)
    eval_seeds: int = 12
    episodes_per_seed: int = 16
    generator: str = "scripted"  # llm | scripted | fixture

    def __post_init__(self):
        if self.n_cycles < 0 or self.n_llm_envs < 1:
            raise ValueError("n_cycles must be >= 0 and n_llm_envs >= 1")
        if self.generator not in ("llm", "scripted", "fixture"):
            raise ValueError(f"unknown generator kind {self.generator!r}")
        if self.eval_seeds < 1 or self.episodes_per_seed < 1:
            raise ValueError("evaluation needs at least one seed and one episode")
        a, b = self.mixture_ratio
        if self.n_cycles and self.t_llm_env * b != self.t_orig_env * a:
            raise ValueError(
                f"step split {self.t_llm_env}:{self.t_orig_env} does not match "
                f"mixture ratio {a}:{b}"
            )

    @property
    def cycle_steps(self) -> int:
        return (self.t_llm_env + self.t_orig_env) * self.n_cycles

    @property
    def total_steps(self) -> int:
        return self.cycle_steps + self.final_orig_steps

    def to_dict(self) -> dict:
        return {
            "n_cycles": self.n_cycles,
            "n_llm_envs": self.n_llm_envs,
            "t_llm_env": self.t_llm_env,
            "t_orig_env": self.t_orig_env,
            "final_orig_steps": self.final_orig_steps,
            "mixture_ratio": list(self.mixture_ratio),
            "eval_seeds": self.eval_seeds,
            "episodes_per_seed": self.episodes_per_seed,
            "generator": self.generator,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CyclePlan":
        data = dict(data)
        if "mixture_ratio" in data:
            data["mixture_ratio"] = tuple(data["mixture_ratio"])
        return cls(**data)


def geometric_mean_score(rates) -> float:
    """exp(mean(ln(1 + s_i))) - 1 over any number of success rates."""
    rates = list(rates)
    if not rates:
        return 0.0
    total = 0.0
    for s in rates:
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"success rate {s} outside [0, 1]")
        total += math.log1p(s)
    return math.expm1(total / len(rates))


def crafter_score(rates) -> float:
    """The 22-achievement aggregate score; rejects any other vector length."""
    rates = list(rates)
    if len(rates) != 22:
        raise ValueError(f"expected 22 success rates, got {len(rates)}")
    return geometric_mean_score(rates)


@dataclass
class ScoreReport:
    """Per-achievement success rates over the scored window's episodes."""

    rates: dict  # achievement -> success rate in [0, 1]
    score: float
    mean_reward: float
    mean_raw_unlocks: float
    scored_window: tuple  # (start_gstep, end_gstep)
    n_episodes: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rates": self.rates,
            "score": self.score,
            "mean_reward": self.mean_reward,
            "mean_raw_unlocks": self.mean_raw_unlocks,
            "scored_window": list(self.scored_window),
            "n_episodes": self.n_episodes,
            **({"extra": self.extra} if self.extra else {}),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScoreReport":
        return cls(
            rates=data["rates"],
            score=data["score"],
            mean_reward=data["mean_reward"],
            mean_raw_unlocks=data["mean_raw_unlocks"],
            scored_window=tuple(data["scored_window"]),
            n_episodes=data["n_episodes"],
            extra=data.get("extra", {}),
        )


def score_from_records(records, achievements, window) -> ScoreReport:
    """Score the episodes completed inside the final training window."""
    episodes = [r for r in records if window[0] <= r.end_gstep <= window[1]]
    n = len(episodes)
    if n == 0:
        rates = {a: 0.0 for a in achievements}
        return ScoreReport(rates, 0.0, 0.0, 0.0, window, 0)
    rates = {
        a: sum(1 for r in episodes if a in r.unlocked) / n for a in achievements
    }
    return ScoreReport(
        rates=rates,
        score=geometric_mean_score(rates.values()),
        mean_reward=sum(r.shaped_return for r in episodes) / n,
        mean_raw_unlocks=sum(r.raw_unlocks for r in episodes) / n,
        scored_window=window,
        n_episodes=n,
    )
