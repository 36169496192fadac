"""Agent checkpoints: versioned binary plus a JSON sidecar with step count,
config hash, and a shape manifest for integrity checks."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import torch

from ..errors import CheckpointError
from .agent import Agent
from .policy import PolicySpec
from .ppo import PpoConfig

FORMAT_VERSION = 1


def config_hash(cfg: PpoConfig, spec: PolicySpec) -> str:
    blob = json.dumps({"ppo": cfg.to_dict(), "policy": spec.to_dict()}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def save_checkpoint(path, agent: Agent, *, extra: dict | None = None) -> Path:
    path = Path(path)
    payload = {
        "format_version": FORMAT_VERSION,
        "policy_spec": agent.spec.to_dict(),
        "ppo_config": agent.cfg.to_dict(),
        "agent": agent.state_dict(),
        "extra": extra or {},
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)
    sidecar = {
        "format_version": FORMAT_VERSION,
        "step_count": agent.global_step,
        "config_hash": config_hash(agent.cfg, agent.spec),
        "shape_manifest": {
            name: list(tensor.shape) for name, tensor in agent.policy.state_dict().items()
        },
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2))
    return path


def load_checkpoint(path) -> Agent:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, weights_only=False)
    except Exception as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
    if payload.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has format {payload.get('format_version')}; "
            f"expected {FORMAT_VERSION}"
        )
    spec = PolicySpec.from_dict(payload["policy_spec"])
    cfg = PpoConfig(**payload["ppo_config"])
    agent = Agent(spec, cfg, seed=payload["agent"]["seed"])
    agent.load_state_dict(payload["agent"])

    sidecar_path = path.with_suffix(path.suffix + ".json")
    if sidecar_path.exists():
        sidecar = json.loads(sidecar_path.read_text())
        manifest = {
            name: list(tensor.shape) for name, tensor in agent.policy.state_dict().items()
        }
        if sidecar.get("shape_manifest") != manifest:
            raise CheckpointError(f"shape manifest mismatch for {path}")
    return agent
