"""Policy/value network: small conv stack over the one-hot spatial view with
the status vector joined after flattening."""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn.functional as F
from torch import nn

PARAM_BUDGET = 5_000_000


def _orthogonal(layer: nn.Module, gain: float = 2.0**0.5) -> nn.Module:
    nn.init.orthogonal_(layer.weight, gain)
    nn.init.constant_(layer.bias, 0.0)
    return layer


@dataclass(frozen=True)
class PolicySpec:
    """Everything needed to rebuild the network (stored in checkpoints)."""

    spatial_shape: tuple  # (channels, height, width)
    status_dim: int
    n_actions: int
    conv_channels: tuple = (32, 64, 64)
    hidden: int = 512

    def build(self, seed: int | None = None) -> "PolicyNetwork":
        if seed is None:
            return PolicyNetwork(self)
        with torch.random.fork_rng():
            torch.manual_seed(seed)
            return PolicyNetwork(self)

    def to_dict(self) -> dict:
        return {
            "spatial_shape": list(self.spatial_shape),
            "status_dim": self.status_dim,
            "n_actions": self.n_actions,
            "conv_channels": list(self.conv_channels),
            "hidden": self.hidden,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolicySpec":
        return cls(
            spatial_shape=tuple(data["spatial_shape"]),
            status_dim=data["status_dim"],
            n_actions=data["n_actions"],
            conv_channels=tuple(data["conv_channels"]),
            hidden=data["hidden"],
        )


class PolicyNetwork(nn.Module):
    """Three conv blocks (3x3, stride 1, max-pool 2), two dense layers, a
    normalization layer after the final dense layer, and action/value heads."""

    def __init__(self, spec: PolicySpec):
        super().__init__()
        self.spec = spec
        c, h, w = spec.spatial_shape
        channels = spec.conv_channels
        self.convs = nn.ModuleList()
        prev = c
        for ch in channels:
            self.convs.append(_orthogonal(nn.Conv2d(prev, ch, 3, stride=1, padding=1)))
            prev = ch
            h, w = max(h // 2, 1), max(w // 2, 1)
        flat = prev * h * w
        self.dense1 = _orthogonal(nn.Linear(flat + spec.status_dim, spec.hidden))
        self.dense2 = _orthogonal(nn.Linear(spec.hidden, spec.hidden))
        self.norm = nn.LayerNorm(spec.hidden)
        self.pi_head = _orthogonal(nn.Linear(spec.hidden, spec.n_actions), gain=0.01)
        self.v_head = _orthogonal(nn.Linear(spec.hidden, 1), gain=1.0)
        assert self.parameter_count() < PARAM_BUDGET, "policy exceeds the size budget"

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def forward(self, spatial: torch.Tensor, status: torch.Tensor):
        x = spatial
        for conv in self.convs:
            x = F.max_pool2d(F.relu(conv(x)), 2, ceil_mode=False) if min(x.shape[-2:]) >= 2 else F.relu(conv(x))
        x = torch.flatten(x, 1)
        x = torch.cat([x, status], dim=1)
        x = F.relu(self.dense1(x))
        x = F.relu(self.norm(self.dense2(x)))
        return self.pi_head(x), self.v_head(x).squeeze(-1)


class TinyStatusPolicy(nn.Module):
    """Minimal status-only policy (one hidden layer) for oracle and gradient
    checks; implements the same forward contract as PolicyNetwork."""

    def __init__(self, status_dim: int, n_actions: int, hidden: int = 8,
                 dtype: torch.dtype = torch.float64):
        super().__init__()
        self.fc = nn.Linear(status_dim, hidden, dtype=dtype)
        self.pi_head = nn.Linear(hidden, n_actions, dtype=dtype)
        self.v_head = nn.Linear(hidden, 1, dtype=dtype)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def forward(self, spatial: torch.Tensor, status: torch.Tensor):
        x = torch.tanh(self.fc(status))
        return self.pi_head(x), self.v_head(x).squeeze(-1)
