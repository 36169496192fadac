"""PPO update semantics, including an independent numpy reimplementation used
as an oracle for the full epoch/minibatch/Adam pipeline."""

import numpy as np
import pytest
import torch

from envgen.rl import EwmaNormalizer, PpoConfig, TinyStatusPolicy, UpdateError, ppo_update
from envgen.rl.ppo import ppo_loss_terms
from envgen.rl.rollout import RolloutBatch


def make_batch(rng, n=2, t=8, status_dim=2, n_actions=2, one_hot=True):
    if one_hot:
        status = np.zeros((n, t, status_dim), dtype=np.float32)
        idx = rng.integers(status_dim, size=(n, t))
        for i in range(n):
            status[i, np.arange(t), idx[i]] = 1.0
    else:
        status = rng.normal(size=(n, t, status_dim)).astype(np.float32)
    return RolloutBatch(
        spatial=np.zeros((n, t, 1, 1, 1), dtype=np.float32),
        status=status,
        actions=rng.integers(n_actions, size=(n, t)),
        logps=np.log(rng.uniform(0.2, 0.7, size=(n, t))).astype(np.float32),
        values=rng.normal(size=(n, t)).astype(np.float32),
        rewards=rng.normal(size=(n, t)).astype(np.float32),
        dones=(rng.random((n, t)) < 0.2),
        bootstrap_values=rng.normal(size=n).astype(np.float32),
    )


# ---------------------------------------------------------------------------
# independent reimplementation (numpy, float64) of the exact update pipeline


class NumpyPpoOracle:
    """Forward, backward, clipping, and Adam written from scratch for the
    TinyStatusPolicy architecture."""

    def __init__(self, policy: TinyStatusPolicy, cfg: PpoConfig):
        self.cfg = cfg
        state = {k: v.detach().numpy().copy() for k, v in policy.state_dict().items()}
        self.params = {
            "Wf": state["fc.weight"], "bf": state["fc.bias"],
            "Wp": state["pi_head.weight"], "bp": state["pi_head.bias"],
            "Wv": state["v_head.weight"], "bv": state["v_head.bias"],
        }
        self.adam_m = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.adam_v = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.adam_t = 0

    def forward(self, status):
        pre = status @ self.params["Wf"].T + self.params["bf"]
        h = np.tanh(pre)
        logits = h @ self.params["Wp"].T + self.params["bp"]
        values = (h @ self.params["Wv"].T + self.params["bv"]).squeeze(-1)
        return pre, h, logits, values

    def loss(self, status, actions, old_logps, adv, ret):
        _, _, logits, values = self.forward(status)
        lp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
        chosen = lp[np.arange(len(actions)), actions]
        ratio = np.exp(chosen - old_logps)
        clipped = np.clip(ratio, 1 - self.cfg.clip_range, 1 + self.cfg.clip_range)
        pi_loss = -np.minimum(ratio * adv, clipped * adv).mean()
        v_loss = ((values - ret) ** 2).mean()
        entropy = (-(np.exp(lp) * lp).sum(axis=1)).mean()
        return pi_loss + self.cfg.vf_coef * v_loss - self.cfg.entropy_coef * entropy

    def gradients(self, status, actions, old_logps, adv, ret):
        cfg = self.cfg
        B = len(actions)
        pre, h, logits, values = self.forward(status)
        lp = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
        p = np.exp(lp)
        chosen = lp[np.arange(B), actions]
        ratio = np.exp(chosen - old_logps)
        lo, hi = 1 - cfg.clip_range, 1 + cfg.clip_range
        inside = (ratio >= lo) & (ratio <= hi)
        surr1 = ratio * adv
        surr2 = np.clip(ratio, lo, hi) * adv
        # torch.minimum: gradient follows the smaller branch, split on ties
        d1 = adv * ratio  # d surr1 / d chosen
        d2 = adv * ratio * inside  # d surr2 / d chosen (zero when saturated)
        dmin = np.where(surr1 < surr2, d1, np.where(surr2 < surr1, d2, 0.5 * (d1 + d2)))
        g_chosen = -dmin / B

        onehot = np.zeros_like(p)
        onehot[np.arange(B), actions] = 1.0
        g_logits = g_chosen[:, None] * (onehot - p)
        # entropy bonus: -coef * mean(H); dH/dlogits = -p * (lp + H)
        H = -(p * lp).sum(axis=1)
        g_logits += cfg.entropy_coef / B * p * (lp + H[:, None])
        g_values = cfg.vf_coef * 2.0 * (values - ret) / B

        grads = {}
        grads["Wp"] = g_logits.T @ h
        grads["bp"] = g_logits.sum(axis=0)
        grads["Wv"] = (g_values[:, None] * h).sum(axis=0, keepdims=True)
        grads["bv"] = np.array([g_values.sum()])
        g_h = g_logits @ self.params["Wp"] + g_values[:, None] * self.params["Wv"]
        g_pre = g_h * (1.0 - np.tanh(pre) ** 2)
        grads["Wf"] = g_pre.T @ status
        grads["bf"] = g_pre.sum(axis=0)
        return grads

    def clip_and_step(self, grads):
        cfg = self.cfg
        total = np.sqrt(sum((g**2).sum() for g in grads.values()))
        coef = cfg.max_grad_norm / (total + 1e-6)
        if coef < 1.0:
            grads = {k: g * coef for k, g in grads.items()}
        self.adam_t += 1
        b1, b2 = 0.9, 0.999
        for key, grad in grads.items():
            self.adam_m[key] = b1 * self.adam_m[key] + (1 - b1) * grad
            self.adam_v[key] = b2 * self.adam_v[key] + (1 - b2) * grad**2
            m_hat = self.adam_m[key] / (1 - b1**self.adam_t)
            v_hat = self.adam_v[key] / (1 - b2**self.adam_t)
            self.params[key] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)

    def run_update(self, batch, perm_rng):
        cfg = self.cfg
        # GAE, straightforward recursion
        n, t = batch.rewards.shape
        adv = np.zeros((n, t))
        for i in range(n):
            gae = 0.0
            next_value = float(batch.bootstrap_values[i])
            for j in range(t - 1, -1, -1):
                alive = 0.0 if batch.dones[i, j] else 1.0
                reward = float(batch.rewards[i, j])
                value = float(batch.values[i, j])
                delta = reward + cfg.discount * next_value * alive - value
                gae = delta + cfg.discount * cfg.gae_lambda * alive * gae
                adv[i, j] = gae
                next_value = value
        returns = adv + batch.values.astype(np.float64)
        # EWMA normalization (first update: debiased to the batch statistics)
        d = cfg.ewma_decay
        mean = (1 - d) * adv.mean() / (1 - d)
        mean_sq = (1 - d) * (adv**2).mean() / (1 - d)
        var = max(mean_sq - mean**2, 0.0)
        norm_adv = (adv - mean) / (np.sqrt(var) + 1e-8)

        n_total = n * t
        status = batch.status.reshape(n_total, -1).astype(np.float64)
        actions = batch.actions.reshape(n_total)
        old_logps = batch.logps.reshape(n_total).astype(np.float64)
        flat_adv = norm_adv.reshape(n_total)
        flat_ret = returns.reshape(n_total)

        size = max(n_total // cfg.minibatches, 1)
        for _ in range(cfg.epochs):
            perm = perm_rng.permutation(n_total)
            for k in range(cfg.minibatches):
                idx = perm[k * size:(k + 1) * size]
                if idx.size == 0:
                    continue
                grads = self.gradients(status[idx], actions[idx], old_logps[idx],
                                       flat_adv[idx], flat_ret[idx])
                self.clip_and_step(grads)
        return status, actions, old_logps, flat_adv, flat_ret


_PARAM_MAPPING = {"fc.weight": "Wf", "fc.bias": "bf", "pi_head.weight": "Wp",
                  "pi_head.bias": "bp", "v_head.weight": "Wv", "v_head.bias": "bv"}


def test_update_matches_numpy_oracle():
    """Full pipeline equivalence on a 2-state/2-action instance: identical
    final parameters and matching full-batch loss decrease."""
    rng = np.random.default_rng(4)
    batch = make_batch(rng, n=2, t=16)
    cfg = PpoConfig(rollout_steps=32, minibatches=4, epochs=3, learning_rate=1e-2)

    policy = TinyStatusPolicy(2, 2, hidden=4, dtype=torch.float64)
    oracle = NumpyPpoOracle(policy, cfg)
    initial_params = {k: v.copy() for k, v in oracle.params.items()}

    status, actions, old_logps, adv, ret = oracle.run_update(
        batch, np.random.default_rng(99)
    )
    loss_after_oracle = oracle.loss(status, actions, old_logps, adv, ret)
    final_params = oracle.params
    oracle.params = initial_params
    loss_before = oracle.loss(status, actions, old_logps, adv, ret)
    oracle.params = final_params

    optimizer = torch.optim.Adam(policy.parameters(), lr=cfg.learning_rate,
                                 eps=cfg.adam_eps)
    ppo_update(policy, optimizer, batch, cfg, EwmaNormalizer(cfg.ewma_decay),
               np.random.default_rng(99))

    torch_params = {k: v.detach().numpy() for k, v in policy.state_dict().items()}
    for torch_name, oracle_name in _PARAM_MAPPING.items():
        np.testing.assert_allclose(
            torch_params[torch_name], oracle.params[oracle_name],
            rtol=0, atol=1e-9, err_msg=torch_name,
        )

    # the loss decrease agrees to 1e-6 (an update definitely happened)
    oracle.params = {o: torch_params[t] for t, o in _PARAM_MAPPING.items()}
    loss_after_torch = oracle.loss(status, actions, old_logps, adv, ret)
    assert loss_before != pytest.approx(loss_after_oracle, abs=1e-12)
    assert abs(
        (loss_before - loss_after_oracle) - (loss_before - loss_after_torch)
    ) < 1e-6


def test_zero_learning_rate_leaves_params_bitwise_equal():
    rng = np.random.default_rng(5)
    batch = make_batch(rng)
    policy = TinyStatusPolicy(2, 2, hidden=4)
    before = {k: v.detach().clone() for k, v in policy.state_dict().items()}
    optimizer = torch.optim.Adam(policy.parameters(), lr=0.0, eps=1e-5)
    ppo_update(policy, optimizer, batch, PpoConfig(), EwmaNormalizer(),
               np.random.default_rng(0))
    for name, tensor in policy.state_dict().items():
        assert torch.equal(tensor, before[name]), name


def test_clip_saturation_zeroes_surrogate_gradient():
    torch.manual_seed(0)
    policy = TinyStatusPolicy(3, 4, hidden=6)
    status = torch.randn(16, 3, dtype=torch.float64)
    spatial = torch.zeros(16, 1, 1, 1, dtype=torch.float64)
    actions = torch.randint(4, (16,))
    with torch.no_grad():
        logits, _ = policy(spatial, status)
        chosen = torch.log_softmax(logits, -1).gather(1, actions.unsqueeze(1)).squeeze(1)
    # behaviour log-probs rigged so every ratio is exp(0.3) > 1.2
    behavior = chosen - 0.3
    advantages = torch.ones(16, dtype=torch.float64)
    returns = torch.zeros(16, dtype=torch.float64)
    cfg = PpoConfig()
    _, policy_loss, *_ = ppo_loss_terms(policy, spatial, status, actions, behavior,
                                        advantages, returns, cfg)
    policy.zero_grad()
    policy_loss.backward()
    for name, param in policy.named_parameters():
        if name.startswith("v_head"):
            continue  # the value head is not part of the surrogate
        assert param.grad is None or torch.allclose(
            param.grad, torch.zeros_like(param.grad)
        ), name


def test_update_deterministic_given_permutation_seed():
    rng = np.random.default_rng(6)
    batch = make_batch(rng, n=2, t=16)
    digests = []
    for _ in range(2):
        torch.manual_seed(11)
        policy = TinyStatusPolicy(2, 2, hidden=4)
        optimizer = torch.optim.Adam(policy.parameters(), lr=1e-3, eps=1e-5)
        ppo_update(policy, optimizer, batch, PpoConfig(minibatches=4),
                   EwmaNormalizer(), np.random.default_rng(42))
        digests.append([v.detach().numpy().tobytes() for v in policy.state_dict().values()])
    assert digests[0] == digests[1]


def test_non_finite_loss_aborts_and_restores():
    rng = np.random.default_rng(7)
    batch = make_batch(rng)
    batch.rewards[0, 0] = np.inf
    policy = TinyStatusPolicy(2, 2, hidden=4)
    before = {k: v.detach().clone() for k, v in policy.state_dict().items()}
    optimizer = torch.optim.Adam(policy.parameters(), lr=1e-3)
    with pytest.raises(UpdateError) as info:
        ppo_update(policy, optimizer, batch, PpoConfig(minibatches=4),
                   EwmaNormalizer(), np.random.default_rng(0))
    assert info.value.minibatch_index == 0
    for name, tensor in policy.state_dict().items():
        assert torch.equal(tensor, before[name]), name


class TestEwmaNormalizer:
    def test_affine_preserves_argmax(self):
        rng = np.random.default_rng(8)
        norm = EwmaNormalizer(0.99)
        for _ in range(5):
            values = rng.normal(size=64) * rng.uniform(0.5, 4.0)
            norm.update(values)
            out = norm.normalize(values)
            assert np.argmax(out) == np.argmax(values)
            assert np.argmin(out) == np.argmin(values)

    def test_statistics_persist_across_updates(self):
        norm = EwmaNormalizer(0.5)
        norm.update(np.zeros(8))
        norm.update(np.ones(8))
        # after [0, 1] batches with decay .5: mean = mean_sq = .5/(1-.25) = 2/3
        expected_var = 2.0 / 3.0 - (2.0 / 3.0) ** 2
        assert norm.normalize(np.array([2.0]))[0] == pytest.approx(
            (2.0 - 2.0 / 3.0) / (np.sqrt(expected_var) + 1e-8)
        )

    def test_state_round_trip(self):
        norm = EwmaNormalizer(0.9)
        norm.update(np.arange(10.0))
        clone = EwmaNormalizer(0.9)
        clone.load_state_dict(norm.state_dict())
        data = np.linspace(-3, 5, 17)
        assert np.allclose(norm.normalize(data), clone.normalize(data))


def test_entropy_coef_does_not_decrease_entropy():
    rng = np.random.default_rng(9)
    batch = make_batch(rng, n=2, t=16, status_dim=3, n_actions=4)

    def entropy_after(coef):
        torch.manual_seed(21)
        policy = TinyStatusPolicy(3, 4, hidden=6)
        cfg = PpoConfig(entropy_coef=coef, learning_rate=5e-3, minibatches=4)
        optimizer = torch.optim.Adam(policy.parameters(), lr=cfg.learning_rate,
                                     eps=cfg.adam_eps)
        ppo_update(policy, optimizer, batch, cfg, EwmaNormalizer(),
                   np.random.default_rng(3))
        with torch.no_grad():
            logits, _ = policy(
                torch.zeros(32, 1, 1, 1, dtype=torch.float64),
                torch.as_tensor(batch.status.reshape(32, -1), dtype=torch.float64),
            )
            lp = torch.log_softmax(logits, -1)
            return float(-(lp.exp() * lp).sum(-1).mean())

    assert entropy_after(0.2) >= entropy_after(0.0)
