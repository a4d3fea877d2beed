import numpy as np
import pytest

from hipt.nets import AdamState, DivergenceError, NetworkSpec, forward, init_params, softmax
from hipt.nets.net import log_softmax
from hipt.rl import PPOConfig, TrajectoryBuffer, Transition, compute_gae, ppo_update

BANDIT_SPEC = NetworkSpec(1, (8,), "tanh", None, num_priors=1, num_actions=2)


def test_transition_validates_log_prob():
    with pytest.raises(ValueError):
        Transition(np.zeros(2), 0, 0.5, 1.0, 0.0, False)
    with pytest.raises(ValueError):
        Transition(np.zeros(2), 0, -0.5, np.inf, 0.0, False)
    Transition(np.zeros(2), 0, -0.5, 1.0, 0.0, True)


def test_buffer_level_tag_validated():
    with pytest.raises(ValueError):
        TrajectoryBuffer("mid", np.zeros((1, 2)), np.zeros(1), np.zeros(1),
                         np.zeros(1), np.zeros(1))


def collect_bandit(params, n, rng, cfg):
    spec = params.spec
    obs = np.ones((n, 1))
    out, _, _ = forward(params, spec, obs, None, np.zeros(n, dtype=np.int64))
    logp = log_softmax(out["low_logits"])
    probs = np.exp(logp)
    acts = (rng.random(n) < probs[:, 1]).astype(np.int64)
    rewards = (acts == 1).astype(float)
    buffers = []
    for i in range(n):
        adv, ret = compute_gae(rewards[i : i + 1], out["value_low"][i : i + 1],
                               cfg.gamma_disc, cfg.gae_lambda)
        buffers.append(
            TrajectoryBuffer(
                "low", obs[i : i + 1], acts[i : i + 1],
                logp[[i], acts[i : i + 1]][0:1].reshape(1),
                rewards[i : i + 1], out["value_low"][i : i + 1],
                advantages=adv, returns=ret,
            )
        )
    return buffers


def arm1_probability(params):
    out, _, _ = forward(params, params.spec, np.ones((1, 1)), None,
                        np.zeros(1, dtype=np.int64))
    return softmax(out["low_logits"])[0, 1]


def test_bandit_learns_rewarded_arm_within_200_updates():
    params = init_params(BANDIT_SPEC, 0)
    opt = AdamState.zeros(params.size)
    cfg = PPOConfig(minibatch_transitions=128, epochs=4)
    rng = np.random.default_rng(0)
    upd_rng = np.random.default_rng(1)
    for update in range(200):
        buffers = collect_bandit(params, 128, rng, cfg)
        diag = ppo_update(params, buffers, cfg, opt, lr=3e-3, rng=upd_rng)
        assert 0.0 <= diag.clip_fraction <= 1.0
        assert diag.approx_kl >= -1e-9
        if arm1_probability(params) > 0.95:
            break
    assert arm1_probability(params) > 0.95


def test_zero_advantage_moves_only_via_entropy():
    params = init_params(BANDIT_SPEC, 1)
    cfg = PPOConfig(minibatch_transitions=64, epochs=1, normalize_advantages=False,
                    max_grad_norm=None)
    rng = np.random.default_rng(2)
    buffers = collect_bandit(params, 64, rng, cfg)
    for b in buffers:
        b.advantages = np.zeros_like(b.advantages)
        b.returns = b.values.copy()  # matched values: zero value loss too

    with_ent = params.copy()
    ppo_update(with_ent, buffers, cfg, AdamState.zeros(params.size), lr=1e-3,
               entropy_coef=0.05, rng=np.random.default_rng(3))
    without_ent = params.copy()
    ppo_update(without_ent, buffers, cfg, AdamState.zeros(params.size), lr=1e-3,
               entropy_coef=0.0, rng=np.random.default_rng(3))
    assert np.array_equal(without_ent.vector, params.vector)
    assert not np.array_equal(with_ent.vector, params.vector)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_restores_last_good_params():
    params = init_params(BANDIT_SPEC, 2)
    before = params.vector.copy()
    cfg = PPOConfig(minibatch_transitions=64, epochs=1)
    rng = np.random.default_rng(4)
    buffers = collect_bandit(params, 32, rng, cfg)
    buffers[0].advantages[:] = np.inf
    with pytest.raises(DivergenceError):
        ppo_update(params, buffers, cfg, AdamState.zeros(params.size), lr=1e-3,
                   rng=np.random.default_rng(5))
    assert np.array_equal(params.vector, before)


def test_update_requires_advantages():
    params = init_params(BANDIT_SPEC, 3)
    buf = TrajectoryBuffer("low", np.ones((1, 1)), np.zeros(1, dtype=np.int64),
                           np.array([-0.7]), np.ones(1), np.zeros(1))
    with pytest.raises(ValueError):
        ppo_update(params, [buf], PPOConfig(), AdamState.zeros(params.size), lr=1e-3)


def test_recurrent_update_path_runs():
    spec = NetworkSpec(3, (6,), "tanh", 4, num_priors=1, num_actions=3)
    params = init_params(spec, 4)
    rng = np.random.default_rng(6)
    T, n_eps = 5, 6
    buffers = []
    for _ in range(n_eps):
        obs = rng.normal(0, 1, (T, 3))
        acts = rng.integers(0, 3, T)
        logp = np.log(np.full(T, 1 / 3))
        rewards = rng.normal(0, 1, T)
        values = np.zeros(T)
        adv, ret = compute_gae(rewards, values, 0.99, 0.95)
        buffers.append(TrajectoryBuffer("low", obs, acts, logp, rewards, values,
                                        advantages=adv, returns=ret))
    before = params.vector.copy()
    diag = ppo_update(params, buffers, PPOConfig(minibatch_transitions=15, epochs=2),
                      AdamState.zeros(params.size), lr=1e-3,
                      rng=np.random.default_rng(7))
    assert not np.array_equal(params.vector, before)
    assert diag.minibatches == 0 or True  # diagnostics averaged; smoke only
    assert np.isfinite(diag.total_loss)
