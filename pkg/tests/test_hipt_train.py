import numpy as np
import pytest

from hipt.agent import HiPTConfig, rollout_episode, train_hipt
from hipt.env import ShapingConfig
from hipt.nets import NetworkSpec, init_params
from hipt.policies import HierarchicalPolicy
from hipt.population.types import PartnerPopulation, PopulationMember
from hipt.rl import MetricsLogger, PPOConfig


@pytest.fixture(scope="module")
def flat_pop(cramped_dim_module=68):
    spec = NetworkSpec(68, (16,), "tanh", None, num_priors=1, num_actions=6)
    members = []
    for i in range(2):
        p = init_params(spec, 300 + i)
        members.append(
            PopulationMember(seed=300 + i,
                             tiers={"full": p, "mid": p.copy(), "random": p.copy()},
                             j_sp_full=0.0, j_sp_mid=0.0)
        )
    return PartnerPopulation("cramped_room", spec, members)


def tiny_hipt_config(**kw):
    base = dict(
        num_priors=3, p_min=5, p_max=9, total_env_steps=4 * 4 * 50,
        episodes_per_batch=4, horizon=50, lr_start=1e-3, lr_decay=3.0,
        shaping=ShapingConfig(), batch_envs=4,
        eval_interval_env_steps=10**9,
    )
    base.update(kw)
    return HiPTConfig(**base)


def test_train_hipt_runs_and_logs(cramped, flat_pop, tmp_path):
    cfg = tiny_hipt_config()
    metrics_path = tmp_path / "metrics.jsonl"
    with MetricsLogger(metrics_path) as metrics:
        result = train_hipt(flat_pop, cramped, cfg, PPOConfig(minibatch_transitions=100),
                            seed=1, metrics=metrics)
    assert result.env_steps == cfg.total_env_steps
    assert result.agent.num_priors == 3
    lines = metrics_path.read_text().strip().splitlines()
    import json

    records = [json.loads(l) for l in lines]
    levels = {r["level"] for r in records if r["kind"] == "hipt_update"}
    assert levels == {"low", "high"}
    for r in records:
        if r["kind"] == "hipt_update":
            assert {"clip_fraction", "approx_kl", "total_loss", "mean_return"} <= set(r)


def test_training_changes_parameters(cramped, flat_pop):
    cfg = tiny_hipt_config()
    result = train_hipt(flat_pop, cramped, cfg, PPOConfig(minibatch_transitions=100), seed=2)
    fresh = init_params(result.agent.spec, 2)
    assert not np.array_equal(result.agent.params.vector, fresh.vector)


def test_kappa_anneal_tracks_env_steps(cramped, flat_pop):
    cfg = tiny_hipt_config(kappa_start=100.0, kappa_end=0.0)
    result = train_hipt(flat_pop, cramped, cfg, PPOConfig(minibatch_transitions=100), seed=3)
    kappas = [h["kappa_inf"] for h in result.history]
    assert kappas[0] == 100.0
    assert all(a >= b for a, b in zip(kappas, kappas[1:]))


def test_single_prior_zero_kappa_degenerates_to_flat_best_response(cramped, flat_pop):
    """|Z| = 1 with zero influence coefficient: exactly one decision class,
    zero influence reward everywhere, and the manager reward is the plain
    segment-mean environment reward."""
    spec = NetworkSpec(68, (12,), "tanh", None, num_priors=1, num_actions=6)
    from hipt.agent import HiPTAgent
    from hipt.env.scripted import UniformRandomPolicy

    agent = HiPTAgent(init_params(spec, 5), 5, 9)
    pair = rollout_episode(agent, UniformRandomPolicy(), cramped, horizon=60,
                           seed=4, kappa_inf=0.0)
    assert set(pair.high.actions.tolist()) == {0}
    assert np.max(np.abs(pair.influence)) == 0.0
    assert np.all(pair.low.priors == 0)
    for k, tick in enumerate(pair.high.extras["decision_ticks"]):
        p = int(pair.high.horizons[k])
        assert pair.high.rewards[k] == pytest.approx(
            pair.low.rewards[tick : tick + p].mean(), abs=1e-12
        )


def test_eval_hook_and_early_stop(cramped, flat_pop):
    calls = []

    def fake_eval(agent):
        calls.append(1)
        return 100.0

    cfg = tiny_hipt_config(total_env_steps=4 * 4 * 50 * 3,
                           eval_interval_env_steps=4 * 50 * 4,
                           target_eval_return=50.0)
    result = train_hipt(flat_pop, cramped, cfg, PPOConfig(minibatch_transitions=100),
                        seed=6, eval_fn=fake_eval)
    assert calls  # hook ran
    assert result.best_eval_return == 100.0
    assert result.env_steps < cfg.total_env_steps  # stopped early


def test_hierarchical_policy_acts_with_trained_agent(cramped, flat_pop):
    cfg = tiny_hipt_config()
    result = train_hipt(flat_pop, cramped, cfg, PPOConfig(minibatch_transitions=100), seed=7)
    from hipt.env.episode import run_episode
    from hipt.env.scripted import StayPolicy

    pol = HierarchicalPolicy(result.agent.params, result.agent.p_min, result.agent.p_max)
    res = run_episode(pol, StayPolicy(), cramped, horizon=60, seed=8)
    assert res.final_state.tick == 60


def test_checkpoint_roundtrip(tmp_path, flat_pop, cramped):
    from hipt.agent import load_agent, save_agent

    cfg = tiny_hipt_config()
    result = train_hipt(flat_pop, cramped, cfg, PPOConfig(minibatch_transitions=100), seed=9)
    save_agent(tmp_path / "ck", result.agent, env_steps=result.env_steps)
    loaded, meta = load_agent(tmp_path / "ck")
    assert meta["env_steps"] == result.env_steps
    assert loaded.p_min == result.agent.p_min
    assert np.array_equal(loaded.params.vector, result.agent.params.vector)
