import numpy as np
import pytest

from hipt.agent import (
    HiPTAgent,
    InfluenceSchedule,
    anneal,
    high_level_reward,
    influence_from_dists,
    influence_reward,
    influence_rewards_batch,
    marginal_from_dists,
    marginal_low_policy,
)
from hipt.nets import init_params
from hipt.nets.net import softmax


def random_dists(rng, Z, A, B=None):
    shape = (Z, A) if B is None else (B, Z, A)
    return softmax(rng.normal(0, 2, shape))


def test_agent_validates_horizon_bounds(tiny_hier_spec):
    params = init_params(tiny_hier_spec, 0)
    HiPTAgent(params, 1, 1)
    with pytest.raises(ValueError):
        HiPTAgent(params, 0, 5)
    with pytest.raises(ValueError):
        HiPTAgent(params, 7, 5)


def test_marginal_single_prior_is_identity():
    rng = np.random.default_rng(0)
    low = random_dists(rng, 1, 6)
    assert np.allclose(marginal_from_dists(low, np.array([1.0])), low[0], atol=1e-15)


def test_marginal_point_mass_selects_conditioned_policy():
    rng = np.random.default_rng(1)
    low = random_dists(rng, 4, 6)
    high = np.zeros(4)
    high[2] = 1.0
    assert np.allclose(marginal_from_dists(low, high), low[2], atol=1e-15)


def test_marginal_matches_direct_summation_oracle():
    rng = np.random.default_rng(2)
    for _ in range(50):
        low = random_dists(rng, 3, 6)
        high = softmax(rng.normal(0, 1, 3))
        direct = sum(high[z] * low[z] for z in range(3))
        got = marginal_from_dists(low, high)
        assert np.allclose(got, direct, atol=1e-12)
        assert got.sum() == pytest.approx(1.0, abs=1e-12)


def test_marginal_is_convex_combination():
    rng = np.random.default_rng(3)
    for _ in range(50):
        low = random_dists(rng, 5, 6)
        high = softmax(rng.normal(0, 2, 5))
        marg = marginal_from_dists(low, high)
        assert np.all(marg >= low.min(axis=0) - 1e-12)
        assert np.all(marg <= low.max(axis=0) + 1e-12)


def test_influence_zero_when_prior_ignored():
    rng = np.random.default_rng(4)
    row = random_dists(rng, 1, 6)[0]
    low = np.tile(row, (4, 1))
    high = softmax(rng.normal(0, 1, 4))
    for z in range(4):
        assert abs(influence_from_dists(low, high, z)) <= 1e-12


def test_influence_zero_for_point_mass_high():
    rng = np.random.default_rng(5)
    low = random_dists(rng, 4, 6)
    high = np.zeros(4)
    high[1] = 1.0
    assert abs(influence_from_dists(low, high, 1)) <= 1e-12


def test_influence_disjoint_half_half_is_ln2():
    low = np.zeros((2, 6))
    low[0, 0] = 1.0
    low[1, 1] = 1.0
    high = np.array([0.5, 0.5])
    assert influence_from_dists(low, high, 0) == pytest.approx(np.log(2), abs=1e-12)
    assert influence_from_dists(low, high, 1) == pytest.approx(np.log(2), abs=1e-12)


def test_influence_nonnegative_on_random_draws():
    rng = np.random.default_rng(6)
    for _ in range(500):
        Z = int(rng.integers(1, 6))
        low = random_dists(rng, Z, 6)
        high = softmax(rng.normal(0, 3, Z))
        z = int(rng.integers(0, Z))
        assert influence_from_dists(low, high, z) >= -1e-9


def test_influence_batch_matches_scalar_version():
    rng = np.random.default_rng(7)
    B, Z, A = 16, 4, 6
    low = random_dists(rng, Z, A, B=B)
    high = softmax(rng.normal(0, 1, (B, Z)))
    zs = rng.integers(0, Z, B)
    batch = influence_rewards_batch(low, high, zs)
    for i in range(B):
        assert batch[i] == pytest.approx(
            influence_from_dists(low[i], high[i], int(zs[i])), abs=1e-12
        )


def test_network_backed_ops_consistent(tiny_hier_spec):
    params = init_params(tiny_hier_spec, 1)
    params.vector[:] = np.random.default_rng(8).normal(0, 0.5, params.size)
    agent = HiPTAgent(params, 2, 5)
    obs = np.random.default_rng(9).normal(0, 1, tiny_hier_spec.input_dim)
    marg = marginal_low_policy(agent, obs)
    assert marg.sum() == pytest.approx(1.0, abs=1e-12)
    for z in range(agent.num_priors):
        assert influence_reward(agent, obs, z) >= -1e-9
    with pytest.raises(ValueError):
        influence_reward(agent, obs, agent.num_priors)


def test_high_level_reward_direct_arithmetic():
    r = high_level_reward(np.array([20.0, 0.0]), np.array([0.5, 0.5]), 1.0, 1.0, 2)
    assert r == pytest.approx(10.5, abs=1e-12)
    assert high_level_reward(np.zeros(3), np.zeros(3), 1.0, 5.0, 3) == 0.0
    env = np.array([1.0, 2.0, 3.0])
    assert high_level_reward(env, np.ones(3), 1.0, 0.0, 3) == pytest.approx(2.0, abs=1e-12)


def test_high_level_reward_validates_lengths():
    with pytest.raises(ValueError):
        high_level_reward(np.zeros(2), np.zeros(3), 1.0, 1.0, 2)
    with pytest.raises(ValueError):
        high_level_reward(np.zeros(0), np.zeros(0), 1.0, 1.0, 0)


def test_high_level_reward_oracle_random_segments():
    rng = np.random.default_rng(10)
    for _ in range(200):
        p = int(rng.integers(1, 41))
        env = rng.normal(0, 10, p)
        inf = np.abs(rng.normal(0, 1, p))
        alpha = float(rng.uniform(0, 2))
        kappa = float(rng.uniform(0, 1000))
        oracle = sum(alpha * env[i] + kappa * inf[i] for i in range(p)) / p
        assert high_level_reward(env, inf, alpha, kappa, p) == pytest.approx(
            oracle, abs=1e-12 * max(1.0, abs(oracle))
        )


def test_anneal_endpoints_and_midpoint():
    sched = InfluenceSchedule(1000.0, 1.0, 1.0, horizon_env_steps=10_000)
    assert anneal(sched, 0) == 1000.0
    assert anneal(sched, 10_000) == 1.0
    assert anneal(sched, 20_000) == 1.0
    assert anneal(sched, 5_000) == pytest.approx(500.5, abs=1e-12)
    with pytest.raises(ValueError):
        InfluenceSchedule(-1.0, 1.0, 1.0, 10)
