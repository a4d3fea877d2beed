"""Bi-level episode rollouts.

`rollout_episode` is the reference single-episode path: one shared RNG
drives horizon draws, prior draws and both seats' action draws, so a rerun
with the same seed is bit-identical. `collect_batch` is the lockstep
vectorized path used by the trainer; it produces the same trajectory
structure (per-step low transitions, per-decision high transitions,
influence rewards computed from the rollout-time parameters).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env.engine import ShapingConfig, reset, step
from ..env.episode import Policy, sample_action
from ..env.features import encode_observation, observation_dim
from ..env.layout import Layout
from ..nets import ParamStore, forward, init_recurrent_state, low_logits_all_priors, softmax
from ..nets.net import log_softmax
from ..population.types import PartnerPopulation
from ..rl.types import TrajectoryBuffer
from .core import HiPTAgent, influence_rewards_batch


@dataclass
class TrajectoryPair:
    """Algorithm output: a per-step trajectory plus a per-decision one."""

    low: TrajectoryBuffer
    high: TrajectoryBuffer
    sparse_return: float
    influence: np.ndarray  # (T,) per-step influence rewards
    agent_seat: int = 0
    partner_entry: int = -1


def draw_uniform_partner(
    population: PartnerPopulation, rng: np.random.Generator
) -> tuple[int, str, ParamStore]:
    """Uniform draw over all members x all three skill tiers."""
    entries = population.entries()
    idx = int(rng.integers(0, len(entries)))
    member, tier, params = entries[idx]
    return idx, tier, params


def rollout_episode(
    agent: HiPTAgent,
    partner: Policy,
    layout: Layout,
    horizon: int = 400,
    seed: int | np.random.Generator = 0,
    shaping: ShapingConfig | None = None,
    alpha: float = 1.0,
    kappa_inf: float = 0.0,
    agent_seat: int = 0,
    include_shaped_in_high: bool = True,
) -> TrajectoryPair:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    spec = agent.spec
    dim = observation_dim(layout)
    state = reset(layout)
    partner.begin_episode(1 - agent_seat, rng)
    h = init_recurrent_state(spec, 1)

    obs = np.zeros((horizon, dim))
    actions = np.zeros(horizon, dtype=np.int64)
    log_probs = np.zeros(horizon)
    values_low = np.zeros(horizon)
    rewards_low = np.zeros(horizon)
    priors = np.zeros(horizon, dtype=np.int64)
    influence = np.zeros(horizon)

    dec_tick: list[int] = []
    dec_z: list[int] = []
    dec_p: list[int] = []
    dec_logp: list[float] = []
    dec_value: list[float] = []
    dec_reward: list[float] = []
    high_obs: list[np.ndarray] = []

    partner_obs = np.zeros(dim)
    sparse_total = 0.0
    steps_left = 0
    z = 0
    seg_start = 0
    seg_acc = 0.0

    for t in range(horizon):
        o = encode_observation(state, layout, agent_seat, out=obs[t])
        out, h, cache = forward(agent.params, spec, o[None], h, None, need_cache=True)
        high_logp = log_softmax(out["high_logits"])[0]
        high_probs = np.exp(high_logp)
        low_logits = low_logits_all_priors(agent.params, spec, cache["feat"])[0]
        low_probs_all = softmax(low_logits)

        if steps_left == 0:
            p = int(rng.integers(agent.p_min, agent.p_max + 1))
            z = sample_action(rng, high_probs)
            steps_left = p
            seg_start = t
            seg_acc = 0.0
            dec_tick.append(t)
            dec_z.append(z)
            dec_logp.append(float(high_logp[z]))
            dec_value.append(float(out["value_high"][0]))
            high_obs.append(o.copy())

        low_logp = log_softmax(low_logits[z][None])[0]
        a = sample_action(rng, low_probs_all[z])
        r_inf = influence_rewards_batch(
            low_probs_all[None], high_probs[None], np.array([z])
        )[0]

        # Low value estimate conditioned on the active prior.
        z_onehot = np.zeros(agent.num_priors)
        z_onehot[z] = 1.0
        low_in = np.concatenate([cache["feat"][0], z_onehot])
        v_low = float(
            low_in @ agent.params["head_vlow_W"][:, 0] + agent.params["head_vlow_b"][0]
        )

        partner_o = encode_observation(state, layout, 1 - agent_seat, out=partner_obs)
        a_partner = sample_action(rng, partner.action_probs(partner_o))
        joint = (a, a_partner) if agent_seat == 0 else (a_partner, a)
        outcome = step(state, joint, layout, shaping, horizon)
        state = outcome.next_state

        r_env = float(outcome.sparse_reward) + outcome.shaped_rewards[agent_seat].total
        actions[t] = a
        log_probs[t] = low_logp[a]
        values_low[t] = v_low
        rewards_low[t] = r_env
        priors[t] = z
        influence[t] = r_inf
        sparse_total += outcome.sparse_reward

        r_for_high = r_env if include_shaped_in_high else float(outcome.sparse_reward)
        seg_acc += alpha * r_for_high + kappa_inf * r_inf
        steps_left -= 1
        if steps_left == 0 or t == horizon - 1:
            executed = t - seg_start + 1
            dec_p.append(executed)
            dec_reward.append(seg_acc / executed)
            steps_left = 0

    low = TrajectoryBuffer(
        level="low",
        obs=obs,
        actions=actions,
        log_probs=log_probs,
        rewards=rewards_low,
        values=values_low,
        priors=priors,
    )
    high = TrajectoryBuffer(
        level="high",
        obs=np.array(high_obs),
        actions=np.array(dec_z, dtype=np.int64),
        log_probs=np.array(dec_logp),
        rewards=np.array(dec_reward),
        values=np.array(dec_value),
        horizons=np.array(dec_p, dtype=np.int64),
        extras={"decision_ticks": np.array(dec_tick, dtype=np.int64)},
    )
    return TrajectoryPair(
        low=low, high=high, sparse_return=sparse_total, influence=influence,
        agent_seat=agent_seat,
    )


@dataclass
class HiptBatch:
    pairs: list[TrajectoryPair]
    episode_returns: np.ndarray
    partner_entries: np.ndarray
    env_steps: int


def collect_batch(
    agent: HiPTAgent,
    population: PartnerPopulation,
    layout: Layout,
    n_episodes: int,
    horizon: int,
    seed: int,
    shaping: ShapingConfig | None = None,
    alpha: float = 1.0,
    kappa_inf: float = 0.0,
    include_shaped_in_high: bool = True,
    batch_envs: int = 16,
    randomize_seat: bool = True,
) -> HiptBatch:
    """Lockstep rollouts with one fresh uniformly drawn partner per episode."""
    spec = agent.spec
    dim = observation_dim(layout)
    entries = population.entries()
    seeds = np.random.SeedSequence(seed).spawn(n_episodes)
    pairs: list[TrajectoryPair] = []
    partner_ids = []
    done = 0
    while done < n_episodes:
        E = min(batch_envs, n_episodes - done)
        rngs = [np.random.default_rng(seeds[done + e]) for e in range(E)]
        seats = [int(rngs[e].integers(0, 2)) if randomize_seat else 0 for e in range(E)]
        chosen = [int(rngs[e].integers(0, len(entries))) for e in range(E)]
        partner_params = [entries[c][2] for c in chosen]
        partner_ids.extend(chosen)
        pairs.extend(
            _run_lockstep(
                agent, partner_params, layout, horizon, rngs, seats, dim,
                shaping, alpha, kappa_inf, include_shaped_in_high,
            )
        )
        for pair, c in zip(pairs[-E:], chosen):
            pair.partner_entry = c
        done += E
    returns = np.array([p.sparse_return for p in pairs])
    return HiptBatch(
        pairs=pairs,
        episode_returns=returns,
        partner_entries=np.array(partner_ids, dtype=np.int64),
        env_steps=n_episodes * horizon,
    )


def _run_lockstep(
    agent, partner_params, layout, horizon, rngs, seats, dim,
    shaping, alpha, kappa_inf, include_shaped_in_high,
):
    spec = agent.spec
    E = len(rngs)
    states = [reset(layout) for _ in range(E)]
    h_agent = init_recurrent_state(spec, E)
    partner_groups: dict[int, list[int]] = {}
    for e, pp in enumerate(partner_params):
        partner_groups.setdefault(id(pp), []).append(e)
    group_params = {id(pp): pp for pp in partner_params}
    h_partner = {
        gid: init_recurrent_state(group_params[gid].spec, len(envs))
        for gid, envs in partner_groups.items()
    }

    obs = np.zeros((horizon, E, dim))
    actions = np.zeros((horizon, E), dtype=np.int64)
    log_probs = np.zeros((horizon, E))
    values_low = np.zeros((horizon, E))
    rewards_low = np.zeros((horizon, E))
    priors = np.zeros((horizon, E), dtype=np.int64)
    influence = np.zeros((horizon, E))
    sparse_tot = np.zeros(E)

    steps_left = np.zeros(E, dtype=np.int64)
    z_cur = np.zeros(E, dtype=np.int64)
    seg_start = np.zeros(E, dtype=np.int64)
    seg_acc = np.zeros(E)
    decs = [
        {"tick": [], "z": [], "p": [], "logp": [], "value": [], "reward": []}
        for _ in range(E)
    ]

    partner_obs = np.zeros((E, dim))
    zeros_like_partner = {gid: np.zeros(len(envs), dtype=np.int64)
                          for gid, envs in partner_groups.items()}

    for t in range(horizon):
        for e, s in enumerate(states):
            encode_observation(s, layout, seats[e], out=obs[t, e])
            encode_observation(s, layout, 1 - seats[e], out=partner_obs[e])

        out, h_agent, cache = forward(agent.params, spec, obs[t], h_agent, None, need_cache=True)
        high_logp = log_softmax(out["high_logits"])
        high_probs = np.exp(high_logp)
        low_logits = low_logits_all_priors(agent.params, spec, cache["feat"])
        low_logp_all = log_softmax(low_logits)
        low_probs_all = np.exp(low_logp_all)
        value_high = out["value_high"]

        for e in range(E):
            if steps_left[e] == 0:
                p = int(rngs[e].integers(agent.p_min, agent.p_max + 1))
                z = sample_action(rngs[e], high_probs[e])
                steps_left[e] = p
                z_cur[e] = z
                seg_start[e] = t
                seg_acc[e] = 0.0
                d = decs[e]
                d["tick"].append(t)
                d["z"].append(z)
                d["logp"].append(float(high_logp[e, z]))
                d["value"].append(float(value_high[e]))
        priors[t] = z_cur

        r_inf = influence_rewards_batch(low_probs_all, high_probs, z_cur)
        influence[t] = r_inf

        feat = cache["feat"]
        z_onehot = np.zeros((E, spec.num_priors))
        z_onehot[np.arange(E), z_cur] = 1.0
        low_in = np.concatenate([feat, z_onehot], axis=1)
        values_low[t] = low_in @ agent.params["head_vlow_W"][:, 0] + agent.params["head_vlow_b"][0]

        partner_probs = np.zeros((E, spec.num_actions))
        for gid, envs in partner_groups.items():
            pp = group_params[gid]
            pout, h_new, _ = forward(
                pp, pp.spec, partner_obs[envs], h_partner[gid], zeros_like_partner[gid]
            )
            h_partner[gid] = h_new
            partner_probs[envs] = softmax(pout["low_logits"])

        for e in range(E):
            z = z_cur[e]
            a = sample_action(rngs[e], low_probs_all[e, z])
            a_partner = sample_action(rngs[e], partner_probs[e])
            joint = (a, a_partner) if seats[e] == 0 else (a_partner, a)
            outcome = step(states[e], joint, layout, shaping, horizon)
            states[e] = outcome.next_state
            r_env = float(outcome.sparse_reward) + outcome.shaped_rewards[seats[e]].total
            actions[t, e] = a
            log_probs[t, e] = low_logp_all[e, z, a]
            rewards_low[t, e] = r_env
            sparse_tot[e] += outcome.sparse_reward
            r_for_high = r_env if include_shaped_in_high else float(outcome.sparse_reward)
            seg_acc[e] += alpha * r_for_high + kappa_inf * r_inf[e]
            steps_left[e] -= 1
            if steps_left[e] == 0 or t == horizon - 1:
                executed = t - seg_start[e] + 1
                d = decs[e]
                d["p"].append(int(executed))
                d["reward"].append(seg_acc[e] / executed)
                steps_left[e] = 0

    pairs = []
    for e in range(E):
        d = decs[e]
        ticks = np.array(d["tick"], dtype=np.int64)
        low = TrajectoryBuffer(
            level="low",
            obs=obs[:, e].copy(),
            actions=actions[:, e].copy(),
            log_probs=log_probs[:, e].copy(),
            rewards=rewards_low[:, e].copy(),
            values=values_low[:, e].copy(),
            priors=priors[:, e].copy(),
        )
        high = TrajectoryBuffer(
            level="high",
            obs=obs[ticks, e].copy(),
            actions=np.array(d["z"], dtype=np.int64),
            log_probs=np.array(d["logp"]),
            rewards=np.array(d["reward"]),
            values=np.array(d["value"]),
            horizons=np.array(d["p"], dtype=np.int64),
            extras={"decision_ticks": ticks},
        )
        pairs.append(
            TrajectoryPair(
                low=low, high=high, sparse_return=float(sparse_tot[e]),
                influence=influence[:, e].copy(), agent_seat=seats[e],
            )
        )
    return pairs
