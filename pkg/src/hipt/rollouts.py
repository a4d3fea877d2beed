"""Vectorized self-play rollout collection.

Episodes are fixed length, so a group of environments can run in lockstep
and share one batched network forward per step. Each environment keeps its
own RNG stream; collection is deterministic given the base seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env.engine import ShapingConfig, reset, step
from .env.episode import sample_action
from .env.features import encode_observation, observation_dim
from .env.layout import Layout
from .nets import ParamStore, forward, init_recurrent_state, log_softmax
from .rl.gae import compute_gae
from .rl.types import PPOConfig, TrajectoryBuffer


@dataclass
class SelfPlayBatch:
    buffers: list[TrajectoryBuffer]  # two per episode (seat 0 then seat 1)
    episode_returns: np.ndarray  # sparse returns, one per episode
    env_steps: int


def collect_selfplay(
    params: ParamStore,
    layout: Layout,
    n_episodes: int,
    horizon: int,
    cfg: PPOConfig,
    seed: int,
    shaping: ShapingConfig | None = None,
    batch_envs: int = 16,
) -> SelfPlayBatch:
    """Roll out `n_episodes` of the policy paired with itself; returns one
    low-level buffer per seat per episode with GAE already applied."""
    spec = params.spec
    dim = observation_dim(layout)
    buffers: list[TrajectoryBuffer] = []
    ep_returns = []
    seeds = np.random.SeedSequence(seed).spawn(n_episodes)
    done = 0
    while done < n_episodes:
        E = min(batch_envs, n_episodes - done)
        rngs = [np.random.default_rng(seeds[done + e]) for e in range(E)]
        states = [reset(layout) for _ in range(E)]
        h = init_recurrent_state(spec, 2 * E)
        obs_buf = np.zeros((horizon, 2 * E, dim))
        act_buf = np.zeros((horizon, 2 * E), dtype=np.int64)
        lp_buf = np.zeros((horizon, 2 * E))
        val_buf = np.zeros((horizon, 2 * E))
        rew_buf = np.zeros((horizon, 2 * E))
        sparse_tot = np.zeros(E)
        zeros_z = np.zeros(2 * E, dtype=np.int64)

        for t in range(horizon):
            O = obs_buf[t]
            for e, s in enumerate(states):
                encode_observation(s, layout, 0, out=O[e])
                encode_observation(s, layout, 1, out=O[E + e])
            out, h, _ = forward(params, spec, O, h, zeros_z)
            logp = log_softmax(out["low_logits"])
            probs = np.exp(logp)
            val_buf[t] = out["value_low"]
            for e in range(E):
                a0 = sample_action(rngs[e], probs[e])
                a1 = sample_action(rngs[e], probs[E + e])
                outcome = step(states[e], (a0, a1), layout, shaping, horizon)
                states[e] = outcome.next_state
                act_buf[t, e], act_buf[t, E + e] = a0, a1
                lp_buf[t, e], lp_buf[t, E + e] = logp[e, a0], logp[E + e, a1]
                r = float(outcome.sparse_reward)
                rew_buf[t, e] = r + outcome.shaped_rewards[0].total
                rew_buf[t, E + e] = r + outcome.shaped_rewards[1].total
                sparse_tot[e] += r

        for e in range(E):
            for seat_col in (e, E + e):
                adv, ret = compute_gae(
                    rew_buf[:, seat_col], val_buf[:, seat_col],
                    cfg.gamma_disc, cfg.gae_lambda,
                )
                buffers.append(
                    TrajectoryBuffer(
                        level="low",
                        obs=obs_buf[:, seat_col].copy(),
                        actions=act_buf[:, seat_col].copy(),
                        log_probs=lp_buf[:, seat_col].copy(),
                        rewards=rew_buf[:, seat_col].copy(),
                        values=val_buf[:, seat_col].copy(),
                        advantages=adv,
                        returns=ret,
                    )
                )
        ep_returns.extend(sparse_tot)
        done += E

    return SelfPlayBatch(
        buffers=buffers,
        episode_returns=np.array(ep_returns),
        env_steps=n_episodes * horizon,
    )


def selfplay_return(
    params: ParamStore,
    layout: Layout,
    episodes: int,
    horizon: int,
    seed: int,
    batch_envs: int = 16,
) -> float:
    """Mean sparse self-play return over `episodes`, shaping disabled."""
    cfg = PPOConfig()
    batch = collect_selfplay(
        params, layout, episodes, horizon, cfg, seed, shaping=None, batch_envs=batch_envs
    )
    return float(batch.episode_returns.mean())
