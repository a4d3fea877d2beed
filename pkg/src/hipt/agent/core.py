"""Bi-level agent: prior-conditioned action head under a manager head.

The manager picks a sub-policy prior z every p ~ Uniform{p_min..p_max}
steps. During training it is paid, besides the environment return, an
influence reward: the KL divergence between the z-conditioned action
distribution and the prior-marginalized one,

    r_inf = KL( pi_low(.|z, s) || sum_z' pi_low(.|z', s) pi_high(z'|s) )

which is zero exactly when the prior has no effect on behavior. Per-segment
manager rewards average alpha * r + kappa_inf * r_inf over the p executed
steps, so segments of different lengths stay on one scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nets import (
    NetworkSpec,
    ParamStore,
    forward,
    init_recurrent_state,
    low_logits_all_priors,
    softmax,
)

_TINY = 1e-300


@dataclass
class HiPTAgent:
    params: ParamStore
    p_min: int = 20
    p_max: int = 40

    def __post_init__(self):
        if not (1 <= self.p_min <= self.p_max):
            raise ValueError("need 1 <= p_min <= p_max")

    @property
    def spec(self) -> NetworkSpec:
        return self.params.spec

    @property
    def num_priors(self) -> int:
        return self.spec.num_priors


@dataclass(frozen=True)
class InfluenceSchedule:
    """Influence coefficient kappa_inf annealed linearly over env steps;
    alpha scales the environment reward inside the manager's reward."""

    kappa_start: float = 1000.0
    kappa_end: float = 1.0
    alpha: float = 1.0
    horizon_env_steps: int = 1

    def __post_init__(self):
        if self.kappa_start < 0.0 or self.kappa_end < 0.0:
            raise ValueError("kappa coefficients must be >= 0")

    def kappa(self, env_steps_done: int) -> float:
        if self.horizon_env_steps <= 0:
            return self.kappa_end
        frac = min(max(env_steps_done / self.horizon_env_steps, 0.0), 1.0)
        return self.kappa_start + (self.kappa_end - self.kappa_start) * frac


def anneal(schedule: InfluenceSchedule, env_steps_done: int) -> float:
    return schedule.kappa(env_steps_done)


# Distribution-level definitions, reused verbatim by the network-backed paths.


def marginal_from_dists(low_all: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Exact prior mixture: low_all (..., Z, A) weighted by high (..., Z)."""
    return np.einsum("...za,...z->...a", low_all, high)


def influence_from_dists(low_all: np.ndarray, high: np.ndarray, active_z: int) -> float:
    """KL(conditioned || marginal) in nats for one state."""
    p = low_all[active_z]
    q = marginal_from_dists(low_all, high)
    mask = p > 0.0
    return float(
        np.sum(p[mask] * (np.log(p[mask]) - np.log(np.maximum(q[mask], _TINY))))
    )


def high_level_reward(
    env_rewards: np.ndarray,
    influence_rewards: np.ndarray,
    alpha: float,
    kappa_inf: float,
    p: int,
) -> float:
    """Segment-mean manager reward over exactly the p executed steps."""
    if p < 1:
        raise ValueError("p must be >= 1")
    env_rewards = np.asarray(env_rewards, dtype=np.float64)
    influence_rewards = np.asarray(influence_rewards, dtype=np.float64)
    if len(env_rewards) != p or len(influence_rewards) != p:
        raise ValueError("reward vectors must have length p")
    return float(np.mean(alpha * env_rewards + kappa_inf * influence_rewards))


# Network-backed single-state operations.


def _agent_dists(
    agent: HiPTAgent, observation: np.ndarray, recurrent_state: np.ndarray | None
):
    obs = observation[None] if observation.ndim == 1 else observation
    out, h_new, cache = forward(
        agent.params, agent.spec, obs, recurrent_state, None, need_cache=True
    )
    high = softmax(out["high_logits"])
    low_all = softmax(low_logits_all_priors(agent.params, agent.spec, cache["feat"]))
    return high, low_all, h_new


def marginal_low_policy(
    agent: HiPTAgent,
    observation: np.ndarray,
    recurrent_state: np.ndarray | None = None,
) -> np.ndarray:
    """Prior-marginalized action distribution at one state; sums to 1."""
    high, low_all, _ = _agent_dists(agent, observation, recurrent_state)
    return marginal_from_dists(low_all, high)[0]


def influence_reward(
    agent: HiPTAgent,
    observation: np.ndarray,
    active_z: int,
    recurrent_state: np.ndarray | None = None,
) -> float:
    """Influence reward at one state for the active prior; nonnegative."""
    if not (0 <= active_z < agent.num_priors):
        raise ValueError(f"active_z {active_z} outside [0, {agent.num_priors})")
    high, low_all, _ = _agent_dists(agent, observation, recurrent_state)
    return influence_from_dists(low_all[0], high[0], active_z)


def influence_rewards_batch(
    low_all: np.ndarray, high: np.ndarray, active_z: np.ndarray
) -> np.ndarray:
    """Vectorized influence rewards: low_all (B, Z, A), high (B, Z),
    active_z (B,) -> (B,)."""
    B = low_all.shape[0]
    q = np.maximum(marginal_from_dists(low_all, high), _TINY)
    p = low_all[np.arange(B), active_z]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * (np.log(np.maximum(p, _TINY)) - np.log(q)), 0.0)
    return terms.sum(axis=1)


def fresh_recurrent_state(agent: HiPTAgent, batch: int = 1) -> np.ndarray | None:
    return init_recurrent_state(agent.spec, batch)
