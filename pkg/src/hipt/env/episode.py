"""Episode runner for two fixed-seat policies.

Policies expose `begin_episode(seat, rng)` and `action_probs(obs)`; the
runner owns the RNG stream and samples both seats' actions from it in seat
order, so a rerun with the same seed and policies is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .engine import ShapingConfig, StepOutcome, WorldState, reset, step
from .features import encode_observation, observation_dim
from .layout import Layout

DEFAULT_HORIZON = 400


class Policy(Protocol):
    def begin_episode(self, seat: int, rng: np.random.Generator) -> None: ...

    def action_probs(self, obs: np.ndarray) -> np.ndarray: ...


def sample_action(rng: np.random.Generator, probs: np.ndarray) -> int:
    r = rng.random()
    acc = 0.0
    n = len(probs)
    for a in range(n - 1):
        acc += probs[a]
        if r < acc:
            return a
    return n - 1


@dataclass
class EpisodeResult:
    actions: np.ndarray  # (T, 2) int
    sparse: np.ndarray  # (T,) float
    shaped: np.ndarray  # (T, 2) float shaped totals per seat
    sparse_return: float
    final_state: WorldState
    observations: tuple[list[np.ndarray], list[np.ndarray]] | None = None
    outcomes: list[StepOutcome] | None = None
    initial_state: WorldState | None = None
    events: list = field(default_factory=list)


def run_episode(
    policy_a: Policy,
    policy_b: Policy,
    layout: Layout,
    horizon: int = DEFAULT_HORIZON,
    shaping: ShapingConfig | None = None,
    seed: int = 0,
    collect_obs: bool = False,
    collect_outcomes: bool = False,
) -> EpisodeResult:
    rng = np.random.default_rng(seed)
    state = reset(layout)
    policy_a.begin_episode(0, rng)
    policy_b.begin_episode(1, rng)

    actions = np.zeros((horizon, 2), dtype=np.int64)
    sparse = np.zeros(horizon)
    shaped = np.zeros((horizon, 2))
    obs_a: list[np.ndarray] = []
    obs_b: list[np.ndarray] = []
    outcomes: list[StepOutcome] = [] if collect_outcomes else None
    initial = state
    events = []

    dim = observation_dim(layout)
    buf0 = np.zeros(dim)
    buf1 = np.zeros(dim)
    for t in range(horizon):
        o0 = encode_observation(state, layout, 0, out=buf0)
        o1 = encode_observation(state, layout, 1, out=buf1)
        if collect_obs:
            obs_a.append(o0.copy())
            obs_b.append(o1.copy())
        a0 = sample_action(rng, policy_a.action_probs(o0))
        a1 = sample_action(rng, policy_b.action_probs(o1))
        outcome = step(state, (a0, a1), layout, shaping, horizon)
        actions[t, 0], actions[t, 1] = a0, a1
        sparse[t] = outcome.sparse_reward
        shaped[t, 0] = outcome.shaped_rewards[0].total
        shaped[t, 1] = outcome.shaped_rewards[1].total
        if outcome.events:
            events.extend(outcome.events)
        if collect_outcomes:
            outcomes.append(outcome)
        state = outcome.next_state

    return EpisodeResult(
        actions=actions,
        sparse=sparse,
        shaped=shaped,
        sparse_return=float(sparse.sum()),
        final_state=state,
        observations=(obs_a, obs_b) if collect_obs else None,
        outcomes=outcomes,
        initial_state=initial,
        events=events,
    )
