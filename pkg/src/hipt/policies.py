"""Policy adapters that bridge trained networks to the episode runner."""

from __future__ import annotations

import numpy as np

from .env.episode import sample_action
from .nets import ParamStore, forward, init_recurrent_state, low_logits_all_priors, softmax


class NetPolicy:
    """Flat agent: acts through the action head with prior index 0."""

    def __init__(self, params: ParamStore):
        self.params = params
        self.spec = params.spec
        self._h: np.ndarray | None = None
        self._z = np.zeros(1, dtype=np.int64)

    def begin_episode(self, seat: int, rng: np.random.Generator) -> None:
        self._h = init_recurrent_state(self.spec, 1)

    def action_probs(self, obs: np.ndarray) -> np.ndarray:
        out, self._h, _ = forward(self.params, self.spec, obs[None], self._h, self._z)
        return softmax(out["low_logits"])[0]


class HierarchicalPolicy:
    """Bi-level agent at inference: samples a prior from the high head every
    p ~ Uniform{p_min..p_max} steps and acts with the conditioned low head.

    Draws (p, z, nothing else) from the episode RNG handed to
    begin_episode, so seeded episodes replay bit-identically.
    """

    def __init__(self, params: ParamStore, p_min: int, p_max: int):
        self.params = params
        self.spec = params.spec
        self.p_min, self.p_max = p_min, p_max
        self._h: np.ndarray | None = None
        self._rng: np.random.Generator | None = None
        self._steps_left = 0
        self._z = 0

    def begin_episode(self, seat: int, rng: np.random.Generator) -> None:
        self._h = init_recurrent_state(self.spec, 1)
        self._rng = rng
        self._steps_left = 0

    def action_probs(self, obs: np.ndarray) -> np.ndarray:
        out, self._h, cache = forward(
            self.params, self.spec, obs[None], self._h, None, need_cache=True
        )
        if self._steps_left == 0:
            self._steps_left = int(self._rng.integers(self.p_min, self.p_max + 1))
            high_probs = softmax(out["high_logits"])[0]
            self._z = sample_action_from(high_probs, self._rng)
        self._steps_left -= 1
        logits_all = low_logits_all_priors(self.params, self.spec, cache["feat"])
        return softmax(logits_all[0, self._z])


def sample_action_from(probs: np.ndarray, rng: np.random.Generator) -> int:
    return sample_action(rng, probs)
