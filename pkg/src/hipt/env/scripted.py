"""Net-free policies: fixtures for tests, tutorial partners, BC data sources."""

from __future__ import annotations

import numpy as np

from .engine import EAST, INTERACT, NORTH, NUM_ACTIONS, SOUTH, STAY, WEST
from .layout import Layout

_UNIFORM = np.full(NUM_ACTIONS, 1.0 / NUM_ACTIONS)


def _onehot(a: int) -> np.ndarray:
    v = np.zeros(NUM_ACTIONS)
    v[a] = 1.0
    return v


class StayPolicy:
    def begin_episode(self, seat: int, rng: np.random.Generator) -> None:
        pass

    def action_probs(self, obs: np.ndarray) -> np.ndarray:
        return _onehot(STAY)


class UniformRandomPolicy:
    def begin_episode(self, seat: int, rng: np.random.Generator) -> None:
        pass

    def action_probs(self, obs: np.ndarray) -> np.ndarray:
        return _UNIFORM


class SequencePolicy:
    """Plays a fixed action list, then Stay forever."""

    def __init__(self, actions: list[int]):
        self.actions = list(actions)
        self._t = 0

    def begin_episode(self, seat: int, rng: np.random.Generator) -> None:
        self._t = 0

    def action_probs(self, obs: np.ndarray) -> np.ndarray:
        a = self.actions[self._t] if self._t < len(self.actions) else STAY
        self._t += 1
        return _onehot(a)


class TablePolicy:
    """Deterministic reactive policy: action is a pure function of the
    observation through (held item, orientation).

    The small input domain makes it a clean behavior-cloning target.
    """

    def __init__(self, layout: Layout, table_seed: int = 7):
        self.w, self.h = layout.width, layout.height
        rng = np.random.default_rng(table_seed)
        self.table = rng.integers(0, NUM_ACTIONS, size=(4, 4))

    def begin_episode(self, seat: int, rng: np.random.Generator) -> None:
        pass

    def action_probs(self, obs: np.ndarray) -> np.ndarray:
        w, h = self.w, self.h
        orient = int(np.argmax(obs[w + h : w + h + 4]))
        held = int(np.argmax(obs[w + h + 4 : w + h + 8]))
        return _onehot(int(self.table[held, orient]))


def perfect_cycle_cramped_room() -> tuple[SequencePolicy, SequencePolicy]:
    """Hand-scripted pair that cooks and delivers one soup on cramped_room.

    Seat 1 shuttles three onions from the east dispenser into the pot, then
    parks; seat 0 fetches a dish, waits out the cook, plates and delivers.
    Verified in the simulator: first delivery lands on tick 40.
    """
    p2 = [
        EAST, INTERACT, WEST, NORTH, INTERACT,            # onion 1
        EAST, EAST, INTERACT, WEST, NORTH, INTERACT,      # onion 2
        EAST, EAST, INTERACT, WEST, NORTH, INTERACT,      # onion 3
        EAST,                                             # park clear of the pot lane
    ]
    p1 = (
        [STAY] * 18
        + [SOUTH, INTERACT]                               # grab a dish
        + [NORTH, EAST, NORTH]                            # line up on the pot
        + [STAY] * 13
        + [INTERACT]                                      # plate the soup
        + [SOUTH, EAST, SOUTH, INTERACT]                  # deliver
    )
    return SequencePolicy(p1), SequencePolicy(p2)
