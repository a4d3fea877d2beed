"""Deterministic two-player kitchen dynamics.

The engine is purely functional: `step` maps (state, joint action) to a new
state plus rewards and events, sharing no mutable globals, so episodes can
run in parallel with independent RNG streams.

Reward rules: delivering a soup grants both players a shared +20. With
shaping enabled, a +3 per-player component is paid for onions taken from a
dispenser and onions dropped into a pot, and the non-delivering player is
charged -20 whenever their partner delivers. Shaped components feed training
only and never touch the score.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import NamedTuple

from .layout import (
    COUNTER,
    DISH_DISPENSER,
    ONION_DISPENSER,
    ORIENT_DELTAS,
    ORIENT_NAMES,
    POT,
    SERVING,
    Layout,
)

# Action indices. The first four double as orientation indices.
NORTH, SOUTH, EAST, WEST, STAY, INTERACT = range(6)
ACTION_NAMES = ("North", "South", "East", "West", "Stay", "Interact")
ACTION_INDEX = {name: i for i, name in enumerate(ACTION_NAMES)}
NUM_ACTIONS = 6

# Held-item codes.
HELD_NONE, HELD_ONION, HELD_DISH, HELD_SOUP = range(4)
ITEM_NAMES = (None, "onion", "dish", "soup")
ITEM_INDEX = {"onion": HELD_ONION, "dish": HELD_DISH, "soup": HELD_SOUP}

MAX_POT_ONIONS = 3
DELIVERY_REWARD = 20


class PlayerState(NamedTuple):
    x: int
    y: int
    orient: int
    held: int


class WorldState(NamedTuple):
    tick: int
    players: tuple[PlayerState, PlayerState]
    pots: tuple[tuple[int, int], ...]  # (onion_count, cook_timer) per layout.pot_cells entry
    counters: tuple[tuple[tuple[int, int], int], ...]  # sorted ((x, y), item) pairs
    score: int


class Event(NamedTuple):
    type: str
    player: int
    pos: tuple[int, int]


@dataclass(frozen=True)
class ShapedReward:
    pickup_drop: float = 0.0
    delivery_penalty: float = 0.0

    @property
    def total(self) -> float:
        return self.pickup_drop + self.delivery_penalty


ZERO_SHAPED = ShapedReward()


@dataclass(frozen=True)
class ShapingConfig:
    """Training-time shaped-reward switches; `scale` carries the anneal factor."""

    enabled: bool = True
    pickup_drop_reward: float = 3.0
    delivery_penalty: float = -20.0
    scale: float = 1.0

    @staticmethod
    def disabled() -> "ShapingConfig":
        return ShapingConfig(enabled=False)

    def with_scale(self, scale: float) -> "ShapingConfig":
        return ShapingConfig(self.enabled, self.pickup_drop_reward, self.delivery_penalty, scale)


class StepOutcome(NamedTuple):
    next_state: WorldState
    sparse_reward: int
    shaped_rewards: tuple[ShapedReward, ShapedReward]
    events: tuple[Event, ...]


class TerminalStepError(RuntimeError):
    """Raised when stepping a state at or past the episode horizon."""


def reset(layout: Layout) -> WorldState:
    players = tuple(
        PlayerState(x, y, orient, HELD_NONE) for (x, y), orient in layout.start_positions
    )
    pots = tuple((0, 0) for _ in layout.pot_cells)
    return WorldState(0, players, pots, (), 0)


def step(
    state: WorldState,
    joint: tuple[int, int],
    layout: Layout,
    shaping: ShapingConfig | None = None,
    horizon: int | None = None,
) -> StepOutcome:
    """Advance one tick. Deterministic in (state, joint action)."""
    if horizon is not None and state.tick >= horizon:
        raise TerminalStepError(f"step at tick {state.tick} >= horizon {horizon}")

    p0, p1 = state.players
    floor = layout.floor_cells

    # Movement proposals: a blocked move still rotates toward the target.
    pos = [(p0.x, p0.y), (p1.x, p1.y)]
    orient = [p0.orient, p1.orient]
    proposed = [pos[0], pos[1]]
    for i, (p, a) in enumerate(((p0, joint[0]), (p1, joint[1]))):
        if a < STAY:
            dx, dy = ORIENT_DELTAS[a]
            orient[i] = a
            target = (p.x + dx, p.y + dy)
            if target in floor:
                proposed[i] = target

    # Same-target and swap conflicts cancel both moves; rotations stand.
    if proposed[0] == proposed[1] or (proposed[0] == pos[1] and proposed[1] == pos[0]):
        proposed = pos

    held = [p0.held, p1.held]
    pots = list(state.pots)
    counters: dict[tuple[int, int], int] | None = None
    events: list[Event] = []
    sparse = 0
    pickup_drop = [0.0, 0.0]
    penalty = [0.0, 0.0]
    shaping_on = shaping is not None and shaping.enabled

    for i in range(2):
        if joint[i] != INTERACT:
            continue
        px, py = proposed[i]
        dx, dy = ORIENT_DELTAS[orient[i]]
        tx, ty = px + dx, py + dy
        if not (0 <= tx < layout.width and 0 <= ty < layout.height):
            continue
        kind = layout.terrain[ty][tx]
        h = held[i]
        if kind == ONION_DISPENSER:
            if h == HELD_NONE:
                held[i] = HELD_ONION
                events.append(Event("onion_pickup", i, (tx, ty)))
                if shaping_on:
                    pickup_drop[i] += shaping.pickup_drop_reward
        elif kind == DISH_DISPENSER:
            if h == HELD_NONE:
                held[i] = HELD_DISH
                events.append(Event("dish_pickup", i, (tx, ty)))
        elif kind == COUNTER:
            if counters is None:
                counters = dict(state.counters)
            item = counters.get((tx, ty), HELD_NONE)
            if h == HELD_NONE and item != HELD_NONE:
                held[i] = item
                del counters[(tx, ty)]
                events.append(Event(f"{ITEM_NAMES[item]}_pickup", i, (tx, ty)))
            elif h in (HELD_ONION, HELD_DISH) and item == HELD_NONE:
                # Soup may rest only in a hand or a ready pot, never on a counter.
                counters[(tx, ty)] = h
                events.append(Event(f"{ITEM_NAMES[h]}_drop", i, (tx, ty)))
                held[i] = HELD_NONE
        elif kind == POT:
            pi = layout.pot_index((tx, ty))
            onions, timer = pots[pi]
            if h == HELD_ONION and onions < MAX_POT_ONIONS:
                onions += 1
                held[i] = HELD_NONE
                if onions == MAX_POT_ONIONS:
                    timer = layout.cook_time
                pots[pi] = (onions, timer)
                events.append(Event("onion_potting", i, (tx, ty)))
                if shaping_on:
                    pickup_drop[i] += shaping.pickup_drop_reward
            elif h == HELD_DISH and onions == MAX_POT_ONIONS and timer == 0:
                held[i] = HELD_SOUP
                pots[pi] = (0, 0)
                events.append(Event("soup_pickup", i, (tx, ty)))
        elif kind == SERVING:
            if h == HELD_SOUP:
                held[i] = HELD_NONE
                sparse += DELIVERY_REWARD
                events.append(Event("soup_delivered", i, (tx, ty)))
                if shaping_on:
                    penalty[1 - i] += shaping.delivery_penalty

    for pi, (onions, timer) in enumerate(pots):
        if onions == MAX_POT_ONIONS and timer > 0:
            pots[pi] = (onions, timer - 1)

    new_players = (
        PlayerState(proposed[0][0], proposed[0][1], orient[0], held[0]),
        PlayerState(proposed[1][0], proposed[1][1], orient[1], held[1]),
    )
    new_counters = (
        state.counters if counters is None else tuple(sorted(counters.items()))
    )
    next_state = WorldState(
        state.tick + 1, new_players, tuple(pots), new_counters, state.score + sparse
    )

    if shaping_on:
        s = shaping.scale
        shaped = (
            ShapedReward(pickup_drop[0] * s, penalty[0] * s),
            ShapedReward(pickup_drop[1] * s, penalty[1] * s),
        )
    else:
        shaped = (ZERO_SHAPED, ZERO_SHAPED)
    return StepOutcome(next_state, sparse, shaped, tuple(events))


def state_to_dict(state: WorldState) -> dict:
    return {
        "tick": state.tick,
        "players": [
            {"pos": [p.x, p.y], "orient": ORIENT_NAMES[p.orient], "held": ITEM_NAMES[p.held]}
            for p in state.players
        ],
        "pots": [[onions, timer] for onions, timer in state.pots],
        "counters": [[[x, y], ITEM_NAMES[item]] for (x, y), item in state.counters],
        "score": state.score,
    }


def state_from_dict(d: dict) -> WorldState:
    players = tuple(
        PlayerState(
            p["pos"][0],
            p["pos"][1],
            ORIENT_NAMES.index(p["orient"]),
            HELD_NONE if p["held"] is None else ITEM_INDEX[p["held"]],
        )
        for p in d["players"]
    )
    return WorldState(
        d["tick"],
        players,
        tuple((o, t) for o, t in d["pots"]),
        tuple(((x, y), ITEM_INDEX[item]) for (x, y), item in d["counters"]),
        d["score"],
    )


def state_digest(state: WorldState) -> str:
    blob = json.dumps(state_to_dict(state), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
