"""Lossless flat observation encoding.

The grids are small enough that a flat vector of one-hot blocks carries the
whole world state; the policy network consumes this directly instead of an
image. Layout statics are not encoded (the network is trained per layout).

Block order, egocentric for `agent_index` (own player block first):

    [self: x 1-hot | y 1-hot | orient 1-hot(4) | held 1-hot(4)]
    [other: same]
    per pot: [onion_count 1-hot(4) | cook_timer / cook_time]
    per counter cell: [empty, onion, dish 1-hot(3)]
    [tick / 400, score / 20]

Vector length depends only on layout dimensions. Every field decodes back
exactly (`decode_observation` inverts `encode_observation`).
"""

from __future__ import annotations

import numpy as np

from .engine import HELD_DISH, HELD_NONE, HELD_ONION, PlayerState, WorldState
from .layout import Layout

TICK_SCALE = 400.0
SCORE_SCALE = 20.0


def observation_dim(layout: Layout) -> int:
    player_block = layout.width + layout.height + 8
    return (
        2 * player_block
        + 5 * len(layout.pot_cells)
        + 3 * len(layout.counter_cells)
        + 2
    )


def encode_observation(
    state: WorldState, layout: Layout, agent_index: int, out: np.ndarray | None = None
) -> np.ndarray:
    w, h = layout.width, layout.height
    block = w + h + 8
    if out is None:
        v = np.zeros(observation_dim(layout), dtype=np.float64)
    else:
        v = out
        v[:] = 0.0

    me = state.players[agent_index]
    other = state.players[1 - agent_index]
    for slot, p in enumerate((me, other)):
        base = slot * block
        v[base + p.x] = 1.0
        v[base + w + p.y] = 1.0
        v[base + w + h + p.orient] = 1.0
        v[base + w + h + 4 + p.held] = 1.0

    off = 2 * block
    for onions, timer in state.pots:
        v[off + onions] = 1.0
        v[off + 4] = timer / layout.cook_time
        off += 5
    if state.counters:
        items = dict(state.counters)
        for cell in layout.counter_cells:
            item = items.get(cell, HELD_NONE)
            v[off + item] = 1.0
            off += 3
    else:
        for _ in layout.counter_cells:
            v[off] = 1.0
            off += 3
    v[off] = state.tick / TICK_SCALE
    v[off + 1] = state.score / SCORE_SCALE
    return v


def decode_observation(v: np.ndarray, layout: Layout, agent_index: int) -> WorldState:
    w, h = layout.width, layout.height
    block = w + h + 8

    def decode_player(base: int) -> PlayerState:
        x = int(np.argmax(v[base : base + w]))
        y = int(np.argmax(v[base + w : base + w + h]))
        orient = int(np.argmax(v[base + w + h : base + w + h + 4]))
        held = int(np.argmax(v[base + w + h + 4 : base + w + h + 8]))
        return PlayerState(x, y, orient, held)

    me = decode_player(0)
    other = decode_player(block)
    players = (me, other) if agent_index == 0 else (other, me)

    off = 2 * block
    pots = []
    for _ in layout.pot_cells:
        onions = int(np.argmax(v[off : off + 4]))
        timer = int(round(v[off + 4] * layout.cook_time))
        pots.append((onions, timer))
        off += 5
    counters = []
    for cell in layout.counter_cells:
        item = int(np.argmax(v[off : off + 3]))
        if item in (HELD_ONION, HELD_DISH):
            counters.append((cell, item))
        off += 3
    tick = int(round(v[off] * TICK_SCALE))
    score = int(round(v[off + 1] * SCORE_SCALE))
    return WorldState(tick, players, tuple(pots), tuple(sorted(counters)), score)
