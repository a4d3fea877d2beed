"""JSONL trajectory logs and digest-checked replay.

Each episode is one header object followed by one object per step:

    {"episode_id": ..., "layout": ..., "horizon": ..., "initial_digest": ...}
    {"tick": 0, "joint_action": ["North", "Stay"], "sparse_reward": 0,
     "shaped": [0.0, 0.0], "events": [...], "state_digest": "..."}

`state_digest` hashes the post-step state; replay re-simulates the action
stream through the engine and verifies every digest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .engine import (
    ACTION_INDEX,
    ACTION_NAMES,
    ShapingConfig,
    state_digest,
    reset,
    step,
)
from .episode import EpisodeResult
from .layout import Layout


class ReplayMismatchError(RuntimeError):
    def __init__(self, episode_id: str, tick: int, expected: str, got: str):
        super().__init__(
            f"episode {episode_id!r} digest mismatch at tick {tick}: {expected} != {got}"
        )
        self.tick = tick


@dataclass
class LoggedEpisode:
    episode_id: str
    layout_name: str
    horizon: int
    initial_digest: str | None
    steps: list[dict]

    def joint_actions(self) -> list[tuple[int, int]]:
        return [
            (ACTION_INDEX[s["joint_action"][0]], ACTION_INDEX[s["joint_action"][1]])
            for s in self.steps
        ]


def write_episode(
    fh: TextIO,
    episode_id: str,
    layout: Layout,
    result: EpisodeResult,
    shaping: ShapingConfig | None = None,
) -> None:
    """Append one episode (header + steps) to an open JSONL stream.

    Requires the episode to have been run with collect_outcomes=True.
    """
    if result.outcomes is None:
        raise ValueError("episode was not run with collect_outcomes=True")
    header = {
        "episode_id": episode_id,
        "layout": layout.name,
        "horizon": len(result.outcomes),
        "initial_digest": state_digest(result.initial_state),
        "shaping_enabled": bool(shaping is not None and shaping.enabled),
    }
    fh.write(json.dumps(header, sort_keys=True) + "\n")
    for t, outcome in enumerate(result.outcomes):
        rec = {
            "tick": t,
            "joint_action": [
                ACTION_NAMES[result.actions[t, 0]],
                ACTION_NAMES[result.actions[t, 1]],
            ],
            "sparse_reward": int(outcome.sparse_reward),
            "shaped": [outcome.shaped_rewards[0].total, outcome.shaped_rewards[1].total],
            "events": [
                {"type": e.type, "player": e.player, "pos": list(e.pos)}
                for e in outcome.events
            ],
            "state_digest": state_digest(outcome.next_state),
        }
        fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_episodes(path: str | Path) -> list[LoggedEpisode]:
    episodes: list[LoggedEpisode] = []
    current: LoggedEpisode | None = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "tick" in obj:
                if current is None:
                    raise ValueError(f"{path}: step record before any episode header")
                current.steps.append(obj)
            else:
                current = LoggedEpisode(
                    episode_id=str(obj["episode_id"]),
                    layout_name=obj["layout"],
                    horizon=int(obj["horizon"]),
                    initial_digest=obj.get("initial_digest"),
                    steps=[],
                )
                episodes.append(current)
    return episodes


def replay_episode(
    episode: LoggedEpisode,
    layout: Layout,
    shaping: ShapingConfig | None = None,
) -> float:
    """Re-simulate a logged episode, verifying every state digest.

    Returns the replayed sparse return. Raises ReplayMismatchError on the
    first divergence.
    """
    state = reset(layout)
    if episode.initial_digest is not None:
        got = state_digest(state)
        if got != episode.initial_digest:
            raise ReplayMismatchError(episode.episode_id, -1, episode.initial_digest, got)
    total = 0.0
    for rec, joint in zip(episode.steps, episode.joint_actions()):
        outcome = step(state, joint, layout, shaping)
        state = outcome.next_state
        total += outcome.sparse_reward
        got = state_digest(state)
        if got != rec["state_digest"]:
            raise ReplayMismatchError(episode.episode_id, rec["tick"], rec["state_digest"], got)
    return total


def replay_file(
    path: str | Path, layouts: dict[str, Layout], shaping: ShapingConfig | None = None
) -> list[tuple[str, float]]:
    results = []
    for ep in read_episodes(path):
        if ep.layout_name not in layouts:
            raise KeyError(f"replay needs layout {ep.layout_name!r}")
        shaping_cfg = shaping
        results.append((ep.episode_id, replay_episode(ep, layouts[ep.layout_name], shaping_cfg)))
    return results


def iter_episode_ids(episodes: Iterable[LoggedEpisode]) -> set[str]:
    return {ep.episode_id for ep in episodes}
