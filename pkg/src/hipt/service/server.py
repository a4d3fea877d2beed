"""Live play session server.

One human and one agent per session. The server owns the environment and a
fixed-period tick loop; the client only sends inputs and reads state
broadcasts, so replaying a session transcript through the engine reproduces
every broadcast digest. Rounds pair two episodes with different (masked)
agent partners, then collect a -1/+1 preference that is durably written
before the session acknowledges completion.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
import uuid
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from ..env.engine import (
    ACTION_INDEX,
    ACTION_NAMES,
    STAY,
    reset,
    state_digest,
    state_to_dict,
    step,
)
from ..env.episode import Policy, sample_action
from ..env.features import encode_observation
from ..env.layout import Layout, load_layout, serialize_layout
from ..agent.checkpoint import load_agent
from ..nets import load_model
from ..policies import HierarchicalPolicy, NetPolicy
from ..env.scripted import SequencePolicy, StayPolicy
from .protocol import ProtocolError, parse_client_message

log = logging.getLogger(__name__)


@dataclass
class ServeConfig:
    agents: list[str]  # checkpoint paths: <stem>.model (+ optional .json sidecar)
    layout_name: str = "cramped_room"
    tick_ms: int = 150
    horizon: int = 400
    episodes_per_round: int = 2
    rounds: int = 1
    human_seat: int = 0
    data_dir: str = "play_data"
    static_dir: str | None = None
    resume_timeout_s: float = 30.0
    seed: int = 0


def load_agent_policy_factory(path: str | Path):
    """Returns (checkpoint_id, factory) for a flat or bi-level checkpoint."""
    stem = Path(path)
    if stem.suffix in (".model", ".json"):
        stem = stem.with_suffix("")
    if stem.with_suffix(".json").exists():
        agent, _meta = load_agent(stem)
        return str(stem), lambda: HierarchicalPolicy(agent.params, agent.p_min, agent.p_max)
    params = load_model(stem.with_suffix(".model"))
    return str(stem), lambda: NetPolicy(params)


@dataclass
class PreferenceRecord:
    round_id: str
    session: str
    round_index: int
    agent_a: str
    agent_b: str
    choice: int
    scores: list[int]
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "round_id": self.round_id,
            "session": self.session,
            "round": self.round_index,
            "agent_a": self.agent_a,
            "agent_b": self.agent_b,
            "choice": self.choice,
            "scores": self.scores,
            "timestamp": self.timestamp,
        }


class Session:
    """One human-agent pairing with its own tick loop and transcript."""

    def __init__(self, server: "PlayServer", session_id: str):
        self.server = server
        self.id = session_id
        cfg = server.cfg
        self.layout: Layout = server.layout
        self.human_seat = cfg.human_seat
        self.agent_seat = 1 - cfg.human_seat
        self.phase = "lobby"
        self.round_index = 0
        self.episode_index = 0
        self.round_scores: list[int] = []
        self.pending_action: int | None = None
        self.ws: WebSocket | None = None
        self.connected = asyncio.Event()
        self.rng = np.random.default_rng(
            np.random.SeedSequence([cfg.seed, zlib.crc32(session_id.encode())])
        )
        self.round_agent_ids: list[str] = []
        self.policy: Policy | None = None
        self.state = None
        self.transcript_path = Path(cfg.data_dir) / "transcripts" / f"{session_id}.jsonl"
        self.transcript_path.parent.mkdir(parents=True, exist_ok=True)
        self._transcript = open(self.transcript_path, "a", encoding="utf-8")
        self._task: asyncio.Task | None = None
        self.done_flushed = False
        self.tick_durations: list[float] = []

    # round / episode orchestration

    def _draw_round_agents(self) -> None:
        ids = list(self.server.agent_ids)
        if len(ids) >= 2:
            pick = self.rng.choice(len(ids), size=2, replace=False)
            self.round_agent_ids = [ids[int(pick[0])], ids[int(pick[1])]]
        else:
            self.round_agent_ids = [ids[0], ids[0]]

    def _begin_episode(self) -> None:
        cfg = self.server.cfg
        agent_id = self.round_agent_ids[self.episode_index % len(self.round_agent_ids)]
        self.policy = self.server.agent_factories[agent_id]()
        self.policy.begin_episode(self.agent_seat, self.rng)
        self.state = reset(self.layout)
        self.pending_action = None
        header = {
            "episode_id": f"{self.id}:r{self.round_index}e{self.episode_index}",
            "layout": self.layout.name,
            "horizon": cfg.horizon,
            "initial_digest": state_digest(self.state),
            "shaping_enabled": False,
        }
        self._transcript.write(json.dumps(header, sort_keys=True) + "\n")

    @property
    def partner_label(self) -> str:
        return "AB"[self.episode_index % 2]

    def start(self) -> None:
        self.phase = "playing"
        self._draw_round_agents()
        self._begin_episode()
        self._task = asyncio.get_running_loop().create_task(self._run())

    async def _run(self) -> None:
        cfg = self.server.cfg
        period = cfg.tick_ms / 1000.0
        loop = asyncio.get_running_loop()
        next_deadline = loop.time() + period
        try:
            while self.phase in ("playing", "between-episodes"):
                if not self.connected.is_set():
                    try:
                        await asyncio.wait_for(
                            self.connected.wait(), timeout=cfg.resume_timeout_s
                        )
                    except asyncio.TimeoutError:
                        log.info("session %s resume window expired", self.id)
                        await self.server.drop_session(self.id)
                        return
                    next_deadline = loop.time() + period
                delay = next_deadline - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                next_deadline += period
                if self.phase == "playing":
                    await self._tick()
        except Exception:
            log.exception("session %s aborted by tick-loop failure", self.id)
            await self._send({"type": "error", "message": "session aborted"})
            await self.server.drop_session(self.id)

    async def _tick(self) -> None:
        cfg = self.server.cfg
        t0 = time.perf_counter()
        human_action = self.pending_action if self.pending_action is not None else STAY
        self.pending_action = None
        obs = encode_observation(self.state, self.layout, self.agent_seat)
        agent_action = sample_action(self.rng, self.policy.action_probs(obs))
        joint = [0, 0]
        joint[self.human_seat] = human_action
        joint[self.agent_seat] = agent_action
        outcome = step(self.state, tuple(joint), self.layout, None, cfg.horizon)
        self.state = outcome.next_state
        digest = state_digest(self.state)
        rec = {
            "tick": self.state.tick - 1,
            "joint_action": [ACTION_NAMES[joint[0]], ACTION_NAMES[joint[1]]],
            "sparse_reward": int(outcome.sparse_reward),
            "shaped": [0.0, 0.0],
            "events": [
                {"type": e.type, "player": e.player, "pos": list(e.pos)}
                for e in outcome.events
            ],
            "state_digest": digest,
        }
        self._transcript.write(json.dumps(rec, sort_keys=True) + "\n")
        self.tick_durations.append(time.perf_counter() - t0)
        await self._send(
            {
                "type": "state",
                "tick": self.state.tick,
                "state": state_to_dict(self.state),
                "score": self.state.score,
                "round": self.round_index,
                "episode": self.episode_index,
                "partner_label": self.partner_label,
                "digest": digest,
            }
        )
        if self.state.tick >= cfg.horizon:
            await self._end_episode()

    async def _end_episode(self) -> None:
        cfg = self.server.cfg
        self.round_scores.append(self.state.score)
        self._transcript.flush()
        if self.episode_index + 1 < cfg.episodes_per_round:
            self.episode_index += 1
            self._begin_episode()
            return
        self.phase = "preference"
        await self._send(
            {
                "type": "round_end",
                "round": self.round_index,
                "scores": list(self.round_scores),
            }
        )
        await self._send(
            {"type": "prompt_preference", "round": self.round_index, "labels": ["A", "B"]}
        )

    async def handle_preference(self, choice: int) -> None:
        if self.phase != "preference":
            await self._send({"type": "error", "message": "no preference expected now"})
            return
        cfg = self.server.cfg
        record = PreferenceRecord(
            round_id=f"{self.id}:r{self.round_index}",
            session=self.id,
            round_index=self.round_index,
            agent_a=self.round_agent_ids[0],
            agent_b=self.round_agent_ids[1 % len(self.round_agent_ids)],
            choice=choice,
            scores=list(self.round_scores),
            timestamp=time.time(),
        )
        self.server.write_preference(record)
        if self.round_index + 1 < cfg.rounds:
            self.round_index += 1
            self.episode_index = 0
            self.round_scores = []
            self.phase = "playing"
            self._draw_round_agents()
            self._begin_episode()
            self._task = asyncio.get_running_loop().create_task(self._run())
        else:
            self._transcript.flush()
            self._transcript.close()
            self.done_flushed = True
            self.phase = "done"
            await self._send({"type": "done"})

    # connection plumbing

    async def attach(self, ws: WebSocket) -> None:
        self.ws = ws
        self.connected.set()

    def detach(self) -> None:
        self.ws = None
        self.connected.clear()

    async def _send(self, message: dict) -> None:
        ws = self.ws
        if ws is None:
            return
        try:
            await ws.send_text(json.dumps(message))
        except Exception:
            self.detach()

    def hello_message(self) -> dict:
        cfg = self.server.cfg
        return {
            "type": "hello",
            "layout": {
                "name": self.layout.name,
                "grid": serialize_layout(self.layout),
                "width": self.layout.width,
                "height": self.layout.height,
            },
            "seat": self.human_seat,
            "tick_ms": cfg.tick_ms,
            "horizon": cfg.horizon,
            "round": self.round_index,
            "episode": self.episode_index,
            "partner_label": self.partner_label,
        }


class PlayServer:
    def __init__(self, cfg: ServeConfig):
        if not cfg.agents:
            raise ValueError("serve needs at least one agent checkpoint")
        self.cfg = cfg
        self.layout = load_layout(cfg.layout_name)
        self.sessions: dict[str, Session] = {}
        self.agent_factories: dict[str, object] = {}
        self.agent_ids: list[str] = []
        for path in cfg.agents:
            agent_id, factory = _resolve_agent(path, self.layout)
            self.agent_factories[agent_id] = factory
            self.agent_ids.append(agent_id)
        self.preferences_path = Path(cfg.data_dir) / "preferences.jsonl"
        self.preferences_path.parent.mkdir(parents=True, exist_ok=True)

    def write_preference(self, record: PreferenceRecord) -> None:
        with open(self.preferences_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
            fh.flush()

    async def join(self, session_id: str, ws: WebSocket) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            session = Session(self, session_id)
            self.sessions[session_id] = session
            await session.attach(ws)
            session.start()
        else:
            await session.attach(ws)
        return session

    async def drop_session(self, session_id: str) -> None:
        self.sessions.pop(session_id, None)


def _resolve_agent(path: str, layout: Layout):
    if path == "scripted:stay":
        return "scripted:stay", lambda: StayPolicy()
    if path.startswith("scripted:tutorial"):
        from ..env.scripted import perfect_cycle_cramped_room

        _, partner = perfect_cycle_cramped_room()
        actions = list(partner.actions)
        return "scripted:tutorial", lambda: SequencePolicy(actions)
    return load_agent_policy_factory(path)


def create_app(cfg: ServeConfig) -> FastAPI:
    app = FastAPI()
    server = PlayServer(cfg)
    app.state.play_server = server

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "layout": cfg.layout_name, "sessions": len(server.sessions)}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session: Session | None = None
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = parse_client_message(json.loads(raw))
                except (json.JSONDecodeError, ProtocolError) as exc:
                    await ws.send_text(json.dumps({"type": "error", "message": str(exc)}))
                    continue
                if msg["type"] == "join":
                    session = await server.join(msg["session"], ws)
                    await ws.send_text(json.dumps(session.hello_message()))
                elif session is None:
                    await ws.send_text(
                        json.dumps({"type": "error", "message": "join first"})
                    )
                elif msg["type"] == "input":
                    session.pending_action = ACTION_INDEX[msg["action"]]
                elif msg["type"] == "preference":
                    await session.handle_preference(int(msg["choice"]))
        except WebSocketDisconnect:
            if session is not None:
                session.detach()

    if cfg.static_dir and Path(cfg.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=cfg.static_dir, html=True), name="client")
    return app


def new_session_id() -> str:
    return uuid.uuid4().hex[:12]
