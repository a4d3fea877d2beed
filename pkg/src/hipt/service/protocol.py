"""Wire protocol for live play: JSON text messages over one WebSocket.

Client -> server:
    {"type": "join", "session": "<id>"}
    {"type": "input", "action": "North|South|East|West|Stay|Interact"}
    {"type": "preference", "choice": -1 | 1}

Server -> client:
    {"type": "hello", "layout": {"name", "grid", "width", "height"},
     "seat": 0|1, "tick_ms": int, "horizon": int,
     "round": int, "episode": int, "partner_label": "A"|"B"}
    {"type": "state", "tick": int, "state": <world state dict>,
     "score": int, "round": int, "episode": int, "partner_label": "A"|"B",
     "digest": str}
    {"type": "round_end", "round": int, "scores": [int, int]}
    {"type": "prompt_preference", "round": int, "labels": ["A", "B"]}
    {"type": "done"}
    {"type": "error", "message": str}

Preference semantics: choice -1 prefers partner A (first episode of the
round), +1 prefers partner B (second episode). Partner identities are
masked as labels on the wire; the unmasked checkpoint ids are stored only
server-side in the preference log.
"""

from __future__ import annotations

from ..env.engine import ACTION_INDEX

CLIENT_TYPES = ("join", "input", "preference")
SERVER_TYPES = ("hello", "state", "round_end", "prompt_preference", "done", "error")


class ProtocolError(ValueError):
    pass


def parse_client_message(obj: dict) -> dict:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ProtocolError("message must be an object with a 'type'")
    mtype = obj["type"]
    if mtype == "join":
        if not isinstance(obj.get("session"), str) or not obj["session"]:
            raise ProtocolError("join needs a nonempty 'session'")
    elif mtype == "input":
        if obj.get("action") not in ACTION_INDEX:
            raise ProtocolError(f"unknown action {obj.get('action')!r}")
    elif mtype == "preference":
        if obj.get("choice") not in (-1, 1):
            raise ProtocolError("preference 'choice' must be -1 or +1")
    else:
        raise ProtocolError(f"unknown client message type {mtype!r}")
    return obj
