"""Wire messages: one JSON object per line, discriminated by ``type``.

    {"type": "Hello", "protocol_version": "1"}
    {"type": "CallRequest", "id": 1, "primitive": "find", "args": ["mug"]}
    {"type": "CallResponse", "id": 1, "ok": true, "value": [...]}
    {"type": "CallResponse", "id": 2, "ok": false, "error": "NotHolding", "detail": "..."}
    {"type": "FrameMeta", "frame_id": 3, "width": 320, "height": 240}
    {"type": "Bye"}

A CallResponse may also carry ``note``, the trace side information the
environment returned with the value.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from actattr.errors import ProtocolViolation

PROTOCOL_VERSION = "1"
MAX_LINE = 1 << 20

_REQUIRED = {
    "Hello": {"protocol_version": str},
    "CallRequest": {"id": int, "primitive": str, "args": list},
    "CallResponse": {"id": int, "ok": bool},
    "FrameMeta": {"frame_id": int, "width": int, "height": int},
    "Bye": {},
}


def hello() -> dict:
    return {"type": "Hello", "protocol_version": PROTOCOL_VERSION}


def call_request(msg_id: int, primitive: str, args: list) -> dict:
    return {"type": "CallRequest", "id": msg_id, "primitive": primitive, "args": args}


def call_ok(msg_id: int, value, note=None) -> dict:
    msg = {"type": "CallResponse", "id": msg_id, "ok": True, "value": value}
    if note is not None:
        msg["note"] = note
    return msg


def call_error(msg_id: int, kind: str, detail: str = "") -> dict:
    return {"type": "CallResponse", "id": msg_id, "ok": False, "error": kind, "detail": detail}


def frame_meta(frame_id: int, width: int, height: int) -> dict:
    return {"type": "FrameMeta", "frame_id": frame_id, "width": width, "height": height}


def bye() -> dict:
    return {"type": "Bye"}


def encode_message(msg: dict) -> bytes:
    return (json.dumps(msg, separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")


def decode_message(line: bytes) -> dict:
    """Parse and validate one line; anything off raises ``ProtocolViolation``."""
    if len(line) > MAX_LINE:
        raise ProtocolViolation("message too long")
    try:
        msg = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, ValueError, RecursionError) as exc:
        raise ProtocolViolation(f"not a JSON message: {exc}") from None
    if not isinstance(msg, dict) or msg.get("type") not in _REQUIRED:
        raise ProtocolViolation("message lacks a known type")
    for name, kind in _REQUIRED[msg["type"]].items():
        value = msg.get(name)
        if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
            raise ProtocolViolation(f"{msg['type']}.{name} missing or not {kind.__name__}")
    if msg["type"] == "CallResponse":
        if msg["ok"] and "value" not in msg:
            raise ProtocolViolation("successful CallResponse without value")
        if not msg["ok"] and not isinstance(msg.get("error"), str):
            raise ProtocolViolation("failed CallResponse without error kind")
    return msg


@dataclass(frozen=True)
class BridgeConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    timeout: float = 5.0
    max_sessions: int = 8

    @classmethod
    def from_env(cls) -> "BridgeConfig":
        """Defaults overridden by ACTATTR_BIND (host:port), ACTATTR_TIMEOUT, ACTATTR_MAX_SESSIONS."""
        base = cls()
        host, port = base.host, base.port
        bind = os.environ.get("ACTATTR_BIND")
        if bind:
            host, port = parse_address(bind)
        return cls(
            host=host,
            port=port,
            timeout=float(os.environ.get("ACTATTR_TIMEOUT", base.timeout)),
            max_sessions=int(os.environ.get("ACTATTR_MAX_SESSIONS", base.max_sessions)),
        )


def parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)
