"""The routed message and its wire codec.

Wire form is one UTF-8 JSON object per LF-terminated line::

    {"key":"avatar.nao.data.camera","kind":"data","ts":1712,"id":"<uuid>",
     "payload":{...}}

`reply_to` is optional.  Payloads are always JSON objects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .keys import InvalidKey, RoutingKey

KINDS = ("data", "command", "event", "reply")

#: Serialized payloads above this are rejected at publish time.
MAX_PAYLOAD_BYTES = 1 << 20


class DecodeError(ValueError):
    """Wire line could not be decoded; `field` names the offender."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class Envelope:
    key: RoutingKey
    kind: str
    ts: int
    id: str
    payload: dict = field(default_factory=dict)
    reply_to: RoutingKey | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown envelope kind: {self.kind!r}")
        if not isinstance(self.payload, dict):
            raise ValueError("payload must be a JSON object")


def envelope_to_obj(env: Envelope) -> dict:
    obj = {
        "key": env.key.render(),
        "kind": env.kind,
        "ts": env.ts,
        "id": env.id,
        "payload": env.payload,
    }
    if env.reply_to is not None:
        obj["reply_to"] = env.reply_to.render()
    return obj


def envelope_from_obj(obj) -> Envelope:
    """Build an Envelope from a parsed JSON object, naming any bad field."""
    if not isinstance(obj, dict):
        raise DecodeError("envelope", "expected a JSON object")
    for name in ("key", "kind", "ts", "id", "payload"):
        if name not in obj:
            raise DecodeError(name, "missing required field")
    try:
        key = RoutingKey.parse(obj["key"])
    except InvalidKey as exc:
        raise DecodeError("key", str(exc)) from exc
    kind = obj["kind"]
    if kind not in KINDS:
        raise DecodeError("kind", f"unknown kind {kind!r}")
    ts = obj["ts"]
    if not isinstance(ts, int) or isinstance(ts, bool):
        raise DecodeError("ts", "expected integer milliseconds")
    env_id = obj["id"]
    if not isinstance(env_id, str) or not env_id:
        raise DecodeError("id", "expected non-empty string")
    payload = obj["payload"]
    if not isinstance(payload, dict):
        raise DecodeError("payload", "expected a JSON object")
    reply_to = None
    if obj.get("reply_to") is not None:
        try:
            reply_to = RoutingKey.parse(obj["reply_to"])
        except InvalidKey as exc:
            raise DecodeError("reply_to", str(exc)) from exc
    return Envelope(key=key, kind=kind, ts=ts, id=env_id, payload=payload, reply_to=reply_to)


def encode_envelope(env: Envelope) -> bytes:
    """One LF-terminated UTF-8 JSON line; embedded newlines stay escaped."""
    text = json.dumps(envelope_to_obj(env), separators=(",", ":"), ensure_ascii=False)
    return text.encode("utf-8") + b"\n"


def decode_envelope(line: bytes | str) -> Envelope:
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError("envelope", f"not valid UTF-8: {exc}") from exc
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DecodeError("envelope", f"not valid JSON: {exc}") from exc
    return envelope_from_obj(obj)


def payload_size(payload: dict) -> int:
    return len(json.dumps(payload, separators=(",", ":"), ensure_ascii=False).encode("utf-8"))
