"""Client-side bus interface.

`InProcClient` attaches straight to a `Broker` object in the same process and
delivers envelopes by calling subscriber callbacks inline in the publisher's
thread.  Under a virtual clock everything runs in one thread, so inline
delivery is deterministic; under a real clock the broker lock serializes
fan-out, preserving per-publisher order.

Envelope ids look like uuid4 strings.  In virtual mode they come from a
per-client seeded RNG so repeated runs produce identical transcripts.
"""

from __future__ import annotations

import random
import uuid
import zlib

from ..clock import Scheduler
from .broker import Broker
from .envelope import Envelope
from .keys import BindingPattern, RoutingKey


class BusClient:
    """What components program against; implemented in-process and over TCP."""

    name: str
    scheduler: Scheduler

    def publish(self, key, payload: dict, kind: str = "data", reply_to=None) -> Envelope:
        raise NotImplementedError

    def subscribe(self, pattern, callback) -> str:
        raise NotImplementedError

    def unsubscribe(self, sub_id: str):
        raise NotImplementedError

    def close(self):
        raise NotImplementedError


def _id_maker(name: str, scheduler: Scheduler, seed=None):
    if scheduler.virtual:
        if seed is None:
            seed = zlib.crc32(name.encode("utf-8"))
        rng = random.Random(seed)
        return lambda: str(uuid.UUID(int=rng.getrandbits(128), version=4))
    return lambda: str(uuid.uuid4())


class InProcClient(BusClient):
    def __init__(self, broker: Broker, name: str, scheduler: Scheduler, seed=None):
        self.name = name
        self.scheduler = scheduler
        self._new_id = _id_maker(name, scheduler, seed)
        self._callbacks: dict[str, object] = {}
        self._conn = broker.connect(name, self._on_deliver)

    def _on_deliver(self, sub_id: str, env: Envelope):
        cb = self._callbacks.get(sub_id)
        if cb is not None:
            cb(env)

    def make_envelope(self, key, payload: dict, kind: str = "data", reply_to=None) -> Envelope:
        if isinstance(key, str):
            key = RoutingKey.parse(key)
        if isinstance(reply_to, str):
            reply_to = RoutingKey.parse(reply_to)
        return Envelope(
            key=key,
            kind=kind,
            ts=self.scheduler.now_ms(),
            id=self._new_id(),
            payload=payload,
            reply_to=reply_to,
        )

    def publish(self, key, payload: dict, kind: str = "data", reply_to=None) -> Envelope:
        env = self.make_envelope(key, payload, kind, reply_to)
        self._conn.publish(env)
        return env

    def publish_envelope(self, env: Envelope):
        self._conn.publish(env)

    def subscribe(self, pattern, callback) -> str:
        if isinstance(pattern, str):
            pattern = BindingPattern.parse(pattern)
        sub_id = self._conn.subscribe(pattern)
        self._callbacks[sub_id] = callback
        return sub_id

    def unsubscribe(self, sub_id: str):
        self._conn.unsubscribe(sub_id)
        self._callbacks.pop(sub_id, None)

    def close(self):
        self._conn.close()
        self._callbacks.clear()
