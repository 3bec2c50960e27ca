"""In-process broker core: connections, subscriptions, topic-routed fan-out.

The core is transport-agnostic.  A connection registers a `deliver(sub_id,
envelope)` callable; the TCP server enqueues lines onto a writer queue, the
in-process client schedules subscriber callbacks.  One lock serializes
routing-table changes and publish fan-out, which makes subscribe/unsubscribe
atomic with respect to publishes and gives per-(publisher, subscriber) FIFO
for free: delivery order is enqueue order.
"""

from __future__ import annotations

import itertools
import logging
import threading

from .envelope import Envelope, MAX_PAYLOAD_BYTES, payload_size
from .keys import ALLOWED_NAMESPACES, BindingPattern, topic_match

log = logging.getLogger(__name__)


class BrokerError(Exception):
    """Broker rejected an operation; `code` is the wire-visible reason."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class Subscription:
    __slots__ = ("id", "pattern", "conn")

    def __init__(self, sub_id: str, pattern: BindingPattern, conn: "Connection"):
        self.id = sub_id
        self.pattern = pattern
        self.conn = conn


class Connection:
    """One client's attachment to the broker."""

    def __init__(self, broker: "Broker", name: str, deliver):
        self.broker = broker
        self.name = name
        self._deliver = deliver
        self.subscriptions: dict[str, Subscription] = {}
        self.closed = False
        self._last_ts = -1

    def subscribe(self, pattern: BindingPattern | str) -> str:
        return self.broker._subscribe(self, pattern)

    def unsubscribe(self, sub_id: str):
        self.broker._unsubscribe(self, sub_id)

    def publish(self, env: Envelope):
        self.broker._publish(self, env)

    def close(self):
        self.broker._close(self)


class Broker:
    """Topic-exchange pub/sub over live connections; no queues, no retention."""

    def __init__(self, enforce_namespaces: bool = False):
        self.enforce_namespaces = enforce_namespaces
        self._lock = threading.RLock()
        self._conns: set[Connection] = set()
        self._subs: dict[str, Subscription] = {}
        self._sub_ids = itertools.count(1)

    def connect(self, name: str, deliver) -> Connection:
        """Attach a client.  deliver(sub_id, env) is invoked, under the
        routing lock, once per matching subscription per publish."""
        conn = Connection(self, name, deliver)
        with self._lock:
            self._conns.add(conn)
        log.debug("connect %s", name)
        return conn

    def _subscribe(self, conn: Connection, pattern: BindingPattern | str) -> str:
        if isinstance(pattern, str):
            pattern = BindingPattern.parse(pattern)
        if self.enforce_namespaces and pattern.first_word_literal not in ALLOWED_NAMESPACES:
            raise BrokerError(
                "namespace-violation",
                f"pattern must start with one of {ALLOWED_NAMESPACES}, got {pattern.render()!r}",
            )
        with self._lock:
            if conn.closed:
                raise BrokerError("closed", "connection is closed")
            sub_id = f"sub-{next(self._sub_ids)}"
            sub = Subscription(sub_id, pattern, conn)
            conn.subscriptions[sub_id] = sub
            self._subs[sub_id] = sub
        log.debug("subscribe %s %s -> %s", conn.name, pattern.render(), sub_id)
        return sub_id

    def _unsubscribe(self, conn: Connection, sub_id: str):
        with self._lock:
            sub = conn.subscriptions.pop(sub_id, None)
            if sub is None:
                raise BrokerError("unknown-subscription", f"no such subscription: {sub_id}")
            del self._subs[sub_id]

    def _publish(self, conn: Connection, env: Envelope):
        if payload_size(env.payload) > MAX_PAYLOAD_BYTES:
            raise BrokerError("payload-too-large", "payload exceeds 1 MiB")
        with self._lock:
            if conn.closed:
                raise BrokerError("closed", "connection is closed")
            if env.ts < conn._last_ts:
                env = Envelope(
                    key=env.key, kind=env.kind, ts=conn._last_ts, id=env.id,
                    payload=env.payload, reply_to=env.reply_to,
                )
            conn._last_ts = env.ts
            for sub in self._subs.values():
                if topic_match(sub.pattern, env.key):
                    try:
                        sub.conn._deliver(sub.id, env)
                    except Exception:
                        # one faulty subscriber must not break the publisher
                        # or starve the remaining subscribers
                        log.exception("delivery to %s failed", sub.conn.name)

    def _close(self, conn: Connection):
        with self._lock:
            if conn.closed:
                return
            conn.closed = True
            for sub_id in list(conn.subscriptions):
                del self._subs[sub_id]
            conn.subscriptions.clear()
            self._conns.discard(conn)
        log.debug("close %s", conn.name)
