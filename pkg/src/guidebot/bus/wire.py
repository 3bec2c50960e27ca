"""Transport-independent session logic for the JSON wire protocol.

Both the TCP listener and the WebSocket gateway speak the same frames:

  client -> server
    {"op": "hello", "client": "<name>"}          must be the first frame
    {"op": "subscribe", "pattern": "a.b.#", "id": "c1"}
    {"op": "unsubscribe", "sub": "sub-3", "id": "c2"}
    {"op": "publish", "envelope": {...}, "id": "c3"}   "id" optional

  server -> client
    {"op": "ok", "re": "c1", ...}                only for frames that carried "id"
    {"op": "error", "re": "c1"|null, "code": "...", "message": "..."}
    {"op": "deliver", "sub": "sub-3", "envelope": {...}}

A malformed frame produces an error frame and the connection stays open; the
only fatal protocol error is a first frame that is not a hello.
"""

from __future__ import annotations

import json
import logging

from .broker import Broker, BrokerError
from .envelope import DecodeError, envelope_from_obj, envelope_to_obj
from .keys import InvalidPattern

log = logging.getLogger(__name__)


class WireSession:
    """One remote client's view of the broker.

    `send_obj(obj)` must enqueue a JSON-serializable dict for transmission;
    it is called both from the transport's reader context (acks, errors) and
    from arbitrary publisher threads (deliveries), so it has to be
    thread-safe.  The transports use a queue drained by a writer thread.
    """

    def __init__(self, broker: Broker, send_obj, peer: str = "?"):
        self._broker = broker
        self._send = send_obj
        self._peer = peer
        self._conn = None
        self.client_name = None

    @property
    def hello_done(self) -> bool:
        return self._conn is not None

    def handle_line(self, line: str) -> bool:
        """Process one frame.  Returns False when the connection must close."""
        try:
            obj = json.loads(line)
        except ValueError:
            self._error(None, "bad-json", "frame is not valid JSON")
            return self.hello_done
        if not isinstance(obj, dict):
            self._error(None, "bad-frame", "frame must be a JSON object")
            return self.hello_done
        return self.handle_obj(obj)

    def handle_obj(self, obj: dict) -> bool:
        op = obj.get("op")
        req = obj.get("id")
        if self._conn is None:
            if op != "hello":
                self._error(req, "hello-required", "first frame must be a hello")
                return False
            name = obj.get("client")
            if not isinstance(name, str) or not name:
                self._error(req, "bad-hello", "hello needs a nonempty 'client' string")
                return False
            self.client_name = name
            self._conn = self._broker.connect(name, self._deliver)
            if req is not None:
                self._send({"op": "ok", "re": req})
            return True

        if op == "publish":
            try:
                env = envelope_from_obj(obj.get("envelope"))
                self._conn.publish(env)
            except (DecodeError, BrokerError) as e:
                code = e.code if isinstance(e, BrokerError) else "bad-envelope"
                self._error(req, code, str(e))
                return True
            if req is not None:
                self._send({"op": "ok", "re": req})
        elif op == "subscribe":
            pattern = obj.get("pattern")
            if not isinstance(pattern, str):
                self._error(req, "bad-pattern", "'pattern' must be a string")
                return True
            try:
                sub_id = self._conn.subscribe(pattern)
            except (InvalidPattern, BrokerError) as e:
                code = e.code if isinstance(e, BrokerError) else "bad-pattern"
                self._error(req, code, str(e))
                return True
            if req is not None:
                self._send({"op": "ok", "re": req, "sub": sub_id})
        elif op == "unsubscribe":
            sub_id = obj.get("sub")
            try:
                self._conn.unsubscribe(sub_id)
            except BrokerError as e:
                self._error(req, e.code, str(e))
                return True
            if req is not None:
                self._send({"op": "ok", "re": req})
        elif op == "hello":
            self._error(req, "bad-op", "hello already done")
        else:
            self._error(req, "bad-op", f"unknown op: {op!r}")
        return True

    def _deliver(self, sub_id: str, env):
        self._send({"op": "deliver", "sub": sub_id, "envelope": envelope_to_obj(env)})

    def _error(self, req, code: str, message: str):
        log.debug("wire error for %s: %s %s", self._peer, code, message)
        self._send({"op": "error", "re": req, "code": code, "message": message})

    def close(self):
        if self._conn is not None:
            self._conn.close()
            self._conn = None
