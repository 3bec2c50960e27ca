"""TCP transport: newline-delimited JSON frames over a plain socket.

Server side: an accept loop hands each connection a reader thread plus a
writer thread draining an outbound queue, so one slow client never blocks
another and each connection's writes stay serialized.

Client side: `TcpBusClient` mirrors the in-process client interface.  A
reader thread dispatches deliveries sequentially; on socket loss it
reconnects with capped exponential backoff and replays its subscriptions.
"""

from __future__ import annotations

import itertools
import json
import logging
import queue
import socket
import threading
import time

from ..clock import RealScheduler, Scheduler
from .broker import Broker
from .client import BusClient, _id_maker
from .envelope import Envelope, envelope_from_obj, envelope_to_obj
from .keys import BindingPattern, RoutingKey
from .wire import WireSession

log = logging.getLogger(__name__)

DEFAULT_PORT = 5675


class BusConnectionError(ConnectionError):
    pass


def _send_loop(sock: socket.socket, outq: "queue.Queue"):
    try:
        while True:
            obj = outq.get()
            if obj is None:
                break
            data = json.dumps(obj, separators=(",", ":")).encode("utf-8") + b"\n"
            sock.sendall(data)
    except OSError:
        pass


def _read_lines(sock: socket.socket):
    """Yield decoded lines; stops on EOF or socket error."""
    buf = b""
    while True:
        try:
            chunk = sock.recv(65536)
        except OSError:
            return
        if not chunk:
            return
        buf += chunk
        while b"\n" in buf:
            line, buf = buf.split(b"\n", 1)
            yield line.decode("utf-8", errors="replace")


class TcpBusServer:
    """Accepts wire-protocol clients for an embedded broker."""

    def __init__(self, broker: Broker, host: str = "127.0.0.1", port: int = DEFAULT_PORT):
        self.broker = broker
        self._sock = socket.create_server((host, port))
        self.host, self.port = self._sock.getsockname()[:2]
        self._closing = False
        self._live: set[socket.socket] = set()
        self._live_lock = threading.Lock()
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True, name="bus-accept")

    def start(self) -> "TcpBusServer":
        self._accept_thread.start()
        log.info("bus listening on %s:%d", self.host, self.port)
        return self

    def _accept_loop(self):
        while not self._closing:
            try:
                conn, addr = self._sock.accept()
            except OSError:
                return
            with self._live_lock:
                self._live.add(conn)
            threading.Thread(
                target=self._serve_conn, args=(conn, addr), daemon=True,
                name=f"bus-conn-{addr[1]}",
            ).start()

    def _serve_conn(self, sock: socket.socket, addr):
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        outq: queue.Queue = queue.Queue()
        writer = threading.Thread(target=_send_loop, args=(sock, outq), daemon=True)
        writer.start()
        session = WireSession(self.broker, outq.put, peer=f"{addr[0]}:{addr[1]}")
        try:
            for line in _read_lines(sock):
                if not line.strip():
                    continue
                if not session.handle_line(line):
                    break
        finally:
            session.close()
            outq.put(None)
            writer.join(timeout=2)
            with self._live_lock:
                self._live.discard(sock)
            try:
                sock.close()
            except OSError:
                pass

    def close(self):
        self._closing = True
        try:
            self._sock.close()
        except OSError:
            pass
        with self._live_lock:
            live = list(self._live)
        for sock in live:
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                sock.close()
            except OSError:
                pass


class TcpBusClient(BusClient):
    """Bus client over TCP with automatic reconnect.

    Subscribe/unsubscribe wait for the server's ack; publish is
    fire-and-forget.  Callbacks run on the reader thread, one at a time, so
    they must not block on bus requests of their own.
    """

    def __init__(self, addr: str, name: str, scheduler: Scheduler | None = None,
                 connect_timeout: float = 5.0):
        self.name = name
        self.scheduler = scheduler or RealScheduler()
        self._new_id = _id_maker(name, self.scheduler)
        host, _, port = addr.rpartition(":")
        self.host = host or "127.0.0.1"
        self.port = int(port)
        self._sock: socket.socket | None = None
        self._wlock = threading.Lock()
        self._closed = False
        self._connected = threading.Event()
        self._reqs = itertools.count(1)
        self._pending: dict[str, _Waiter] = {}
        # local sub id -> [pattern, callback, server sub id]
        self._subs: dict[str, list] = {}
        self._server_to_local: dict[str, str] = {}
        self._local_ids = itertools.count(1)
        self._last_ts = -1
        self._reader = threading.Thread(target=self._read_loop, daemon=True,
                                        name=f"bus-client-{name}")
        self._connect(connect_timeout)
        self._reader.start()

    # -- connection management -------------------------------------------

    def _connect(self, timeout: float):
        deadline = time.monotonic() + timeout
        delay = 0.05
        while True:
            try:
                self._open_socket()
                return
            except OSError as e:
                if self._closed or time.monotonic() + delay > deadline:
                    raise BusConnectionError(f"cannot reach bus at {self.host}:{self.port}: {e}") from e
                time.sleep(delay)
                delay = min(delay * 2, 1.0)

    def _open_socket(self):
        sock = socket.create_connection((self.host, self.port), timeout=5)
        sock.settimeout(None)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        sock.sendall(json.dumps({"op": "hello", "client": self.name}).encode() + b"\n")
        for local_id, rec in list(self._subs.items()):
            pattern = rec[0]
            req = f"r{next(self._reqs)}"
            w = _Waiter()
            w.local_id = local_id
            self._pending[req] = w
            # ack is handled by the reader loop once it resumes on this
            # socket; _bind_sub then remaps server sub id -> local id
            sock.sendall(json.dumps(
                {"op": "subscribe", "pattern": pattern, "id": req}
            ).encode() + b"\n")
        self._sock = sock
        self._connected.set()

    def _lose_socket(self):
        self._connected.clear()
        sock, self._sock = self._sock, None
        if sock is not None:
            try:
                sock.close()
            except OSError:
                pass

    def _read_loop(self):
        delay = 0.1
        while not self._closed:
            sock = self._sock
            if sock is None:
                try:
                    self._open_socket()
                except OSError:
                    time.sleep(delay)
                    delay = min(delay * 2, 2.0)
                    continue
                delay = 0.1
                continue
            for line in _read_lines(sock):
                if not line.strip():
                    continue
                try:
                    self._handle(json.loads(line))
                except Exception:
                    log.exception("error handling frame")
            if self._closed:
                return
            self._lose_socket()

    def _handle(self, obj: dict):
        op = obj.get("op")
        if op == "deliver":
            local = self._server_to_local.get(obj.get("sub"))
            rec = self._subs.get(local) if local else None
            if rec is not None:
                rec[1](envelope_from_obj(obj["envelope"]))
        elif op in ("ok", "error"):
            w = self._pending.pop(obj.get("re"), None)
            if w is not None:
                w.result = obj
                if op == "ok" and w.local_id is not None and "sub" in obj:
                    self._bind_sub(w.local_id, obj["sub"])
                w.event.set()
            elif op == "error":
                log.warning("bus error: %s %s", obj.get("code"), obj.get("message"))

    def _bind_sub(self, local_id: str, server_id: str):
        rec = self._subs.get(local_id)
        if rec is None:
            return
        old = rec[2]
        if old is not None:
            self._server_to_local.pop(old, None)
        rec[2] = server_id
        self._server_to_local[server_id] = local_id

    # -- requests ---------------------------------------------------------

    def _send_obj(self, obj: dict):
        data = json.dumps(obj, separators=(",", ":")).encode("utf-8") + b"\n"
        if not self._connected.wait(timeout=10):
            raise BusConnectionError("bus unreachable")
        with self._wlock:
            sock = self._sock
            if sock is None:
                raise BusConnectionError("bus unreachable")
            sock.sendall(data)

    def _request(self, obj: dict, timeout: float = 5.0) -> dict:
        req = f"r{next(self._reqs)}"
        obj["id"] = req
        self._pending[req] = w = _Waiter()
        self._send_obj(obj)
        if not w.event.wait(timeout):
            self._pending.pop(req, None)
            raise BusConnectionError("timed out waiting for bus ack")
        if w.result.get("op") == "error":
            raise BusRequestError(w.result.get("code", "?"), w.result.get("message", ""))
        return w.result

    # -- BusClient interface ----------------------------------------------

    def make_envelope(self, key, payload: dict, kind: str = "data", reply_to=None) -> Envelope:
        if isinstance(key, str):
            key = RoutingKey.parse(key)
        if isinstance(reply_to, str):
            reply_to = RoutingKey.parse(reply_to)
        ts = max(self.scheduler.now_ms(), self._last_ts)
        self._last_ts = ts
        return Envelope(key=key, kind=kind, ts=ts, id=self._new_id(),
                        payload=payload, reply_to=reply_to)

    def publish(self, key, payload: dict, kind: str = "data", reply_to=None) -> Envelope:
        env = self.make_envelope(key, payload, kind, reply_to)
        self.publish_envelope(env)
        return env

    def publish_envelope(self, env: Envelope):
        self._send_obj({"op": "publish", "envelope": envelope_to_obj(env)})

    def subscribe(self, pattern, callback) -> str:
        if isinstance(pattern, BindingPattern):
            pattern = pattern.render()
        local_id = f"s{next(self._local_ids)}"
        self._subs[local_id] = [pattern, callback, None]
        req = f"r{next(self._reqs)}"
        self._pending[req] = w = _Waiter()
        w.local_id = local_id
        self._send_obj({"op": "subscribe", "pattern": pattern, "id": req})
        if not w.event.wait(5.0):
            self._pending.pop(req, None)
            del self._subs[local_id]
            raise BusConnectionError("timed out waiting for subscribe ack")
        if w.result.get("op") == "error":
            del self._subs[local_id]
            raise BusRequestError(w.result.get("code", "?"), w.result.get("message", ""))
        return local_id

    def unsubscribe(self, sub_id: str):
        rec = self._subs.pop(sub_id, None)
        if rec is None:
            raise KeyError(f"no such subscription: {sub_id}")
        server_id = rec[2]
        if server_id is not None:
            self._server_to_local.pop(server_id, None)
            self._request({"op": "unsubscribe", "sub": server_id})

    def close(self):
        self._closed = True
        self._connected.set()
        sock = self._sock
        if sock is not None:
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                sock.close()
            except OSError:
                pass
        self._sock = None


class BusRequestError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class _Waiter:
    __slots__ = ("event", "result", "local_id")

    def __init__(self):
        self.event = threading.Event()
        self.result: dict = {}
        self.local_id = None


def serve(broker: Broker, host: str = "127.0.0.1", port: int = DEFAULT_PORT) -> TcpBusServer:
    return TcpBusServer(broker, host, port).start()
