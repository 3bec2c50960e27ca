"""WebSocket gateway: the same wire protocol as TCP, in text frames.

Browsers cannot open raw sockets, so this listener accepts HTTP upgrade
requests and bridges each WebSocket to the embedded broker through a
`WireSession`.  Non-upgrade GET requests are served from an optional static
directory, which is how the operator dashboard's files reach the browser
without a second server.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import os
import queue
import socket
import threading

from .broker import Broker
from .websocket import (
    WebSocketConnection,
    WebSocketError,
    finish_server_handshake,
    is_upgrade,
    read_http_request,
)
from .wire import WireSession

log = logging.getLogger(__name__)

DEFAULT_WS_PORT = 5676


def _http_response(sock: socket.socket, status: str, body: bytes, ctype: str = "text/plain"):
    head = (
        f"HTTP/1.1 {status}\r\n"
        f"Content-Type: {ctype}\r\n"
        f"Content-Length: {len(body)}\r\n"
        "Connection: close\r\n"
        "\r\n"
    )
    try:
        sock.sendall(head.encode("ascii") + body)
    except OSError:
        pass


class WsGateway:
    def __init__(self, broker: Broker, host: str = "127.0.0.1",
                 port: int = DEFAULT_WS_PORT, static_dir: str | None = None):
        self.broker = broker
        self.static_dir = os.path.abspath(static_dir) if static_dir else None
        self._sock = socket.create_server((host, port))
        self.host, self.port = self._sock.getsockname()[:2]
        self._closing = False
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True,
                                               name="ws-accept")

    def start(self) -> "WsGateway":
        self._accept_thread.start()
        log.info("ws gateway listening on %s:%d", self.host, self.port)
        return self

    def _accept_loop(self):
        while not self._closing:
            try:
                conn, addr = self._sock.accept()
            except OSError:
                return
            threading.Thread(target=self._serve_conn, args=(conn, addr), daemon=True,
                             name=f"ws-conn-{addr[1]}").start()

    def _serve_conn(self, sock: socket.socket, addr):
        try:
            req = read_http_request(sock)
        except WebSocketError as e:
            log.debug("bad request from %s: %s", addr, e)
            sock.close()
            return
        if req is None:
            sock.close()
            return
        method, path, headers, leftover = req
        if is_upgrade(headers):
            try:
                finish_server_handshake(sock, headers)
            except OSError:
                sock.close()
                return
            self._serve_ws(WebSocketConnection(sock, mask_outgoing=False, initial=leftover),
                           addr)
        else:
            self._serve_static(sock, method, path)
            sock.close()

    def _serve_ws(self, ws: WebSocketConnection, addr):
        outq: queue.Queue = queue.Queue()

        def writer():
            try:
                while True:
                    obj = outq.get()
                    if obj is None:
                        return
                    ws.send_text(json.dumps(obj, separators=(",", ":")))
            except WebSocketError:
                pass

        wt = threading.Thread(target=writer, daemon=True, name=f"ws-writer-{addr[1]}")
        wt.start()
        session = WireSession(self.broker, outq.put, peer=f"{addr[0]}:{addr[1]}")
        try:
            while True:
                text = ws.recv_text()
                if text is None:
                    break
                if not text.strip():
                    continue
                if not session.handle_line(text):
                    break
        finally:
            session.close()
            outq.put(None)
            wt.join(timeout=2)
            ws.close()

    def _serve_static(self, sock: socket.socket, method: str, path: str):
        if method != "GET":
            _http_response(sock, "405 Method Not Allowed", b"method not allowed")
            return
        if self.static_dir is None:
            _http_response(sock, "404 Not Found", b"no static content; connect via WebSocket")
            return
        rel = path.split("?", 1)[0]
        if rel.endswith("/"):
            rel += "index.html"
        target = os.path.abspath(os.path.join(self.static_dir, rel.lstrip("/")))
        if not target.startswith(self.static_dir + os.sep) and target != self.static_dir:
            _http_response(sock, "403 Forbidden", b"forbidden")
            return
        if not os.path.isfile(target):
            _http_response(sock, "404 Not Found", b"not found")
            return
        ctype = mimetypes.guess_type(target)[0] or "application/octet-stream"
        with open(target, "rb") as f:
            _http_response(sock, "200 OK", f.read(), ctype)

    def close(self):
        self._closing = True
        try:
            self._sock.close()
        except OSError:
            pass


class WsBusClient:
    """Thin Python-side WebSocket client used by tests to exercise the
    gateway exactly the way the browser dashboard does."""

    def __init__(self, host: str, port: int, name: str):
        from .websocket import client_connect

        self.ws = client_connect(host, port)
        self.name = name
        self._send({"op": "hello", "client": name})

    def _send(self, obj: dict):
        self.ws.send_text(json.dumps(obj, separators=(",", ":")))

    def send_op(self, obj: dict):
        self._send(obj)

    def recv_obj(self, skip_acks: bool = False) -> dict | None:
        while True:
            text = self.ws.recv_text()
            if text is None:
                return None
            obj = json.loads(text)
            if skip_acks and obj.get("op") == "ok":
                continue
            return obj

    def close(self):
        self.ws.close()
