"""Minimal WebSocket (RFC 6455) over blocking sockets.

Supports exactly what the gateway needs: the HTTP upgrade handshake, text
frames, close, and ping/pong.  No extensions, no subprotocols.  Fragmented
messages are reassembled.  Client-to-server frames are masked as the RFC
requires; server frames are not.
"""

from __future__ import annotations

import base64
import hashlib
import os
import socket
import struct
import threading

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_BINARY = 0x2
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA

MAX_FRAME = 4 * 1024 * 1024


class WebSocketError(ConnectionError):
    pass


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def read_http_request(sock: socket.socket):
    """Read one HTTP request head.  Returns (method, path, headers, leftover)
    with lower-cased header names, or None on EOF before any bytes.
    `leftover` is whatever arrived after the blank line (e.g. an eager
    client's first frame) and must be fed back to the frame reader."""
    data = b""
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            if not data:
                return None
            raise WebSocketError("connection closed mid-request")
        data += chunk
        if len(data) > 65536:
            raise WebSocketError("request head too large")
    head, _, rest = data.partition(b"\r\n\r\n")
    lines = head.decode("latin-1").split("\r\n")
    try:
        method, path, _version = lines[0].split(" ", 2)
    except ValueError:
        raise WebSocketError(f"bad request line: {lines[0]!r}") from None
    headers = {}
    for line in lines[1:]:
        name, _, value = line.partition(":")
        headers[name.strip().lower()] = value.strip()
    return method, path, headers, rest


def is_upgrade(headers: dict) -> bool:
    return ("websocket" in headers.get("upgrade", "").lower()
            and "sec-websocket-key" in headers)


def finish_server_handshake(sock: socket.socket, headers: dict):
    key = headers["sec-websocket-key"]
    resp = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept_key(key)}\r\n"
        "\r\n"
    )
    sock.sendall(resp.encode("ascii"))


class _FrameReader:
    """Blocking byte source that honors bytes already pulled off the socket."""

    def __init__(self, sock: socket.socket, initial: bytes = b""):
        self._sock = sock
        self._buf = initial

    def recv_exact(self, n: int) -> bytes:
        while len(self._buf) < n:
            chunk = self._sock.recv(max(4096, n - len(self._buf)))
            if not chunk:
                raise WebSocketError("connection closed mid-frame")
            self._buf += chunk
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def read_frame(self):
        """Returns (fin, opcode, payload)."""
        b1, b2 = self.recv_exact(2)
        fin = bool(b1 & 0x80)
        opcode = b1 & 0x0F
        masked = bool(b2 & 0x80)
        length = b2 & 0x7F
        if length == 126:
            (length,) = struct.unpack(">H", self.recv_exact(2))
        elif length == 127:
            (length,) = struct.unpack(">Q", self.recv_exact(8))
        if length > MAX_FRAME:
            raise WebSocketError(f"frame too large: {length}")
        mask = self.recv_exact(4) if masked else None
        payload = self.recv_exact(length) if length else b""
        if mask:
            payload = bytes(c ^ mask[i % 4] for i, c in enumerate(payload))
        return fin, opcode, payload


def write_frame(sock: socket.socket, opcode: int, payload: bytes, mask: bool):
    b1 = 0x80 | opcode
    length = len(payload)
    if length < 126:
        head = struct.pack(">BB", b1, (0x80 if mask else 0) | length)
    elif length < 65536:
        head = struct.pack(">BBH", b1, (0x80 if mask else 0) | 126, length)
    else:
        head = struct.pack(">BBQ", b1, (0x80 if mask else 0) | 127, length)
    if mask:
        key = os.urandom(4)
        payload = bytes(c ^ key[i % 4] for i, c in enumerate(payload))
        sock.sendall(head + key + payload)
    else:
        sock.sendall(head + payload)


class WebSocketConnection:
    """A connected endpoint after the handshake.  `recv_text` runs on one
    thread; sends are lock-protected and safe from any thread."""

    def __init__(self, sock: socket.socket, mask_outgoing: bool, initial: bytes = b""):
        self._sock = sock
        self._reader = _FrameReader(sock, initial)
        self._mask = mask_outgoing
        self._wlock = threading.Lock()
        self._closed = False

    def recv_text(self) -> str | None:
        """Next text message, or None once the connection is closed.
        Handles ping/pong and close internally."""
        parts: list[bytes] = []
        while True:
            try:
                fin, opcode, payload = self._reader.read_frame()
            except (WebSocketError, OSError):
                return None
            if opcode == OP_PING:
                self._send_frame(OP_PONG, payload)
                continue
            if opcode == OP_PONG:
                continue
            if opcode == OP_CLOSE:
                if not self._closed:
                    self._send_frame(OP_CLOSE, payload[:2])
                    self._closed = True
                return None
            if opcode in (OP_TEXT, OP_BINARY) or (opcode == OP_CONT and parts):
                parts.append(payload)
                if fin:
                    try:
                        return b"".join(parts).decode("utf-8")
                    except UnicodeDecodeError:
                        return None
            else:
                return None

    def send_text(self, text: str):
        self._send_frame(OP_TEXT, text.encode("utf-8"))

    def _send_frame(self, opcode: int, payload: bytes):
        with self._wlock:
            try:
                write_frame(self._sock, opcode, payload, self._mask)
            except OSError as e:
                raise WebSocketError(str(e)) from e

    def close(self):
        if not self._closed:
            self._closed = True
            try:
                self._send_frame(OP_CLOSE, struct.pack(">H", 1000))
            except WebSocketError:
                pass
        try:
            self._sock.close()
        except OSError:
            pass


def client_connect(host: str, port: int, path: str = "/", timeout: float = 5.0) -> WebSocketConnection:
    sock = socket.create_connection((host, port), timeout=timeout)
    key = base64.b64encode(os.urandom(16)).decode("ascii")
    req = (
        f"GET {path} HTTP/1.1\r\n"
        f"Host: {host}:{port}\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Key: {key}\r\n"
        "Sec-WebSocket-Version: 13\r\n"
        "\r\n"
    )
    sock.sendall(req.encode("ascii"))
    data = b""
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            raise WebSocketError("server closed during handshake")
        data += chunk
    head, _, leftover = data.partition(b"\r\n\r\n")
    lines = head.decode("latin-1").split("\r\n")
    if " 101 " not in lines[0] + " ":
        raise WebSocketError(f"handshake rejected: {lines[0]}")
    accept = None
    for line in lines[1:]:
        name, _, value = line.partition(":")
        if name.strip().lower() == "sec-websocket-accept":
            accept = value.strip()
    if accept != accept_key(key):
        raise WebSocketError("bad Sec-WebSocket-Accept")
    sock.settimeout(None)
    return WebSocketConnection(sock, mask_outgoing=True, initial=leftover)
