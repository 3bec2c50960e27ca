"""Round-trip latency measurement over the bus.

The loopback bench is a strict ping-pong: one client subscribes to a bench
key, publishes a numbered message, waits for its own delivery, and only
then sends the next.  That measures per-message round-trip time through
the full wire path (encode, TCP, routing, fan-out, decode) with no queuing
in front of the sample.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass

from ..bus.broker import Broker
from ..bus.tcp import TcpBusClient, TcpBusServer
from ..clock import RealScheduler

BENCH_KEY = "lumen.bench.loopback"


def percentile(samples_sorted, q: float) -> float:
    """Nearest-rank percentile of pre-sorted data."""
    if not samples_sorted:
        raise ValueError("no samples")
    rank = max(1, math.ceil(q * len(samples_sorted)))
    return samples_sorted[rank - 1]


@dataclass(frozen=True)
class LatencyStats:
    n: int
    p50_ms: float
    p95_ms: float
    max_ms: float
    mean_ms: float

    @classmethod
    def from_samples(cls, samples_ms) -> "LatencyStats":
        if not samples_ms:
            raise ValueError("no samples")
        data = sorted(samples_ms)
        return cls(
            n=len(data),
            p50_ms=percentile(data, 0.50),
            p95_ms=percentile(data, 0.95),
            max_ms=data[-1],
            mean_ms=sum(data) / len(data),
        )

    def render(self) -> str:
        return (f"n={self.n}  p50={self.p50_ms:.3f} ms  "
                f"p95={self.p95_ms:.3f} ms  max={self.max_ms:.3f} ms  "
                f"mean={self.mean_ms:.3f} ms")


class BenchError(RuntimeError):
    pass


def run_loopback_bench(addr: str | None = None, n: int = 1000,
                       key: str = BENCH_KEY,
                       per_message_timeout_s: float = 5.0) -> LatencyStats:
    """Measure n publish-to-delivery round trips; returns the stats.

    With `addr` the bench joins an existing broker over TCP.  Without it, a
    private broker and TCP server are spun up on an ephemeral port so the
    numbers reflect the local loopback path.
    """
    if n <= 0:
        raise ValueError("sample count must be positive")

    server = None
    if addr is None:
        server = TcpBusServer(Broker(), "127.0.0.1", 0).start()
        addr = f"127.0.0.1:{server.port}"

    client = TcpBusClient(addr, "bench", scheduler=RealScheduler())
    got = threading.Event()
    latest = {}

    def on_echo(env):
        latest["n"] = env.payload.get("n")
        got.set()

    try:
        client.subscribe(key, on_echo)
        samples = []
        for i in range(n):
            got.clear()
            t0 = time.perf_counter()
            client.publish(key, {"n": i})
            if not got.wait(per_message_timeout_s):
                raise BenchError(f"message {i} was not delivered within "
                                 f"{per_message_timeout_s}s")
            dt_ms = (time.perf_counter() - t0) * 1000.0
            if latest["n"] != i:
                raise BenchError(f"out-of-order delivery: sent {i}, got {latest['n']}")
            samples.append(dt_ms)
        return LatencyStats.from_samples(samples)
    finally:
        client.close()
        if server is not None:
            server.close()
