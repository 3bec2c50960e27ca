"""One-command walkthrough of the whole stack.

Wires a broker, the simulated avatar, the head tracker, and the decision
layer together, then replays the canonical visitor script while printing
every state transition and spoken line.  The virtual mode finishes in
well under a second of wall time; the real mode runs at true speed and
additionally opens TCP and WebSocket ports so external tools (the CLI,
a dashboard) can watch the same session live.
"""

from __future__ import annotations

import threading
import time

from ..avatar.simulator import AvatarSimulator
from ..brain.orchestrator import BrainOrchestrator
from ..bus.broker import Broker
from ..bus.client import InProcClient
from ..bus.gateway import DEFAULT_WS_PORT, WsGateway
from ..bus.keys import KEY_BRAIN_STATE, KEY_COMMAND
from ..bus.tcp import DEFAULT_PORT, TcpBusServer
from ..clock import RealScheduler, VirtualScheduler
from ..fuzzy.head import HeadTracker
from .scenario import _StepDriver, build_tour_scenario, scenario_duration_ms


def _print_transition(env, out, t0_ms=0):
    p = env.payload
    t = (env.ts - t0_ms) / 1000.0
    if p["from"] is None:
        out(f"[{t:8.3f}s] start in {p['to']}")
    else:
        out(f"[{t:8.3f}s] {p['from']} --{p['event']}--> {p['to']}")


def _print_speech(env, out, t0_ms=0):
    p = env.payload
    if p.get("method") == "say":
        t = (env.ts - t0_ms) / 1000.0
        out(f"[{t:8.3f}s] say: {p['args']['text']!r}")


def run_demo(virtual: bool = False, steps=None, out=print,
             tcp_port: int | None = None, ws_port: int | None = None,
             static_dir: str | None = None) -> int:
    """Run the scripted session; returns a process exit code."""
    steps = steps if steps is not None else build_tour_scenario()
    if virtual:
        return _run_virtual(steps, out)
    return _run_real(steps, out,
                     DEFAULT_PORT if tcp_port is None else tcp_port,
                     DEFAULT_WS_PORT if ws_port is None else ws_port,
                     static_dir)


def _run_virtual(steps, out) -> int:
    sched = VirtualScheduler()
    broker = Broker()
    watcher = InProcClient(broker, "demo", scheduler=sched)
    watcher.subscribe(KEY_BRAIN_STATE, lambda e: _print_transition(e, out))
    watcher.subscribe(KEY_COMMAND, lambda e: _print_speech(e, out))

    sim = AvatarSimulator(InProcClient(broker, "avatar", scheduler=sched), sched).start()
    brain = BrainOrchestrator(InProcClient(broker, "brain", scheduler=sched), sched).start()
    tracker = HeadTracker(InProcClient(broker, "head", scheduler=sched))

    driver = _StepDriver(InProcClient(broker, "scenario", scheduler=sched))
    for step in steps:
        if step.op != "end":
            sched.call_at(step.t, driver.fire, step)
    end_ms = scenario_duration_ms(steps)
    wall0 = time.perf_counter()
    sched.run_until(end_ms)
    wall = time.perf_counter() - wall0

    snap = sim.snapshot()
    out("")
    out(f"simulated {end_ms / 1000.0:.1f}s in {wall:.3f}s wall time")
    out(f"final state: {brain.state}  posture: {snap['posture']}  "
        f"battery: {snap['battery']:.2f}%")
    out(f"head tracker sent {tracker.commands_sent} corrections")
    tracker.stop()
    brain.stop()
    sim.stop()
    return 0 if brain.state == "Shutdown" else 1


def _run_real(steps, out, tcp_port: int, ws_port: int, static_dir) -> int:
    sched = RealScheduler()
    broker = Broker(enforce_namespaces=True)
    server = TcpBusServer(broker, "127.0.0.1", tcp_port).start()
    gateway = WsGateway(broker, "127.0.0.1", ws_port, static_dir=static_dir).start()
    out(f"bus: tcp 127.0.0.1:{server.port}  ws 127.0.0.1:{gateway.port}")

    t0 = sched.now_ms()
    lock = threading.Lock()

    def locked(fn):
        def run(env):
            with lock:
                fn(env)
        return run

    watcher = InProcClient(broker, "demo", scheduler=sched)
    watcher.subscribe(KEY_BRAIN_STATE, locked(lambda e: _print_transition(e, out, t0)))
    watcher.subscribe(KEY_COMMAND, locked(lambda e: _print_speech(e, out, t0)))

    sim = AvatarSimulator(InProcClient(broker, "avatar", scheduler=sched), sched).start()
    brain = BrainOrchestrator(InProcClient(broker, "brain", scheduler=sched), sched).start()
    tracker = HeadTracker(InProcClient(broker, "head", scheduler=sched))

    driver = _StepDriver(InProcClient(broker, "scenario", scheduler=sched))
    for step in steps:
        if step.op != "end":
            sched.call_later(step.t, driver.fire, step)
    end_ms = scenario_duration_ms(steps)

    try:
        brain.done.wait(timeout=end_ms / 1000.0 + 10.0)
    except KeyboardInterrupt:
        out("interrupted")
    finished = brain.done.is_set()

    snap = sim.snapshot()
    out("")
    out(f"final state: {brain.state}  posture: {snap['posture']}  "
        f"battery: {snap['battery']:.2f}%")
    out(f"head tracker sent {tracker.commands_sent} corrections")
    tracker.stop()
    brain.stop()
    sim.stop()
    sched.shutdown()
    gateway.close()
    server.close()
    return 0 if finished else 1
