"""Command line entry points for every component.

    guidebot bus serve --port 5675 --ws-port 5676
    guidebot avatar run --bus 127.0.0.1:5675
    guidebot brain head --bus 127.0.0.1:5675
    guidebot brain fsm --bus 127.0.0.1:5675
    guidebot scenario play tour.jsonl [--bus ADDR] [--golden FILE]
    guidebot scenario diff GOT WANT
    guidebot bench latency -n 1000 [--bus ADDR]
    guidebot demo [--virtual-clock]

The bus address defaults to the BUS_ADDR environment variable, then to
127.0.0.1:5675.  Exit codes: 0 success, 1 runtime failure (unreachable
bus, failed run), 2 usage or validation error (also used by argparse).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import threading

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

DEFAULT_BUS = "127.0.0.1:5675"


def _resolve_bus(value: str | None) -> str:
    return value or os.environ.get("BUS_ADDR") or DEFAULT_BUS


def _wait_forever():
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        pass


def _packaged_data(name: str) -> str | None:
    from importlib.resources import files

    candidate = files("guidebot.harness").joinpath("data", name)
    return str(candidate) if candidate.is_file() else None


def _resolve_scenario_path(value: str) -> str | None:
    if os.path.exists(value):
        return value
    return _packaged_data(value)


# ------------------------------------------------------------------ commands

def cmd_bus_serve(args) -> int:
    from .bus.broker import Broker
    from .bus.gateway import WsGateway
    from .bus.tcp import TcpBusServer

    broker = Broker(enforce_namespaces=not args.open_namespaces)
    try:
        server = TcpBusServer(broker, args.host, args.port).start()
        gateway = WsGateway(broker, args.host, args.ws_port,
                            static_dir=args.static).start()
    except OSError as e:
        print(f"cannot bind: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"bus listening on tcp://{server.host}:{server.port} "
          f"and ws://{gateway.host}:{gateway.port}/ws")
    if args.static:
        print(f"serving static files from {args.static}")
    _wait_forever()
    gateway.close()
    server.close()
    return EXIT_OK


def cmd_avatar_run(args) -> int:
    from .avatar.simulator import AvatarSimulator
    from .bus.tcp import BusConnectionError, TcpBusClient
    from .clock import RealScheduler

    addr = _resolve_bus(args.bus)
    sched = RealScheduler()
    try:
        bus = TcpBusClient(addr, "avatar", scheduler=sched)
    except BusConnectionError as e:
        print(e, file=sys.stderr)
        return EXIT_RUNTIME
    sim = AvatarSimulator(bus, sched).start()
    print(f"avatar attached to {addr}; streaming telemetry")
    _wait_forever()
    sim.stop()
    sched.shutdown()
    bus.close()
    return EXIT_OK


def cmd_brain_head(args) -> int:
    from .bus.tcp import BusConnectionError, TcpBusClient
    from .clock import RealScheduler
    from .fuzzy.head import HeadControllerConfig, HeadTracker

    addr = _resolve_bus(args.bus)
    cfg = HeadControllerConfig(parameter_set=args.params, gain=args.gain,
                               deadband_px=args.deadband)
    try:
        bus = TcpBusClient(addr, "head", scheduler=RealScheduler())
    except BusConnectionError as e:
        print(e, file=sys.stderr)
        return EXIT_RUNTIME
    tracker = HeadTracker(bus, cfg)
    print(f"head tracker attached to {addr} "
          f"(parameters: {args.params}, gain {args.gain})")
    _wait_forever()
    tracker.stop()
    bus.close()
    return EXIT_OK


def cmd_brain_fsm(args) -> int:
    from .brain.fsm import FsmError, load_fsm
    from .brain.orchestrator import BrainOrchestrator
    from .bus.tcp import BusConnectionError, TcpBusClient
    from .clock import RealScheduler

    defn = None
    if args.fsm:
        try:
            defn = load_fsm(args.fsm)
        except (OSError, FsmError) as e:
            print(f"cannot load machine: {e}", file=sys.stderr)
            return EXIT_USAGE
    addr = _resolve_bus(args.bus)
    sched = RealScheduler()
    try:
        bus = TcpBusClient(addr, "brain", scheduler=sched)
    except BusConnectionError as e:
        print(e, file=sys.stderr)
        return EXIT_RUNTIME
    brain = BrainOrchestrator(bus, sched, defn).start()
    print(f"decision layer attached to {addr}; "
          f"machine {brain.fsm.name!r} starting in {brain.state}")
    try:
        brain.done.wait()
    except KeyboardInterrupt:
        pass
    brain.stop()
    sched.shutdown()
    bus.close()
    return EXIT_OK


def cmd_scenario_play(args) -> int:
    from .harness.scenario import (
        ScenarioError,
        diff_transcripts,
        load_scenario,
        play_in_proc,
        play_over_bus,
        read_transcript,
        write_transcript,
    )

    path = _resolve_scenario_path(args.file)
    if path is None:
        print(f"no such scenario: {args.file}", file=sys.stderr)
        return EXIT_USAGE
    try:
        steps = load_scenario(path)
    except ScenarioError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE

    if args.bus:
        result = play_over_bus(steps, _resolve_bus(args.bus))
    else:
        result = play_in_proc(steps)

    for ts, source, event, target in result.transitions:
        if source is None:
            print(f"[{ts / 1000.0:8.3f}s] start in {target}")
        else:
            print(f"[{ts / 1000.0:8.3f}s] {source} --{event}--> {target}")
    print(f"final state: {result.final_state}; "
          f"{len(result.transcript)} transcript lines")

    if args.out:
        write_transcript(result.transcript, args.out)
        print(f"transcript written to {args.out}")

    if args.golden:
        golden_path = _resolve_scenario_path(args.golden)
        if golden_path is None:
            print(f"no such golden transcript: {args.golden}", file=sys.stderr)
            return EXIT_USAGE
        problems = diff_transcripts(result.transcript,
                                    read_transcript(golden_path))
        if problems:
            print("transcript DIFFERS from golden:", file=sys.stderr)
            for p in problems:
                print(p, file=sys.stderr)
            return EXIT_USAGE
        print("transcript matches golden")
    return EXIT_OK


def cmd_scenario_diff(args) -> int:
    from .harness.scenario import diff_transcripts, read_transcript

    try:
        got = read_transcript(args.got)
        want = read_transcript(args.want)
    except OSError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    problems = diff_transcripts(got, want)
    if problems:
        for p in problems:
            print(p)
        return EXIT_USAGE
    print("transcripts match")
    return EXIT_OK


def cmd_bench_latency(args) -> int:
    from .bus.tcp import BusConnectionError
    from .harness.bench import BenchError, run_loopback_bench

    if args.n <= 0:
        print("sample count must be positive", file=sys.stderr)
        return EXIT_USAGE
    addr = args.bus or os.environ.get("BUS_ADDR")
    try:
        stats = run_loopback_bench(addr=addr, n=args.n)
    except (BusConnectionError, BenchError) as e:
        print(e, file=sys.stderr)
        return EXIT_RUNTIME
    where = addr or "private loopback broker"
    print(f"round-trip latency via {where}:")
    print(f"  {stats.render()}")
    return EXIT_OK


def cmd_demo(args) -> int:
    from .harness.demo import run_demo

    return run_demo(virtual=args.virtual_clock, tcp_port=args.port,
                    ws_port=args.ws_port, static_dir=args.static)


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guidebot",
        description="Desk-scale tour-guide robot platform.")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bus", help="message broker")
    bus_sub = p.add_subparsers(dest="bus_command", required=True)
    p = bus_sub.add_parser("serve", help="run the broker with TCP and WebSocket fronts")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=5675)
    p.add_argument("--ws-port", type=int, default=5676)
    p.add_argument("--static", metavar="DIR", default=None,
                   help="also serve this directory over HTTP on the ws port")
    p.add_argument("--open-namespaces", action="store_true",
                   help="accept any first pattern word, not just avatar/lumen")
    p.set_defaults(fn=cmd_bus_serve)

    p = sub.add_parser("avatar", help="simulated robot")
    avatar_sub = p.add_subparsers(dest="avatar_command", required=True)
    p = avatar_sub.add_parser("run", help="attach the simulator to a bus")
    p.add_argument("--bus", metavar="HOST:PORT", default=None)
    p.set_defaults(fn=cmd_avatar_run)

    p = sub.add_parser("brain", help="controllers and decision layer")
    brain_sub = p.add_subparsers(dest="brain_command", required=True)
    p = brain_sub.add_parser("head", help="fuzzy face-tracking head controller")
    p.add_argument("--bus", metavar="HOST:PORT", default=None)
    p.add_argument("--params", choices=("corrected", "as_printed"),
                   default="corrected")
    p.add_argument("--gain", type=float, default=1.0)
    p.add_argument("--deadband", type=float, default=5.0, metavar="PX")
    p.set_defaults(fn=cmd_brain_head)
    p = brain_sub.add_parser("fsm", help="tour-guide decision layer")
    p.add_argument("--bus", metavar="HOST:PORT", default=None)
    p.add_argument("--fsm", metavar="FILE", default=None,
                   help="custom machine definition (JSON)")
    p.set_defaults(fn=cmd_brain_fsm)

    p = sub.add_parser("scenario", help="scripted session replay")
    scen_sub = p.add_subparsers(dest="scenario_command", required=True)
    p = scen_sub.add_parser("play", help="replay a scenario file")
    p.add_argument("file", help="scenario path, or the name of a packaged one "
                               "(tour.jsonl)")
    p.add_argument("--bus", metavar="HOST:PORT", default=None,
                   help="drive an external stack instead of the in-process one")
    p.add_argument("--golden", metavar="FILE", default=None,
                   help="compare the transcript against this recording")
    p.add_argument("--out", metavar="FILE", default=None,
                   help="write the transcript here")
    p.set_defaults(fn=cmd_scenario_play)
    p = scen_sub.add_parser("diff", help="compare two recorded transcripts")
    p.add_argument("got")
    p.add_argument("want")
    p.set_defaults(fn=cmd_scenario_diff)

    p = sub.add_parser("bench", help="performance measurements")
    bench_sub = p.add_subparsers(dest="bench_command", required=True)
    p = bench_sub.add_parser("latency", help="bus round-trip latency")
    p.add_argument("-n", type=int, default=1000, metavar="COUNT")
    p.add_argument("--bus", metavar="HOST:PORT", default=None,
                   help="bench an existing bus (default: private broker)")
    p.set_defaults(fn=cmd_bench_latency)

    p = sub.add_parser("demo", help="scripted end-to-end session")
    p.add_argument("--virtual-clock", action="store_true",
                   help="run instantly on the deterministic clock")
    p.add_argument("--port", type=int, default=None, help="TCP port (real mode)")
    p.add_argument("--ws-port", type=int, default=None,
                   help="WebSocket port (real mode)")
    p.add_argument("--static", metavar="DIR", default=None,
                   help="serve this directory on the ws port (real mode)")
    p.set_defaults(fn=cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return args.fn(args)
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
