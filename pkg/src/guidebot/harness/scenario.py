"""Scripted scenario replay with recorded, diffable transcripts.

A scenario is JSONL: one step per line, each with a time `t` in ms and an
`op`.  Steps feed the visitor side of a session (a face appearing, speech,
a head touch, control events), and the runner records everything the brain
and avatar answer on the decision and reply keys.  Under the virtual clock
a scenario is fully deterministic, so a recorded transcript can be frozen
and compared byte for byte against later runs.

Step ops:
  {"t": ms, "op": "face", "azimuth": deg|null, "elevation": deg}
  {"t": ms, "op": "say", "text": s}
  {"t": ms, "op": "touch", "sensor": s}
  {"t": ms, "op": "event", "event": s}    injected via the control key
  {"t": ms, "op": "end"}                  stop recording at this time

Transcript lines are canonical JSON objects (sorted keys, no spaces):
  {"id": ..., "key": ..., "kind": ..., "payload": {...}, "ts": ...}
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..avatar.simulator import AvatarSimulator, SimulatorConfig
from ..brain.orchestrator import BrainOrchestrator
from ..bus.broker import Broker
from ..bus.client import InProcClient
from ..bus.envelope import envelope_to_obj
from ..bus.keys import KEY_BRAIN_CONTROL, KEY_FACE, KEY_REPLY, KEY_SPEECH, KEY_TACTILE
from ..clock import VirtualScheduler

#: Keys a transcript records, as binding patterns.
RECORDED_PATTERNS = ("lumen.brain.state", "lumen.brain.event", KEY_REPLY)

_OPS = ("face", "say", "touch", "event", "end")


@dataclass(frozen=True)
class Step:
    t: int
    op: str
    args: dict


class ScenarioError(ValueError):
    """Scenario file failed validation."""


def parse_steps(lines, where: str = "scenario") -> list[Step]:
    steps: list[Step] = []
    last_t = 0
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"{where}:{i}: not valid JSON: {e}") from None
        if not isinstance(obj, dict):
            raise ScenarioError(f"{where}:{i}: step must be an object")
        t = obj.get("t")
        op = obj.get("op")
        if not isinstance(t, int) or t < 0:
            raise ScenarioError(f"{where}:{i}: t must be a nonnegative integer ms")
        if t < last_t:
            raise ScenarioError(f"{where}:{i}: steps must be time-ordered")
        last_t = t
        if op not in _OPS:
            raise ScenarioError(f"{where}:{i}: unknown op {op!r}")
        args = {k: v for k, v in obj.items() if k not in ("t", "op")}
        if op == "say" and not isinstance(args.get("text"), str):
            raise ScenarioError(f"{where}:{i}: say needs text")
        if op == "event" and not isinstance(args.get("event"), str):
            raise ScenarioError(f"{where}:{i}: event needs an event name")
        if op == "face" and "azimuth" not in args:
            raise ScenarioError(f"{where}:{i}: face needs azimuth (null to clear)")
        steps.append(Step(t, op, args))
    if not steps:
        raise ScenarioError(f"{where}: no steps")
    return steps


def load_scenario(path: str) -> list[Step]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_steps(f, where=path)


def dump_scenario(steps, path: str):
    with open(path, "w", encoding="utf-8") as f:
        for s in steps:
            obj = {"t": s.t, "op": s.op}
            obj.update(s.args)
            f.write(json.dumps(obj, sort_keys=False) + "\n")


def scenario_duration_ms(steps) -> int:
    for s in steps:
        if s.op == "end":
            return s.t
    return steps[-1].t + 1000


def transcript_line(env) -> str:
    obj = envelope_to_obj(env)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class _StepDriver:
    """Publishes scenario steps on the bus at their scheduled times."""

    def __init__(self, bus):
        self.bus = bus
        self._touch_seq = 0

    def fire(self, step: Step):
        if step.op == "face":
            self.bus.publish(KEY_FACE, {
                "azimuth": step.args.get("azimuth"),
                "elevation": step.args.get("elevation", 0.0),
            })
        elif step.op == "say":
            self.bus.publish(KEY_SPEECH, {"text": step.args["text"]})
        elif step.op == "touch":
            seq = self._touch_seq
            self._touch_seq += 1
            self.bus.publish(KEY_TACTILE, {
                "seq": seq,
                "sensor": step.args.get("sensor", "head_front"),
                "pressed": True,
            })
        elif step.op == "event":
            self.bus.publish(KEY_BRAIN_CONTROL, {"event": step.args["event"]})


@dataclass
class ScenarioResult:
    transcript: list[str]
    transitions: list[tuple]
    final_state: str
    said: list[str]
    duration_ms: int


def play_in_proc(steps, sim_config: SimulatorConfig | None = None,
                 fsm=None) -> ScenarioResult:
    """Run a scenario on a self-contained virtual-clock stack.

    Builds a fresh broker, simulator, and decision layer, replays the steps,
    and returns the recorded transcript.  Two calls with the same inputs
    return identical transcripts, line for line.
    """
    sched = VirtualScheduler()
    broker = Broker()
    recorder = InProcClient(broker, "recorder", scheduler=sched)
    transcript: list[str] = []
    transitions: list[tuple] = []

    def record(env):
        transcript.append(transcript_line(env))
        if env.key.render() == "lumen.brain.state":
            p = env.payload
            transitions.append((env.ts, p["from"], p["event"], p["to"]))

    for pattern in RECORDED_PATTERNS:
        recorder.subscribe(pattern, record)

    sim = AvatarSimulator(
        InProcClient(broker, "avatar", scheduler=sched), sched, sim_config).start()
    brain = BrainOrchestrator(
        InProcClient(broker, "brain", scheduler=sched), sched, fsm).start()
    driver = _StepDriver(InProcClient(broker, "scenario", scheduler=sched))

    for step in steps:
        if step.op != "end":
            sched.call_at(step.t, driver.fire, step)
    end_ms = scenario_duration_ms(steps)
    sched.run_until(end_ms)

    result = ScenarioResult(
        transcript=transcript,
        transitions=transitions,
        final_state=brain.state,
        said=[text for _, text in sim.transcript],
        duration_ms=end_ms,
    )
    brain.stop()
    sim.stop()
    return result


def play_over_bus(steps, addr: str) -> ScenarioResult:
    """Replay a scenario against an already-running stack over TCP.

    The avatar and brain are expected to be attached to the broker at
    `addr`.  Timing rides the wall clock, so transcripts are NOT
    reproducible byte for byte; use the in-process mode for golden runs.
    """
    import threading

    from ..bus.tcp import TcpBusClient
    from ..clock import RealScheduler

    sched = RealScheduler()
    client = TcpBusClient(addr, "scenario", scheduler=sched)
    transcript: list[str] = []
    transitions: list[tuple] = []
    lock = threading.Lock()

    def record(env):
        with lock:
            transcript.append(transcript_line(env))
            if env.key.render() == "lumen.brain.state":
                p = env.payload
                transitions.append((env.ts, p["from"], p["event"], p["to"]))

    for pattern in RECORDED_PATTERNS:
        client.subscribe(pattern, record)

    driver = _StepDriver(client)
    done = threading.Event()
    for step in steps:
        if step.op != "end":
            sched.call_later(step.t, driver.fire, step)
    end_ms = scenario_duration_ms(steps)
    sched.call_later(end_ms, done.set)
    done.wait(timeout=end_ms / 1000.0 + 30.0)

    with lock:
        said = [env_obj["payload"].get("detail", "")
                for env_obj in map(json.loads, transcript)
                if env_obj["key"] == KEY_REPLY]
        final = transitions[-1][3] if transitions else "?"
        result = ScenarioResult(
            transcript=list(transcript),
            transitions=list(transitions),
            final_state=final,
            said=said,
            duration_ms=end_ms,
        )
    sched.shutdown()
    client.close()
    return result


# ------------------------------------------------------------------ diffing

def diff_transcripts(got: list, want: list, limit: int = 10) -> list:
    """Human-readable mismatch lines between two transcripts; [] when equal."""
    problems = []
    for i, (g, w) in enumerate(zip(got, want), start=1):
        if g != w:
            problems.append(f"line {i}:\n  got:  {g}\n  want: {w}")
            if len(problems) >= limit:
                problems.append("... (stopping here)")
                return problems
    if len(got) != len(want):
        problems.append(f"length differs: got {len(got)} lines, want {len(want)}")
        for i in range(min(len(got), len(want)), min(len(got), len(want)) + 3):
            if i < len(got):
                problems.append(f"extra line {i + 1}: {got[i]}")
            if i < len(want):
                problems.append(f"missing line {i + 1}: {want[i]}")
    return problems


def read_transcript(path: str) -> list:
    with open(path, "r", encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.strip()]


def write_transcript(lines, path: str):
    with open(path, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line + "\n")


# ------------------------------------------------------------ canonical tour

def build_tour_scenario() -> list:
    """The full-coverage visitor script: every state of the shipped
    conversation table is visited exactly in the canonical order.

    Step times sit on x50 ms so they never coincide with the 100 ms
    telemetry instants, keeping the event interleave trivially stable.
    """
    raw = [
        (50, "face", {"azimuth": 10.0, "elevation": 5.0}),
        (4650, "say", {"text": "Who are you?"}),
        (8050, "say", {"text": "hmm, interesting"}),
        (9650, "say", {"text": "show me the exhibit"}),
        (28050, "say", {"text": "dance for us"}),
        (37450, "say", {"text": "sing a song"}),
        (47150, "touch", {"sensor": "head_front"}),
        (48250, "say", {"text": "hello again"}),
        (49850, "say", {"text": "goodbye!"}),
        (58750, "event", {"event": "shutdown_request"}),
        (59950, "end", {}),
    ]
    return [Step(t, op, args) for t, op, args in raw]


#: State walk the canonical tour must produce, in order.
TOUR_WALK = (
    "Idle", "Greeting", "Listening", "IntroducingSelf", "Listening",
    "Answering", "Listening", "ExplainingExhibit", "GuidingWalk",
    "Recovering", "Listening", "Dancing", "Listening", "Singing",
    "Listening", "Engaging", "Listening", "Engaging", "Listening",
    "Waving", "Farewell", "Resting", "Shutdown",
)
