"""Top-level behavior guarantees, one verdict line each in the run summary.

Every test here checks a whole-system property end to end: controller
against an independent oracle, closed-loop convergence, stream integrity
under load, wire latency, golden-transcript reproducibility, and command
safety under fuzzing.  Fine-grained unit coverage lives in the sibling
test modules; this file is the shipping checklist.
"""

import itertools
import math
import random
import string
import time
from importlib.resources import files

import numpy as np
import pytest

from guidebot.avatar.joints import JOINT_SPECS
from guidebot.avatar.simulator import AvatarSimulator
from guidebot.avatar.state import POSTURES
from guidebot.brain import STATES, fsm_validate, tour_guide_fsm
from guidebot.bus import BindingPattern, Broker, InProcClient, RoutingKey, topic_match
from guidebot.bus.keys import (
    KEY_BATTERY,
    KEY_CAMERA,
    KEY_COMMAND,
    KEY_JOINTS,
    KEY_REPLY,
    KEY_SONAR,
    KEY_TACTILE,
)
from guidebot.clock import VirtualScheduler
from guidebot.fuzzy import HeadControllerConfig, flc_step, head_tracking_loop
from guidebot.fuzzy.head import build_system
from guidebot.harness import (
    TOUR_WALK,
    build_tour_scenario,
    play_in_proc,
    run_loopback_bench,
)
from oracles import MamdaniOracle, topic_match_oracle

# ------------------------------------------------------------ fuzzy control

# oracle mirror of the corrected parameter set, stated independently
ORACLE_VARS = {
    "FaceXLoc": {"universe": (0, 320),
                 "terms": {"negative": (0, 80), "zero": (160, 50), "positive": (320, 80)}},
    "FaceYLoc": {"universe": (0, 240),
                 "terms": {"negative": (0, 70), "zero": (120, 40), "positive": (240, 70)}},
    "AngleX": {"universe": (-45, 45),
               "terms": {"negative": (-15, 10), "zero": (0, 10), "positive": (15, 10)}},
    "AngleY": {"universe": (-25, 25),
               "terms": {"negative": (-7, 6), "zero": (0, 6), "positive": (7, 6)}},
}
ORACLE_RULES = [
    ({"FaceXLoc": "negative"}, ("AngleX", "positive")),
    ({"FaceXLoc": "positive"}, ("AngleX", "negative")),
    ({"FaceXLoc": "zero"}, ("AngleX", "zero")),
    ({"FaceYLoc": "negative"}, ("AngleY", "positive")),
    ({"FaceYLoc": "positive"}, ("AngleY", "negative")),
    ({"FaceYLoc": "zero"}, ("AngleY", "zero")),
]


@pytest.mark.acceptance(
    "fuzzy: pipeline matches brute-force fine-grid oracle within 1e-4 deg "
    "on a 33x25 lattice in under 5 s"
)
def test_oracle_equivalence_lattice():
    t0 = time.monotonic()
    oracle = MamdaniOracle(ORACLE_VARS, ORACLE_RULES, grid_step=0.001)
    production = build_system("corrected", step=0.01)
    xs = np.linspace(0, 320, 33)
    ys = np.linspace(0, 240, 25)
    yaw_oracle = {x: oracle.evaluate("AngleX", {"FaceXLoc": x}) for x in xs}
    pitch_oracle = {y: oracle.evaluate("AngleY", {"FaceYLoc": y}) for y in ys}
    worst = 0.0
    for x in xs:
        for y in ys:
            got_yaw = production.evaluate("AngleX", {"FaceXLoc": float(x)})
            got_pitch = production.evaluate("AngleY", {"FaceYLoc": float(y)})
            worst = max(worst, abs(got_yaw - yaw_oracle[x]), abs(got_pitch - pitch_oracle[y]))
    elapsed = time.monotonic() - t0
    assert worst < 1e-4, f"max deviation {worst}"
    assert elapsed < 5.0, f"took {elapsed:.2f}s"


@pytest.mark.acceptance(
    "fuzzy: centered input returns exact zero; outputs antisymmetric about "
    "frame center to 1e-9"
)
def test_symmetry():
    assert flc_step(160, 120) == (0.0, 0.0)
    cfg = HeadControllerConfig(deadband_px=0.0)
    dyaw, dpitch = flc_step(160, 120, cfg)
    assert abs(dyaw) < 1e-9 and abs(dpitch) < 1e-9
    for d in (1, 13, 42, 99, 160):
        assert flc_step(160 + d, 120, cfg)[0] == pytest.approx(
            -flc_step(160 - d, 120, cfg)[0], abs=1e-9)
    for d in (1, 13, 42, 99, 120):
        assert flc_step(160, 120 + d, cfg)[1] == pytest.approx(
            -flc_step(160, 120 - d, cfg)[1], abs=1e-9)


@pytest.mark.acceptance(
    "fuzzy: six-rule table and both parameter sets match their reference tables"
)
def test_table_fidelity():
    from guidebot.fuzzy.head import PARAMS_AS_PRINTED, PARAMS_CORRECTED, RULES

    # six rules, exact pairs
    expected = {
        (("FaceXLoc", "negative"), ("AngleX", "positive")),
        (("FaceXLoc", "positive"), ("AngleX", "negative")),
        (("FaceXLoc", "zero"), ("AngleX", "zero")),
        (("FaceYLoc", "negative"), ("AngleY", "positive")),
        (("FaceYLoc", "positive"), ("AngleY", "negative")),
        (("FaceYLoc", "zero"), ("AngleY", "zero")),
    }
    assert {(r.antecedent, r.consequent) for r in RULES} == expected
    assert len(RULES) == 6

    # verbatim column values for the as-printed set
    verbatim = {
        "FaceXLoc": {"negative": (0, 80), "positive": (320, 80), "zero": (160, 50)},
        "FaceYLoc": {"negative": (0, 70), "positive": (120, 40), "zero": (240, 70)},
        "AngleX": {"negative": (-15, 10), "positive": (0, 10), "zero": (15, 10)},
        "AngleY": {"negative": (-7, 6), "positive": (0, 6), "zero": (7, 6)},
    }
    assert PARAMS_AS_PRINTED == verbatim

    # the corrected set differs only by the zero<->positive relabel on the
    # three variables whose printed centers are not monotone
    assert PARAMS_CORRECTED["FaceXLoc"] == PARAMS_AS_PRINTED["FaceXLoc"]
    for var in ("FaceYLoc", "AngleX", "AngleY"):
        assert PARAMS_CORRECTED[var]["negative"] == PARAMS_AS_PRINTED[var]["negative"]
        assert PARAMS_CORRECTED[var]["zero"] == PARAMS_AS_PRINTED[var]["positive"]
        assert PARAMS_CORRECTED[var]["positive"] == PARAMS_AS_PRINTED[var]["zero"]
    for var, terms in PARAMS_CORRECTED.items():
        assert terms["negative"][0] < terms["zero"][0] < terms["positive"][0]


@pytest.mark.acceptance(
    "control: 9-point grid (az +-25 deg, el +-18 deg) recenters to <=10 px "
    "within 40 camera ticks, monotone after tick 3, under 10 s"
)
def test_closed_loop_tracking_grid():
    t0 = time.monotonic()
    for az, el in itertools.product((-25.0, 0.0, 25.0), (-18.0, 0.0, 18.0)):
        sched = VirtualScheduler()
        broker = Broker()
        sim = AvatarSimulator(
            InProcClient(broker, "avatar", scheduler=sched), sched).start()
        tracker = head_tracking_loop(InProcClient(broker, "head", scheduler=sched))

        errors = []

        def on_camera(env):
            face = env.payload["face"]
            assert face is not None, "face left the field of view"
            errors.append(math.hypot(face["x"] - 160.0, face["y"] - 120.0))

        probe = InProcClient(broker, "probe", scheduler=sched)
        probe.subscribe(KEY_CAMERA, on_camera)

        sim.set_visitor_face(az, el)
        sched.run_until(4000)  # 40 camera ticks at 10 Hz

        assert len(errors) == 40
        assert errors[-1] <= 10.0, (
            f"az={az} el={el}: error after 40 ticks is {errors[-1]:.2f} px")
        for i in range(3, 39):
            assert errors[i + 1] <= errors[i] + 1e-6, (
                f"az={az} el={el}: error rose at tick {i + 1}: "
                f"{errors[i]:.3f} -> {errors[i + 1]:.3f}")

        tracker.stop()
        sim.stop()
    assert time.monotonic() - t0 < 10.0


# ------------------------------------------------------------------- broker

WORDS = ["a", "b", "c"]
PATTERN_SYMBOLS = ["a", "b", "c", "*", "#"]


@pytest.mark.acceptance(
    "broker: topic matcher agrees with brute-force oracle on every "
    "pattern/key pair up to 4 words (exhaustive)"
)
def test_exhaustive_match_against_oracle():
    def all_keys(max_words):
        for n in range(1, max_words + 1):
            yield from (".".join(ws) for ws in itertools.product(WORDS, repeat=n))

    def valid_patterns(max_words):
        for n in range(1, max_words + 1):
            for ws in itertools.product(PATTERN_SYMBOLS, repeat=n):
                yield ".".join(ws)

    patterns = list(valid_patterns(4))
    keys = list(all_keys(4))
    checked = 0
    for ps in patterns:
        p = BindingPattern.parse(ps)
        for ks in keys:
            got = topic_match(p, RoutingKey.parse(ks))
            want = topic_match_oracle(ps, ks)
            assert got == want, f"pattern={ps!r} key={ks!r} got={got} want={want}"
            checked += 1
    assert checked == len(patterns) * len(keys)


@pytest.mark.acceptance(
    "broker: five sensor streams run 30 s with zero loss, zero duplication, "
    "per-stream FIFO, while commands execute"
)
def test_five_streams_integrity_under_load():
    sched = VirtualScheduler()
    broker = Broker()
    sim = AvatarSimulator(
        InProcClient(broker, "avatar", scheduler=sched), sched).start()
    probe = InProcClient(broker, "probe", scheduler=sched)

    streams = {KEY_CAMERA: [], KEY_JOINTS: [], KEY_SONAR: [],
               KEY_BATTERY: [], KEY_TACTILE: []}
    replies = []
    for key, seqs in streams.items():
        probe.subscribe(key, lambda env, s=seqs: s.append(env.payload["seq"]))
    probe.subscribe(KEY_REPLY, lambda env: replies.append(env.payload))

    # tactile is event-driven; pulse it once a second
    for k in range(1, 31):
        sched.call_at(k * 1000, sim.touch, "head_front", k % 2 == 1)

    # keep the executor busy for most of the window
    commands = [
        (500, "moveTo", {"x": 0.5, "y": 0.0, "theta": 0.0}),       # 5 s
        (6000, "say", {"text": "streaming while walking works"}),  # ~1.2 s
        (9000, "goToPosture", {"posture": "Sit", "speed": 0.5}),   # 1.5 s
        (12000, "dancing", {}),                                    # 8 s
        (21000, "singing", {}),                                    # 9 s
    ]
    for at, method, args in commands:
        payload = {"id": f"load-{at}", "method": method, "args": args}
        sched.call_at(at, probe.publish, KEY_COMMAND, payload, "command")

    sched.run_until(30_000)
    sim.stop()

    expected = {KEY_CAMERA: 300, KEY_JOINTS: 300, KEY_SONAR: 150,
                KEY_BATTERY: 6, KEY_TACTILE: 30}
    for key, want_n in expected.items():
        got = streams[key]
        assert got == list(range(want_n)), (
            f"{key}: {len(got)} messages, first gap near "
            f"{next((i for i, s in enumerate(got) if s != i), None)}")

    assert [r["id"] for r in replies] == [f"load-{at}" for at, _, _ in commands]
    assert all(r["ok"] for r in replies)


@pytest.mark.acceptance(
    "bus: 1000-message loopback round trip has p50 < 5 ms and p95 < 20 ms"
)
def test_loopback_latency():
    stats = run_loopback_bench(n=1000)
    assert stats.n == 1000
    assert stats.p50_ms < 5.0, stats.render()
    assert stats.p95_ms < 20.0, stats.render()


# -------------------------------------------------------------------- brain

@pytest.mark.acceptance(
    "brain: 15-state machine validates; canonical tour visits every state "
    "in order and matches the golden transcript byte-for-byte across 3 "
    "runs, in under 30 s"
)
def test_tour_golden_reproducibility():
    t0 = time.monotonic()

    table = fsm_validate(tour_guide_fsm())
    assert len(STATES) == 15
    assert set(s for s, _ in table) <= set(STATES)

    golden = files("guidebot.harness").joinpath(
        "data/tour.golden.jsonl").read_text(encoding="utf-8").splitlines()
    steps = build_tour_scenario()

    for run in range(3):
        result = play_in_proc(steps)
        walk = [t[3] for t in result.transitions]
        assert walk == list(TOUR_WALK), f"run {run}: walk deviated: {walk}"
        assert set(walk) == set(STATES)  # all 15 visited
        assert result.transcript == golden, (
            f"run {run}: transcript deviates from golden")

    assert time.monotonic() - t0 < 30.0


# ------------------------------------------------------------------- avatar

def _fuzz_commands(rng, n):
    """A mix of valid, boundary, and malformed commands, ids unique."""
    joints = sorted(JOINT_SPECS)
    postures = sorted(POSTURES)
    garbage = itertools.cycle([
        lambda: ("jump", {}),
        lambda: ("say", 42),
        lambda: ("say", {"text": 7}),
        lambda: ("goToPosture", {"posture": "Moonwalk", "speed": 0.5}),
        lambda: ("goToPosture", {"posture": "Stand", "speed": 0.0}),
        lambda: ("moveTo", {"x": "far", "y": 0, "theta": 0}),
        lambda: ("setAngles", {"angles": {"Tail": 10.0}}),
    ])
    out = []
    for i in range(n):
        roll = rng.randrange(1000)
        if roll < 450 or roll >= 940 and roll < 998:
            picked = rng.sample(joints, rng.randrange(1, 4))
            angles = {j: rng.uniform(*JOINT_SPECS[j][:2]) for j in picked}
            method, args = "setAngles", {"angles": angles}
        elif roll < 600:
            j = rng.choice(joints)
            lo, hi = JOINT_SPECS[j][:2]
            bad = hi + rng.uniform(0.001, 400) if rng.random() < 0.5 else \
                lo - rng.uniform(0.001, 400)
            method, args = "setAngles", {"angles": {j: bad}}
        elif roll < 700:
            method, args = next(garbage)()
        elif roll < 800:
            text = "".join(rng.choices(string.ascii_lowercase, k=rng.randrange(1, 4)))
            method, args = "say", {"text": text}
        elif roll < 870:
            method, args = "moveTo", {"x": rng.uniform(-0.03, 0.03),
                                      "y": rng.uniform(-0.03, 0.03),
                                      "theta": rng.uniform(-5, 5)}
        elif roll < 920:
            method, args = "goToPosture", {"posture": rng.choice(postures),
                                           "speed": 1.0}
        elif roll < 940:
            method, args = "wakeUp", {}
        else:
            method, args = rng.choice(("dancing", "singing", "goodbye")), {}
        out.append({"id": f"fz-{i}", "method": method, "args": args})
    return out


@pytest.mark.acceptance(
    "avatar: 10,000 fuzzed commands never violate a joint limit and each "
    "gets exactly one reply; moveTo(0.2,0,0) lands within 1e-6 m"
)
def test_simulator_contracts_under_fuzz():
    n = 10_000
    rng = random.Random(20260816)
    sched = VirtualScheduler()
    broker = Broker()
    sim = AvatarSimulator(
        InProcClient(broker, "avatar", scheduler=sched), sched).start()
    probe = InProcClient(broker, "probe", scheduler=sched)

    replies = []
    violations = []

    def check_joints(env):
        for name, value in env.payload["angles"].items():
            lo, hi, _speed = JOINT_SPECS[name]
            if not lo - 1e-9 <= value <= hi + 1e-9:
                violations.append((env.payload["seq"], name, value))

    probe.subscribe(KEY_REPLY, lambda env: replies.append(env.payload))
    probe.subscribe(KEY_JOINTS, check_joints)

    for cmd in _fuzz_commands(rng, n):
        probe.publish(KEY_COMMAND, cmd, kind="command")
    # uncorrelatable commands (no id) must be dropped without a reply
    probe.publish(KEY_COMMAND, {"method": "say", "args": {"text": "hi"}},
                  kind="command")
    probe.publish(KEY_COMMAND, {"id": "", "method": "wakeUp", "args": {}},
                  kind="command")

    deadline = 0
    while len(replies) < n and deadline < 3_600_000:
        deadline += 60_000
        sched.run_until(deadline)

    assert len(replies) == n, f"{len(replies)} replies for {n} commands"
    assert [r["id"] for r in replies] == [f"fz-{i}" for i in range(n)]
    assert violations == [], violations[:5]
    snap = sim.snapshot()
    for name, value in snap["angles"].items():
        lo, hi, _speed = JOINT_SPECS[name]
        assert lo - 1e-9 <= value <= hi + 1e-9
    sim.stop()

    # exact walk landing, from rest pose, on a fresh rig
    sched2 = VirtualScheduler()
    broker2 = Broker()
    sim2 = AvatarSimulator(
        InProcClient(broker2, "avatar", scheduler=sched2), sched2).start()
    done = []
    probe2 = InProcClient(broker2, "probe", scheduler=sched2)
    probe2.subscribe(KEY_REPLY, lambda env: done.append(env.payload))
    probe2.publish(KEY_COMMAND, {"id": "walk", "method": "moveTo",
                                 "args": {"x": 0.2, "y": 0.0, "theta": 0.0}},
                   kind="command")
    sched2.run_until(10_000)
    assert done and done[0]["ok"]
    x, y, heading = sim2.snapshot()["torso"]
    assert abs(x - 0.2) < 1e-6 and abs(y) < 1e-6 and abs(heading) < 1e-6
    sim2.stop()
