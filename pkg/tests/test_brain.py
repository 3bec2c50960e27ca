"""State machine engine, intent parser, and the orchestrator wiring."""

import json

import pytest

from guidebot.avatar.simulator import AvatarSimulator, SimulatorConfig
from guidebot.brain.fsm import (
    FsmDefinition,
    FsmError,
    Transition,
    dump_fsm,
    fsm_dispatch,
    fsm_from_obj,
    fsm_to_obj,
    fsm_validate,
    load_fsm,
)
from guidebot.brain.intents import INTENTS, parse_intent
from guidebot.brain.orchestrator import BrainOrchestrator
from guidebot.brain.tour_guide import STATES, tour_guide_fsm
from guidebot.bus.broker import Broker
from guidebot.bus.client import InProcClient
from guidebot.bus.keys import (
    KEY_BRAIN_CONTROL,
    KEY_BRAIN_EVENT,
    KEY_BRAIN_STATE,
    KEY_COMMAND,
    KEY_FACE,
    KEY_SPEECH,
)
from guidebot.clock import VirtualScheduler


def _machine(**kw):
    base = dict(
        name="m", initial="A", states=("A", "B"),
        transitions=(Transition("A", "go", "B"), Transition("B", "back", "A")),
    )
    base.update(kw)
    return FsmDefinition(**base)


class TestFsmValidate:
    def test_minimal_machine_passes(self):
        table = fsm_validate(_machine())
        assert table[("A", "go")].target == "B"

    def test_initial_must_exist(self):
        with pytest.raises(FsmError, match="initial"):
            fsm_validate(_machine(initial="Z"))

    def test_duplicate_states_rejected(self):
        with pytest.raises(FsmError, match="duplicate state"):
            fsm_validate(_machine(states=("A", "B", "A")))

    def test_unknown_endpoints_rejected(self):
        with pytest.raises(FsmError, match="unknown source"):
            fsm_validate(_machine(transitions=(
                Transition("Z", "go", "B"), Transition("A", "go", "B"),
                Transition("B", "back", "A"))))
        with pytest.raises(FsmError, match="unknown target"):
            fsm_validate(_machine(transitions=(
                Transition("A", "go", "Z"), Transition("A", "go2", "B"),
                Transition("B", "back", "A"))))

    def test_ambiguous_row_rejected(self):
        with pytest.raises(FsmError, match="ambiguous"):
            fsm_validate(_machine(transitions=(
                Transition("A", "go", "B"),
                Transition("A", "go", "A"),
                Transition("B", "back", "A"))))

    def test_unreachable_state_rejected(self):
        with pytest.raises(FsmError, match="unreachable"):
            fsm_validate(_machine(states=("A", "B", "C")))

    def test_bad_actions_rejected(self):
        bad = [
            ({"do": "say"}, "say needs"),
            ({"do": "command"}, "needs a method"),
            ({"do": "set_timer", "name": "t"}, "positive integer"),
            ({"do": "set_timer", "name": "", "ms": 5}, "needs a name"),
            ({"do": "warp"}, "unknown action"),
            ({}, "'do' field"),
        ]
        for action, message in bad:
            defn = _machine(transitions=(
                Transition("A", "go", "B", (action,)),
                Transition("B", "back", "A")))
            with pytest.raises(FsmError, match=message):
                fsm_validate(defn)

    def test_timer_must_be_consumed(self):
        defn = _machine(transitions=(
            Transition("A", "go", "B",
                       ({"do": "set_timer", "name": "lost", "ms": 100},)),
            Transition("B", "back", "A")))
        with pytest.raises(FsmError, match="no transition consumes"):
            fsm_validate(defn)

    def test_validator_lists_every_problem(self):
        defn = _machine(initial="Z", states=("A", "B", "B"))
        with pytest.raises(FsmError) as err:
            fsm_validate(defn)
        assert "initial" in str(err.value) and "duplicate" in str(err.value)

    def test_dispatch(self):
        defn = _machine()
        assert fsm_dispatch(defn, "A", "go").target == "B"
        assert fsm_dispatch(defn, "A", "nonsense") is None
        assert fsm_dispatch(defn, "B", "go") is None


class TestFsmSerialization:
    def test_roundtrip_object(self):
        defn = tour_guide_fsm()
        again = fsm_from_obj(fsm_to_obj(defn))
        assert again == defn

    def test_roundtrip_file(self, tmp_path):
        path = tmp_path / "machine.json"
        dump_fsm(tour_guide_fsm(), str(path))
        loaded = load_fsm(str(path))
        assert loaded.table().keys() == tour_guide_fsm().table().keys()

    def test_load_rejects_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        with pytest.raises(FsmError, match="not valid JSON"):
            load_fsm(str(path))

    def test_load_rejects_invalid_machine(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(
            {"initial": "A", "states": ["A", "B"], "transitions": []}))
        with pytest.raises(FsmError, match="unreachable"):
            load_fsm(str(path))

    def test_from_obj_rejects_missing_fields(self):
        with pytest.raises(FsmError, match="malformed"):
            fsm_from_obj({"states": ["A"]})


class TestTourGuideTable:
    def test_fifteen_states(self):
        defn = tour_guide_fsm()
        assert len(defn.states) == 15
        assert defn.states == STATES
        assert defn.initial == "Idle"

    def test_greeting_literals(self):
        defn = tour_guide_fsm()
        greet = defn.table()[("Idle", "face_detected")]
        says = [a["text"] for a in greet.actions if a["do"] == "say"]
        assert says == ["Welcome to EE Days!"]
        prompt = defn.table()[("Greeting", "greet_hold")]
        assert prompt.actions[0]["text"] == "How can I help you?"

    def test_every_intent_consumed_in_listening(self):
        table = tour_guide_fsm().table()
        for intent in INTENTS:
            if intent == "goodbye":
                assert table[("Listening", intent)].target == "Waving"
            else:
                assert ("Listening", intent) in table

    def test_performances_watchdogged(self):
        table = tour_guide_fsm().table()
        for state in ("Dancing", "Singing", "GuidingWalk", "Waving"):
            assert table[(state, "cmd_timeout")].target in ("Recovering", "Resting")


class TestIntents:
    @pytest.mark.parametrize("text,intent", [
        ("Can you dance?", "request_dance"),
        ("I love DANCING!", "request_dance"),
        ("sing me a song", "request_sing"),
        ("Who are you?", "ask_intro"),
        ("please introduce yourself", "ask_intro"),
        ("what's your name?", "ask_intro"),
        ("tell me about this exhibit", "ask_exhibit"),
        ("what project is this", "ask_exhibit"),
        ("bye!", "goodbye"),
        ("Goodbye, robot", "goodbye"),
        ("see you later", "goodbye"),
        ("Hello there", "greet"),
        ("hey", "greet"),
        ("what's the weather like", "unknown"),
        ("", "unknown"),
    ])
    def test_keywords(self, text, intent):
        parsed = parse_intent(text)
        assert parsed.name == intent
        assert parsed.confidence == (0.0 if intent == "unknown" else 1.0)

    def test_priority_request_beats_greeting(self):
        assert parse_intent("hi, can you dance for me?").name == "request_dance"
        assert parse_intent("hello, sing something").name == "request_sing"

    def test_word_boundaries(self):
        assert parse_intent("abundance of caution").name == "unknown"
        assert parse_intent("this is history").name == "unknown"
        assert parse_intent("shiny things").name == "unknown"

    def test_non_string(self):
        assert parse_intent(None).name == "unknown"
        assert parse_intent(42).name == "unknown"


# ----------------------------------------------------------- orchestrator rig

class BrainRig:
    def __init__(self, fsm=None, sim_config=None, **brain_kw):
        self.sched = VirtualScheduler()
        self.broker = Broker()
        self.sim = AvatarSimulator(
            InProcClient(self.broker, "avatar", scheduler=self.sched),
            self.sched, sim_config).start()
        self.probe = InProcClient(self.broker, "probe", scheduler=self.sched)
        self.states = []
        self.events = []
        self.commands = []
        self.probe.subscribe(KEY_BRAIN_STATE, self.states.append)
        self.probe.subscribe(KEY_BRAIN_EVENT, self.events.append)
        self.probe.subscribe(KEY_COMMAND, self.commands.append)
        self.brain = BrainOrchestrator(
            InProcClient(self.broker, "brain", scheduler=self.sched),
            self.sched, fsm, **brain_kw).start()

    def say(self, text):
        self.probe.publish(KEY_SPEECH, {"text": text})

    def face(self, azimuth, elevation=0.0):
        self.probe.publish(KEY_FACE, {"azimuth": azimuth, "elevation": elevation})

    def run_to_state(self, state, limit_ms, step_ms=50):
        while self.sched.now_ms() < limit_ms:
            if self.brain.state == state:
                return True
            self.sched.run_for(step_ms)
        return self.brain.state == state

    def transitions(self):
        return [(e.payload["from"], e.payload["event"], e.payload["to"])
                for e in self.states]


@pytest.fixture
def rig():
    return BrainRig()


class TestOrchestrator:
    def test_face_debounce_needs_three_frames(self, rig):
        rig.face(5.0)
        rig.sched.run_until(250)       # two camera frames
        rig.face(None)
        rig.sched.run_until(2000)
        assert rig.brain.state == "Idle"
        assert all(e.payload["event"] not in ("face_detected",)
                   for e in rig.events)

    def test_face_detected_starts_greeting(self, rig):
        rig.face(5.0)
        rig.sched.run_until(300)       # third consecutive frame with a face
        assert rig.brain.state == "Greeting"
        methods = [c.payload["method"] for c in rig.commands]
        assert methods == ["say", "goToPosture"]
        assert rig.commands[0].payload["args"]["text"] == "Welcome to EE Days!"

    def test_face_lost_needs_ten_empty_frames(self, rig):
        rig.face(5.0)
        assert rig.run_to_state("Listening", 6000)
        rig.face(None)
        lost_at = rig.sched.now_ms()
        rig.sched.run_for(900)
        assert rig.brain.state == "Listening"
        rig.sched.run_for(1200)
        assert rig.brain.state == "Idle"
        lost = [e for e in rig.events if e.payload["event"] == "face_lost"]
        assert lost and lost[0].ts - lost_at >= 1000

    def test_face_lost_in_greeting_clears_timer(self, rig):
        rig.face(5.0)
        rig.sched.run_until(300)
        assert rig.brain.state == "Greeting"
        rig.face(None)
        rig.sched.run_until(10_000)
        assert rig.brain.state == "Idle"
        # the greeting hold timer must not fire after the visitor left
        assert ("Greeting", "greet_hold", "Listening") not in rig.transitions()

    def test_walk_times_out_into_recovery(self, rig):
        rig.face(5.0)
        assert rig.run_to_state("Listening", 6000)
        rig.say("tell me about the exhibit")
        assert rig.run_to_state("GuidingWalk", 12_000)
        walk_entered = rig.sched.now_ms()
        assert rig.run_to_state("Recovering", 25_000)
        assert rig.sched.now_ms() - walk_entered == pytest.approx(10_000, abs=100)
        assert rig.run_to_state("Listening", 30_000)
        # the stale walk reply must not have produced a second transition
        assert ("GuidingWalk", "command_done", "Listening") not in rig.transitions()
        done_events = [e.payload for e in rig.events
                       if e.payload["event"] == "command_done"]
        assert all(e["state"] != "GuidingWalk" for e in done_events)

    def test_dance_request_round_trip(self, rig):
        rig.face(5.0)
        assert rig.run_to_state("Listening", 6000)
        rig.say("dance!")
        assert rig.brain.state == "Dancing"
        assert rig.run_to_state("Listening", 20_000)
        texts = [t for _, t in rig.sim.transcript]
        assert "Watch me dance!" in texts and "Ta-da!" in texts

    def test_intent_in_wrong_state_ignored(self, rig):
        rig.say("dance for me")
        rig.sched.run_until(1000)
        assert rig.brain.state == "Idle"
        ev = [e.payload for e in rig.events if e.payload["event"] == "request_dance"]
        assert ev == [{"seq": ev[0]["seq"], "event": "request_dance",
                       "state": "Idle", "handled": False}]

    def test_head_touch_engages(self, rig):
        rig.face(5.0)
        assert rig.run_to_state("Listening", 6000)
        rig.sim.touch("head_front")
        rig.sched.run_for(50)
        assert rig.brain.state == "Engaging"
        assert rig.run_to_state("Listening", 10_000)

    def test_head_touch_wakes_from_resting(self, rig):
        rig.face(5.0)
        assert rig.run_to_state("Listening", 6000)
        rig.say("goodbye")
        assert rig.run_to_state("Resting", 30_000)
        rig.sched.run_for(3000)        # let the rest command finish
        assert rig.sim.snapshot()["resting"] is True
        rig.sim.touch("head_rear")
        rig.sched.run_for(50)
        assert rig.brain.state == "Idle"
        rig.sched.run_for(3000)
        assert rig.sim.snapshot()["resting"] is False

    def test_battery_low_forces_farewell(self):
        rig = BrainRig(sim_config=SimulatorConfig(initial_battery=14.0))
        rig.sched.run_until(6000)      # first battery sample arrives at 5 s
        assert rig.brain.state in ("Farewell", "Resting")
        assert rig.run_to_state("Resting", 20_000)
        low = [e for e in rig.events if e.payload["event"] == "battery_low"]
        assert len(low) == 1           # latched after it is handled

    def test_shutdown_request_from_control_key(self, rig):
        rig.probe.publish(KEY_BRAIN_CONTROL, {"event": "shutdown_request"})
        assert rig.brain.state == "Shutdown"
        assert rig.brain.done.is_set()

    def test_nothing_injected_after_shutdown(self, rig):
        rig.brain.request_shutdown()
        n_events = len(rig.events)
        rig.say("dance")
        rig.face(5.0)
        rig.sched.run_until(3000)
        assert len(rig.events) == n_events
        assert rig.brain.state == "Shutdown"

    def test_state_feed_seq_and_initial_announcement(self, rig):
        rig.face(5.0)
        assert rig.run_to_state("Listening", 6000)
        seqs = [e.payload["seq"] for e in rig.states]
        assert seqs == list(range(len(seqs)))
        first = rig.states[0].payload
        assert first == {"seq": 0, "from": None, "event": None, "to": "Idle"}
        assert rig.states[1].payload["event"] == "face_detected"

    def test_event_feed_seq_gap_free(self, rig):
        rig.face(5.0)
        assert rig.run_to_state("Listening", 6000)
        rig.say("dance")
        rig.sched.run_for(500)
        seqs = [e.payload["seq"] for e in rig.events]
        assert seqs == list(range(seqs[0], seqs[0] + len(seqs)))

    def test_command_failed_routes_through_recovery(self):
        defn = FsmDefinition(
            name="t", initial="A", states=("A", "B", "C"),
            transitions=(
                Transition("A", "go", "B", (
                    {"do": "command", "method": "setAngles",
                     "args": {"angles": {"HeadYaw": 500.0}}},)),
                Transition("B", "command_failed", "C"),
                Transition("B", "command_done", "A"),
            ))
        rig = BrainRig(fsm=defn)
        rig.probe.publish(KEY_BRAIN_CONTROL, {"event": "go"})
        rig.sched.run_until(1000)
        assert rig.brain.state == "C"

    def test_custom_timer_fires_named_event(self):
        defn = FsmDefinition(
            name="t", initial="A", states=("A", "B", "C"),
            transitions=(
                Transition("A", "go", "B", ({"do": "set_timer",
                                             "name": "tick", "ms": 500},)),
                Transition("B", "tick", "C"),
            ))
        rig = BrainRig(fsm=defn)
        rig.probe.publish(KEY_BRAIN_CONTROL, {"event": "go"})
        rig.sched.run_until(499)
        assert rig.brain.state == "B"
        rig.sched.run_until(500)
        assert rig.brain.state == "C"

    def test_full_tour_covers_all_states(self, rig):
        visited = {"Idle"}

        def drive():
            rig.face(10.0, 5.0)
            assert rig.run_to_state("Listening", 6000)
            rig.say("who are you?")
            assert rig.run_to_state("Listening", 15_000, step_ms=10)
            rig.say("hmm, interesting")
            assert rig.brain.state == "Answering"
            assert rig.run_to_state("Listening", 20_000, step_ms=10)
            rig.say("show me the exhibit")
            assert rig.run_to_state("Recovering", 45_000)
            assert rig.run_to_state("Listening", 50_000, step_ms=10)
            rig.say("dance for us")
            assert rig.run_to_state("Listening", 65_000, step_ms=10)
            rig.say("sing a song")
            assert rig.run_to_state("Listening", 80_000, step_ms=10)
            rig.sim.touch("head_front")
            assert rig.run_to_state("Listening", 90_000, step_ms=10)
            rig.say("hello again")
            assert rig.brain.state == "Engaging"
            assert rig.run_to_state("Listening", 95_000, step_ms=10)
            rig.say("goodbye!")
            assert rig.run_to_state("Resting", 120_000)
            rig.sched.run_for(3000)
            rig.brain.request_shutdown()

        drive()
        for env in rig.states:
            visited.add(env.payload["to"])
        assert visited == set(STATES)
        assert rig.brain.state == "Shutdown"
