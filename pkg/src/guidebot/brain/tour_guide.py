"""The fifteen-state museum tour conversation table.

The machine idles until a visitor's face sticks around, greets them, and
then serves requests from a listening hub: introductions, exhibit
explanations with a short guided walk, dance and song performances, and
small talk.  A watchdog event (`cmd_timeout`, raised by the host when a
robot command takes too long) routes through a recovery state; low battery
forces a farewell.  Resting is left by a head touch, shutdown by an
explicit request.

Everything here is data.  The engine lives in `fsm`, the event sources in
`orchestrator`.
"""

from __future__ import annotations

from .fsm import FsmDefinition, Transition, fsm_validate

GREETING_LINE = "Welcome to EE Days!"
PROMPT_LINE = "How can I help you?"
INTRO_LINE = ("I am the tour guide for this lab. "
              "I show visitors around and answer questions.")
ANSWER_LINE = "Good question! Let me look into that."
EXHIBIT_LINE = "This exhibit shows a desk scale tour guide robot platform."
FOLLOW_LINE = "Follow me, please."
ARRIVED_LINE = "Here we are!"
RECOVER_LINE = "One moment, I lost my footing."
RESUME_LINE = "Where were we? Ask me anything."
DANCE_LINE = "Watch me dance!"
DANCE_DONE_LINE = "Ta-da!"
SING_LINE = "La la la!"
TICKLE_LINE = "Hee hee, that tickles!"
HELLO_AGAIN_LINE = "Hello again! Lovely to have you here."
WAVE_LINE = "It was lovely showing you around!"
FAREWELL_LINE = "Goodbye! Come back soon."
BATTERY_LINE = "My battery is low, I must rest now."

#: How far the guided walk goes (meters straight ahead).  At the default
#: walking speed this takes longer than the command watchdog allows, so a
#: full tour always exercises the recovery path.
WALK_X_M = 1.2

STATES = (
    "Idle", "Greeting", "Listening", "IntroducingSelf", "Answering",
    "ExplainingExhibit", "GuidingWalk", "Recovering", "Dancing", "Singing",
    "Engaging", "Waving", "Farewell", "Resting", "Shutdown",
)


def _say(text):
    return {"do": "say", "text": text}


def _cmd(method, **args):
    return {"do": "command", "method": method, "args": args}


def _timer(name, ms):
    return {"do": "set_timer", "name": name, "ms": ms}


def _clear(name):
    return {"do": "clear_timer", "name": name}


_RECOVERY = (_say(RECOVER_LINE), _cmd("goToPosture", posture="Stand", speed=0.8))
_REST = (_cmd("rest"),)


def _rows():
    t = Transition
    rows = [
        t("Idle", "face_detected", "Greeting",
          (_say(GREETING_LINE),
           _cmd("goToPosture", posture="StandInit", speed=0.8),
           _timer("greet_hold", 4000))),
        t("Idle", "battery_low", "Farewell", (_say(BATTERY_LINE),)),
        t("Idle", "shutdown_request", "Shutdown"),

        t("Greeting", "greet_hold", "Listening", (_say(PROMPT_LINE),)),
        t("Greeting", "face_lost", "Idle", (_clear("greet_hold"),)),

        t("Listening", "ask_intro", "IntroducingSelf", (_say(INTRO_LINE),)),
        t("Listening", "unknown", "Answering", (_say(ANSWER_LINE),)),
        t("Listening", "ask_exhibit", "ExplainingExhibit", (_say(EXHIBIT_LINE),)),
        t("Listening", "request_dance", "Dancing",
          (_say(DANCE_LINE), _cmd("dancing"))),
        t("Listening", "request_sing", "Singing",
          (_say(SING_LINE), _cmd("singing"))),
        t("Listening", "greet", "Engaging", (_say(HELLO_AGAIN_LINE),)),
        t("Listening", "head_touched", "Engaging", (_say(TICKLE_LINE),)),
        t("Listening", "goodbye", "Waving", (_say(WAVE_LINE), _cmd("goodbye"))),
        t("Listening", "face_lost", "Idle"),
        t("Listening", "battery_low", "Farewell", (_say(BATTERY_LINE),)),
        t("Listening", "shutdown_request", "Shutdown"),

        t("IntroducingSelf", "command_done", "Listening"),
        t("Answering", "command_done", "Listening"),
        t("ExplainingExhibit", "command_done", "GuidingWalk",
          (_say(FOLLOW_LINE), _cmd("moveTo", x=WALK_X_M, y=0.0, theta=0.0))),
        t("GuidingWalk", "command_done", "Listening", (_say(ARRIVED_LINE),)),
        t("Recovering", "command_done", "Listening", (_say(RESUME_LINE),)),
        t("Dancing", "command_done", "Listening", (_say(DANCE_DONE_LINE),)),
        t("Singing", "command_done", "Listening"),
        t("Engaging", "command_done", "Listening"),
        t("Waving", "command_done", "Farewell", (_say(FAREWELL_LINE),)),
        t("Farewell", "command_done", "Resting", _REST),

        t("Resting", "shutdown_request", "Shutdown"),
        t("Resting", "head_touched", "Idle",
          (_cmd("wakeUp"), _cmd("goToPosture", posture="Stand", speed=0.8))),
    ]
    # a stuck or rejected command sends every command-awaiting state through
    # recovery; recovery itself gives up back to Idle, farewell rests anyway
    for state in ("IntroducingSelf", "Answering", "ExplainingExhibit",
                  "GuidingWalk", "Dancing", "Singing", "Engaging", "Waving"):
        rows.append(t(state, "cmd_timeout", "Recovering", _RECOVERY))
        rows.append(t(state, "command_failed", "Recovering", _RECOVERY))
    rows.append(t("Farewell", "cmd_timeout", "Resting", _REST))
    rows.append(t("Farewell", "command_failed", "Resting", _REST))
    rows.append(t("Recovering", "cmd_timeout", "Idle"))
    rows.append(t("Recovering", "command_failed", "Idle"))
    return tuple(rows)


def tour_guide_fsm() -> FsmDefinition:
    defn = FsmDefinition(name="tour-guide", initial="Idle",
                         states=STATES, transitions=_rows())
    fsm_validate(defn)
    return defn
