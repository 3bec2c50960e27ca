"""Decision layer: a validated state machine plus its bus-facing host.

`fsm` is the generic table engine, `tour_guide` the shipped fifteen-state
conversation, `intents` the keyword utterance parser, and `orchestrator`
the host that feeds bus telemetry through the table and executes its
actions as robot commands.
"""

from .fsm import (
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
from .intents import INTENTS, Intent, parse_intent
from .orchestrator import BrainOrchestrator
from .tour_guide import STATES, tour_guide_fsm

__all__ = [
    "BrainOrchestrator",
    "FsmDefinition",
    "FsmError",
    "INTENTS",
    "Intent",
    "STATES",
    "Transition",
    "dump_fsm",
    "fsm_dispatch",
    "fsm_from_obj",
    "fsm_to_obj",
    "fsm_validate",
    "load_fsm",
    "parse_intent",
    "tour_guide_fsm",
]
