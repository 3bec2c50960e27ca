"""
The tour-guide decision layer
=============================

A 15-state table drives the robot's conversation: events come from the
sensor feeds (face seen, speech heard, head touched, battery low) and
from command replies; actions are speech and motion commands plus named
timers.  The table is plain data, validated before use.
"""

from guidebot.brain import STATES, fsm_validate, tour_guide_fsm

fsm = tour_guide_fsm()
table = fsm_validate(fsm)  # determinism + reachability or a ValueError
print(f"machine '{fsm.name}': {len(fsm.states)} states, "
      f"{len(fsm.transitions)} transitions, initial '{fsm.initial}'")
print("states:", ", ".join(STATES))

# Which events does Listening understand?
listening = sorted(event for (state, event) in table if state == "Listening")
print("\nListening consumes:", ", ".join(listening))

# Run a short visit end to end on the virtual clock.  The scenario ops
# are the only inputs real visitors have: showing a face, speaking,
# touching, plus an operator event at the end.
from guidebot.harness import parse_steps, play_in_proc

script = [
    '{"t": 50,    "op": "face", "azimuth": 8.0, "elevation": 2.0}',
    '{"t": 4650,  "op": "say", "text": "who are you?"}',
    '{"t": 8050,  "op": "say", "text": "can you dance?"}',
    '{"t": 18050, "op": "say", "text": "goodbye!"}',
    '{"t": 27050, "op": "event", "event": "shutdown_request"}',
    '{"t": 28050, "op": "end"}',
]
result = play_in_proc(parse_steps(script))

print("\ntransition walk:")
for ts, source, event, target in result.transitions:
    if source is None:
        print(f"  [{ts / 1000:7.3f} s] start in {target}")
    else:
        print(f"  [{ts / 1000:7.3f} s] {source} --{event}--> {target}")

print("\nthe robot said:")
for line in result.said:
    print(f"  - {line}")

assert result.final_state == "Shutdown"

# The same machine serializes to JSON, so a different conversation table
# can be loaded at run time (`guidebot brain fsm --fsm FILE`).
import tempfile

from guidebot.brain import dump_fsm, load_fsm

with tempfile.NamedTemporaryFile(suffix=".json", delete=False) as f:
    path = f.name
dump_fsm(fsm, path)
assert load_fsm(path).states == fsm.states
print(f"\nround-tripped the table through {path}")
