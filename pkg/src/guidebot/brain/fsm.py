"""Table-driven finite state machine with a validator and JSON form.

A machine is pure data: states, an initial state, and transitions keyed by
(source state, event name).  Each transition carries a list of actions the
host interprets; the engine itself never touches a bus or a clock, which is
what keeps a table testable by exhaustive walking.

Action vocabulary (dicts, one "do" each):
  {"do": "say", "text": s}                       speak s
  {"do": "command", "method": m, "args": {...}}  robot command
  {"do": "set_timer", "name": s, "ms": n}        fire event s after n ms
  {"do": "clear_timer", "name": s}               cancel a pending timer
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass


class FsmError(ValueError):
    """Machine definition failed validation."""


@dataclass(frozen=True)
class Transition:
    source: str
    event: str
    target: str
    actions: tuple = ()


@dataclass(frozen=True)
class FsmDefinition:
    name: str
    initial: str
    states: tuple
    transitions: tuple

    def table(self) -> dict:
        """(source, event) -> Transition; duplicates keep the first."""
        out = {}
        for tr in self.transitions:
            out.setdefault((tr.source, tr.event), tr)
        return out

    def events(self) -> set:
        return {tr.event for tr in self.transitions}


_ACTION_DOS = ("say", "command", "set_timer", "clear_timer")


def _check_action(a, where: str, problems: list):
    if not isinstance(a, dict) or "do" not in a:
        problems.append(f"{where}: action must be an object with a 'do' field")
        return
    do = a["do"]
    if do == "say":
        if not isinstance(a.get("text"), str) or not a["text"]:
            problems.append(f"{where}: say needs nonempty text")
    elif do == "command":
        if not isinstance(a.get("method"), str) or not a["method"]:
            problems.append(f"{where}: command needs a method")
        if not isinstance(a.get("args", {}), dict):
            problems.append(f"{where}: command args must be an object")
    elif do == "set_timer":
        if not isinstance(a.get("name"), str) or not a["name"]:
            problems.append(f"{where}: set_timer needs a name")
        if not isinstance(a.get("ms"), int) or a["ms"] <= 0:
            problems.append(f"{where}: set_timer needs a positive integer ms")
    elif do == "clear_timer":
        if not isinstance(a.get("name"), str) or not a["name"]:
            problems.append(f"{where}: clear_timer needs a name")
    else:
        problems.append(f"{where}: unknown action {do!r}")


def fsm_validate(defn: FsmDefinition) -> dict:
    """Check a definition and return its dispatch table.

    Raises FsmError listing every problem found: duplicate or unknown
    states, nondeterministic rows (same source and event twice), states
    unreachable from the initial state, malformed actions, and timers
    that set an event no transition consumes.
    """
    problems: list[str] = []
    if not defn.states:
        problems.append("no states")
    if len(set(defn.states)) != len(defn.states):
        problems.append("duplicate state names")
    known = set(defn.states)
    if defn.initial not in known:
        problems.append(f"initial state {defn.initial!r} not in states")

    seen_rows = set()
    events = {tr.event for tr in defn.transitions}
    for tr in defn.transitions:
        where = f"({tr.source}, {tr.event})"
        if tr.source not in known:
            problems.append(f"{where}: unknown source state")
        if tr.target not in known:
            problems.append(f"{where}: unknown target state {tr.target!r}")
        if not tr.event:
            problems.append(f"{where}: empty event name")
        if (tr.source, tr.event) in seen_rows:
            problems.append(f"{where}: duplicate row (machine would be ambiguous)")
        seen_rows.add((tr.source, tr.event))
        for a in tr.actions:
            _check_action(a, where, problems)
            if isinstance(a, dict) and a.get("do") == "set_timer":
                if a.get("name") not in events:
                    problems.append(
                        f"{where}: timer {a.get('name')!r} fires an event "
                        "no transition consumes")

    # reachability from the initial state over the transition graph
    if defn.initial in known:
        reached = {defn.initial}
        queue = deque([defn.initial])
        out_edges: dict[str, list] = {}
        for tr in defn.transitions:
            out_edges.setdefault(tr.source, []).append(tr.target)
        while queue:
            for nxt in out_edges.get(queue.popleft(), ()):
                if nxt in known and nxt not in reached:
                    reached.add(nxt)
                    queue.append(nxt)
        for state in defn.states:
            if state not in reached:
                problems.append(f"state {state!r} unreachable from {defn.initial!r}")

    if problems:
        raise FsmError("; ".join(problems))
    return defn.table()


def fsm_dispatch(defn: FsmDefinition, state: str, event: str):
    """The transition taken by `event` in `state`, or None if ignored."""
    return defn.table().get((state, event))


# ------------------------------------------------------------- serialization

def fsm_to_obj(defn: FsmDefinition) -> dict:
    return {
        "name": defn.name,
        "initial": defn.initial,
        "states": list(defn.states),
        "transitions": [
            {"from": tr.source, "event": tr.event, "to": tr.target,
             "actions": [dict(a) for a in tr.actions]}
            for tr in defn.transitions
        ],
    }


def fsm_from_obj(obj: dict) -> FsmDefinition:
    try:
        transitions = tuple(
            Transition(
                source=t["from"], event=t["event"], target=t["to"],
                actions=tuple(dict(a) for a in t.get("actions", ())),
            )
            for t in obj.get("transitions", ())
        )
        return FsmDefinition(
            name=obj.get("name", "machine"),
            initial=obj["initial"],
            states=tuple(obj["states"]),
            transitions=transitions,
        )
    except (KeyError, TypeError) as e:
        raise FsmError(f"malformed machine object: {e}") from None


def dump_fsm(defn: FsmDefinition, path: str):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(fsm_to_obj(defn), f, indent=2, sort_keys=False)
        f.write("\n")


def load_fsm(path: str) -> FsmDefinition:
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise FsmError(f"machine file is not valid JSON: {e}") from None
    defn = fsm_from_obj(obj)
    fsm_validate(defn)
    return defn
