"""Event sources, action execution, and command supervision for a machine.

The orchestrator is the glue between bus traffic and the pure transition
table: it turns telemetry into debounced events (a face must persist before
`face_detected` fires, and be gone a full second before `face_lost`), parses
utterances into intents, supervises every issued command with a watchdog,
and publishes a transition feed for dashboards.

Events injected here, beyond the intent names:
  face_detected / face_lost   camera debounce edges
  battery_low                 first telemetry sample under the threshold
  head_touched                tactile press on a head sensor
  command_done / command_failed   reply to the awaited command id
  cmd_timeout                 watchdog gave up on the awaited command
  <timer name>                a table-set timer elapsed
  anything                    via the control key, for operator tooling
"""

from __future__ import annotations

import logging
import threading

from ..bus.keys import (
    KEY_BATTERY,
    KEY_BRAIN_CONTROL,
    KEY_BRAIN_EVENT,
    KEY_BRAIN_STATE,
    KEY_CAMERA,
    KEY_COMMAND,
    KEY_REPLY,
    KEY_SPEECH,
    KEY_TACTILE,
)
from .fsm import FsmDefinition, fsm_validate
from .intents import parse_intent
from .tour_guide import tour_guide_fsm

log = logging.getLogger(__name__)


class BrainOrchestrator:
    def __init__(self, bus, scheduler, fsm: FsmDefinition | None = None, *,
                 watchdog_ms: int = 10_000, battery_low_pct: float = 15.0,
                 face_on_frames: int = 3, face_off_frames: int = 10,
                 issuer: str = "brain"):
        self.bus = bus
        self.scheduler = scheduler
        self.fsm = fsm or tour_guide_fsm()
        self.table = fsm_validate(self.fsm)
        self.state = self.fsm.initial
        self.watchdog_ms = int(watchdog_ms)
        self.battery_low_pct = float(battery_low_pct)
        self.face_on_frames = int(face_on_frames)
        self.face_off_frames = int(face_off_frames)
        self.issuer = issuer
        self.done = threading.Event()

        self._lock = threading.RLock()
        self._subs: list[str] = []
        self._timers: dict[str, object] = {}
        self._watchdog = None
        self._awaited_id: str | None = None
        self._cmd_n = 0
        self._state_seq = 0
        self._event_seq = 0
        self._on_streak = 0
        self._off_streak = 0
        self._face_present = False
        self._battery_latched = False

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> "BrainOrchestrator":
        self._publish_state(None, None, self.state)
        self._subs = [
            self.bus.subscribe(KEY_CAMERA, self._on_camera),
            self.bus.subscribe(KEY_BATTERY, self._on_battery),
            self.bus.subscribe(KEY_TACTILE, self._on_tactile),
            self.bus.subscribe(KEY_REPLY, self._on_reply),
            self.bus.subscribe(KEY_SPEECH, self._on_speech),
            self.bus.subscribe(KEY_BRAIN_CONTROL, self._on_control),
        ]
        return self

    def stop(self):
        for sid in self._subs:
            try:
                self.bus.unsubscribe(sid)
            except Exception:
                pass
        self._subs = []
        with self._lock:
            for handle in self._timers.values():
                handle.cancel()
            self._timers.clear()
            self._cancel_watchdog()

    # -- the one entry point ---------------------------------------------------

    def inject(self, event: str) -> bool:
        """Feed one event through the table; True when a transition fired."""
        with self._lock:
            if self.done.is_set():
                return False
            tr = self.table.get((self.state, event))
            self._publish_event(event, tr is not None)
            if tr is None:
                log.debug("%s ignored in %s", event, self.state)
                return False
            source = self.state
            self.state = tr.target
            # leaving a state obsoletes whatever it was waiting on
            self._cancel_watchdog()
            self._awaited_id = None
            self._publish_state(source, event, tr.target)
            log.info("%s --%s--> %s", source, event, tr.target)
            self._run_actions(tr.actions)
            if self.state == "Shutdown":
                self._enter_shutdown()
            return True

    def request_shutdown(self) -> bool:
        return self.inject("shutdown_request")

    # -- actions ----------------------------------------------------------------

    def _run_actions(self, actions):
        last_cmd = None
        for a in actions:
            do = a["do"]
            if do == "say":
                last_cmd = self._send_command("say", {"text": a["text"]})
            elif do == "command":
                last_cmd = self._send_command(a["method"], dict(a.get("args", {})))
            elif do == "set_timer":
                self._set_timer(a["name"], a["ms"])
            elif do == "clear_timer":
                self._clear_timer(a["name"])
        if last_cmd is not None:
            self._awaited_id = last_cmd
            self._watchdog = self.scheduler.call_later(
                self.watchdog_ms, self._on_watchdog)

    def _send_command(self, method: str, args: dict) -> str:
        self._cmd_n += 1
        cid = f"{self.issuer}-{self._cmd_n}"
        self._safe_publish(KEY_COMMAND,
                           {"id": cid, "method": method, "args": args},
                           kind="command")
        return cid

    def _set_timer(self, name: str, ms: int):
        old = self._timers.pop(name, None)
        if old is not None:
            old.cancel()
        self._timers[name] = self.scheduler.call_later(ms, self._on_timer, name)

    def _clear_timer(self, name: str):
        handle = self._timers.pop(name, None)
        if handle is not None:
            handle.cancel()

    def _on_timer(self, name: str):
        with self._lock:
            self._timers.pop(name, None)
        self.inject(name)

    # -- command supervision ------------------------------------------------------

    def _cancel_watchdog(self):
        if self._watchdog is not None:
            self._watchdog.cancel()
            self._watchdog = None

    def _on_watchdog(self):
        with self._lock:
            if self._awaited_id is None:
                return
            log.warning("command %s exceeded %d ms", self._awaited_id, self.watchdog_ms)
            self._awaited_id = None
            self._watchdog = None
            self.inject("cmd_timeout")

    def _on_reply(self, env):
        payload = env.payload
        if not isinstance(payload, dict):
            return
        with self._lock:
            if payload.get("id") != self._awaited_id:
                return  # a stale or foreign command's reply
            self._awaited_id = None
            self._cancel_watchdog()
            self.inject("command_done" if payload.get("ok") else "command_failed")

    # -- telemetry-driven events ----------------------------------------------------

    def _on_camera(self, env):
        face = isinstance(env.payload, dict) and env.payload.get("face") is not None
        with self._lock:
            if face:
                self._on_streak += 1
                self._off_streak = 0
            else:
                self._off_streak += 1
                self._on_streak = 0
            if not self._face_present and self._on_streak >= self.face_on_frames:
                self._face_present = True
                self.inject("face_detected")
            elif self._face_present and self._off_streak >= self.face_off_frames:
                self._face_present = False
                self.inject("face_lost")

    def _on_battery(self, env):
        percent = env.payload.get("percent") if isinstance(env.payload, dict) else None
        if not isinstance(percent, (int, float)):
            return
        with self._lock:
            if self._battery_latched or percent >= self.battery_low_pct:
                return
            if self.inject("battery_low"):
                self._battery_latched = True

    def _on_tactile(self, env):
        p = env.payload
        if isinstance(p, dict) and p.get("pressed") and \
                str(p.get("sensor", "")).startswith("head"):
            self.inject("head_touched")

    def _on_speech(self, env):
        text = env.payload.get("text") if isinstance(env.payload, dict) else None
        intent = parse_intent(text)
        log.info("heard %r -> %s", text, intent.name)
        self.inject(intent.name)

    def _on_control(self, env):
        event = env.payload.get("event") if isinstance(env.payload, dict) else None
        if isinstance(event, str) and event:
            self.inject(event)

    # -- outbound feeds ---------------------------------------------------------------

    def _publish_state(self, source, event, target):
        seq = self._state_seq
        self._state_seq += 1
        self._safe_publish(KEY_BRAIN_STATE,
                           {"seq": seq, "from": source, "event": event, "to": target})

    def _publish_event(self, event: str, handled: bool):
        seq = self._event_seq
        self._event_seq += 1
        self._safe_publish(KEY_BRAIN_EVENT,
                           {"seq": seq, "event": event, "state": self.state,
                            "handled": handled})

    def _safe_publish(self, key, payload, kind="data"):
        try:
            self.bus.publish(key, payload, kind=kind)
        except Exception as e:
            log.warning("publish %s failed: %s", key, e)

    def _enter_shutdown(self):
        for handle in self._timers.values():
            handle.cancel()
        self._timers.clear()
        self._cancel_watchdog()
        self.done.set()
