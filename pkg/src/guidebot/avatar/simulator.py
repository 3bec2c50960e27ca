"""The simulated robot: sensor producers, command executor, integrator.

Structure mirrors a one-thread-per-data-type robot server: each sensor
stream is an independent periodic task, commands run through one sequential
executor, and a 50 Hz integrator advances joints, torso, and battery.  Under
a virtual clock all of it is driven single-threaded by the scheduler, which
is what makes scenario transcripts reproducible bit for bit; under a real
clock the periodic tasks are threads and a lock guards the state.

Payload shapes (one JSON object per envelope):
  camera   {"seq": n, "face": {"x": px, "y": px} | null}
  sonar    {"seq": n, "left": m, "right": m}
  battery  {"seq": n, "percent": p}
  tactile  {"seq": n, "sensor": name, "pressed": bool}
  joints   {"seq": n, "angles": {name: deg}, "posture": name}
  command  {"id": s, "method": name, "args": {...}}
  reply    {"id": s, "ok": bool, "detail": str}
"""

from __future__ import annotations

import logging
import math
import threading
from collections import deque
from dataclasses import dataclass

from ..bus.keys import (
    KEY_BATTERY,
    KEY_CAMERA,
    KEY_COMMAND,
    KEY_FACE,
    KEY_JOINTS,
    KEY_REPLY,
    KEY_SONAR,
    KEY_TACTILE,
)
from .camera import DEFAULT_CAMERA, CameraModel, project_face
from .keyframes import TIMELINES
from .state import POSTURES, TRANSITION, AvatarState

log = logging.getLogger(__name__)

METHODS = ("say", "goToPosture", "moveTo", "setAngles", "wakeUp", "rest",
           "dancing", "singing", "goodbye")


@dataclass(frozen=True)
class SimulatorConfig:
    camera_period_ms: int = 100
    joints_period_ms: int = 100
    sonar_period_ms: int = 200
    battery_period_ms: int = 5000
    integrator_period_ms: int = 20
    initial_battery: float = 100.0
    battery_drain_per_s: float = 0.01   # percent per second while awake
    walk_speed: float = 0.1             # m/s
    turn_speed: float = 20.0            # deg/s
    say_base_ms: int = 300
    say_per_char_ms: int = 30
    wake_ms: int = 1000
    rest_ms: int = 2000


class AvatarSimulator:
    def __init__(self, bus, scheduler, config: SimulatorConfig | None = None,
                 camera: CameraModel = DEFAULT_CAMERA):
        self.bus = bus
        self.scheduler = scheduler
        self.cfg = config or SimulatorConfig()
        self.camera = camera
        self.state = AvatarState(battery=self.cfg.initial_battery)
        self.transcript: list[tuple[int, str]] = []
        self._lock = threading.RLock()
        self._seq = {"camera": 0, "sonar": 0, "battery": 0, "tactile": 0, "joints": 0}
        self._queue: deque = deque()
        self._active: dict | None = None
        self._handles: list = []
        self._subs: list[str] = []
        self._last_tick_ms: int | None = None
        self.replies_sent = 0

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> "AvatarSimulator":
        sched, cfg = self.scheduler, self.cfg
        self._subs = [
            self.bus.subscribe(KEY_COMMAND, self._on_command),
            self.bus.subscribe(KEY_FACE, self._on_face_event),
        ]
        self._last_tick_ms = sched.now_ms()
        # registration order fixes same-instant firing order: state advances
        # before anything samples it, and joints go out before the camera
        # frame so a controller pairing "latest joints + this frame" sees
        # both from the same instant (skewed pairs make tracking oscillate)
        self._handles = [
            sched.every(cfg.integrator_period_ms, self._tick),
            sched.every(cfg.joints_period_ms, self._publish_joints),
            sched.every(cfg.camera_period_ms, self._publish_camera),
            sched.every(cfg.sonar_period_ms, self._publish_sonar),
            sched.every(cfg.battery_period_ms, self._publish_battery),
        ]
        return self

    def stop(self):
        for h in self._handles:
            h.cancel()
        self._handles = []
        for sid in self._subs:
            try:
                self.bus.unsubscribe(sid)
            except Exception:
                pass
        self._subs = []

    # -- sensor streams -------------------------------------------------------

    def _next_seq(self, stream: str) -> int:
        n = self._seq[stream]
        self._seq[stream] = n + 1
        return n

    def _publish_camera(self):
        with self._lock:
            face = None
            if self.state.visitor_face is not None:
                yaw, pitch = self.state.head()
                az, el = self.state.visitor_face
                pt = project_face(yaw, pitch, az, el, self.camera)
                if pt is not None:
                    face = {"x": round(pt[0], 2), "y": round(pt[1], 2)}
            payload = {"seq": self._next_seq("camera"), "face": face}
        self._safe_publish(KEY_CAMERA, payload)

    def _publish_joints(self):
        with self._lock:
            payload = {
                "seq": self._next_seq("joints"),
                "angles": {n: round(j.angle, 3) for n, j in self.state.joints.items()},
                "posture": self.state.posture,
            }
        self._safe_publish(KEY_JOINTS, payload)

    def _publish_sonar(self):
        with self._lock:
            if self.state.visitor_face is not None:
                az = math.radians(self.state.visitor_face[0])
                left = round(1.5 - 0.1 * math.sin(az), 3)
                right = round(1.5 + 0.1 * math.sin(az), 3)
            else:
                left = right = 2.55  # nothing in range
            payload = {"seq": self._next_seq("sonar"), "left": left, "right": right}
        self._safe_publish(KEY_SONAR, payload)

    def _publish_battery(self):
        with self._lock:
            payload = {"seq": self._next_seq("battery"),
                       "percent": round(self.state.battery, 3)}
        self._safe_publish(KEY_BATTERY, payload)

    def touch(self, sensor: str = "head_front", pressed: bool = True):
        """Tactile input hook; publishes one event per call."""
        with self._lock:
            payload = {"seq": self._next_seq("tactile"), "sensor": sensor,
                       "pressed": bool(pressed)}
        self._safe_publish(KEY_TACTILE, payload)

    def _safe_publish(self, key: str, payload: dict, kind: str = "data"):
        try:
            self.bus.publish(key, payload, kind=kind)
        except Exception as e:
            # bus outage must never kill a producer; the client reconnects
            log.warning("publish %s failed: %s", key, e)

    # -- visitor face ---------------------------------------------------------

    def set_visitor_face(self, azimuth, elevation=0.0):
        """Place (or clear, with None) the simulated visitor.  World azimuth
        is converted to torso-relative at set time."""
        with self._lock:
            if azimuth is None:
                self.state.visitor_face = None
                return
            azimuth = float(azimuth)
            elevation = float(elevation)
            if not -180 <= azimuth <= 180:
                raise ValueError(f"azimuth out of range: {azimuth}")
            if not -90 <= elevation <= 90:
                raise ValueError(f"elevation out of range: {elevation}")
            rel = _norm_angle(azimuth - self.state.heading)
            self.state.visitor_face = (rel, elevation)

    def _on_face_event(self, env):
        if not isinstance(env.payload, dict):
            log.warning("ignoring non-object face event")
            return
        az = env.payload.get("azimuth")
        el = env.payload.get("elevation", 0.0)
        try:
            self.set_visitor_face(az, 0.0 if el is None else el)
        except (TypeError, ValueError) as e:
            log.warning("ignoring bad face event %s: %s", env.payload, e)

    # -- command executor -----------------------------------------------------

    def _on_command(self, env):
        payload = env.payload
        if not isinstance(payload, dict):
            log.warning("ignoring non-object command")
            return
        if not isinstance(payload.get("id"), str) or not payload["id"]:
            log.warning("ignoring command without an id: %r", payload)
            return
        cmd = {
            "id": payload["id"],
            "method": payload.get("method"),
            "args": payload.get("args") or {},
        }
        with self._lock:
            self._queue.append(cmd)
        self._maybe_start()

    def _maybe_start(self):
        with self._lock:
            if self._active is not None or not self._queue:
                return
            cmd = self._queue.popleft()
            self._active = cmd
            try:
                duration_ms, detail = self._begin(cmd)
            except _CommandRejected as e:
                cmd["fail"] = str(e)
                duration_ms, detail = 0, str(e)
            cmd["detail"] = detail
        self._handles.append(
            self.scheduler.call_later(duration_ms, self._complete))

    def _begin(self, cmd) -> tuple[int, str]:
        """Validate and start the command; returns (duration_ms, detail)."""
        method = cmd["method"]
        args = cmd["args"]
        cfg = self.cfg
        if method not in METHODS:
            raise _CommandRejected(f"unknown method: {method!r}")
        if not isinstance(args, dict):
            raise _CommandRejected("args must be an object")
        if self.state.resting and method != "wakeUp":
            raise _CommandRejected("resting; only wakeUp accepted")

        if method == "say":
            text = args.get("text")
            if not isinstance(text, str) or not text:
                raise _CommandRejected("say needs nonempty text")
            self.transcript.append((self.scheduler.now_ms(), text))
            return cfg.say_base_ms + cfg.say_per_char_ms * len(text), f"say: {text}"

        if method == "goToPosture":
            name = args.get("posture")
            speed = args.get("speed", 1.0)
            if name not in POSTURES:
                raise _CommandRejected(f"unknown posture: {name!r}")
            if not isinstance(speed, (int, float)) or not 0 < speed <= 1:
                raise _CommandRejected(f"speed must be in (0, 1], got {speed!r}")
            self.state.posture = TRANSITION
            self.state.apply_posture_targets(name)
            cmd["end_posture"] = name
            return int(round(((1 - speed) * 2 + 0.5) * 1000)), f"posture: {name}"

        if method == "moveTo":
            try:
                dx = float(args["x"])
                dy = float(args["y"])
                dtheta = float(args.get("theta", 0.0))
            except (KeyError, TypeError, ValueError):
                raise _CommandRejected("moveTo needs numeric x, y[, theta]") from None
            st = self.state
            h = math.radians(st.heading)
            wx = st.torso_x + dx * math.cos(h) - dy * math.sin(h)
            wy = st.torso_y + dx * math.sin(h) + dy * math.cos(h)
            wh = st.heading + dtheta
            dist = math.hypot(dx, dy)
            t_ms = int(round(1000 * dist / cfg.walk_speed))
            r_ms = int(round(1000 * abs(dtheta) / cfg.turn_speed))
            cmd["move"] = {
                "from": (st.torso_x, st.torso_y, st.heading),
                "to": (wx, wy, wh),
                "t0": self.scheduler.now_ms(),
                "t_ms": t_ms, "r_ms": r_ms,
            }
            return max(t_ms, r_ms), f"moveTo: ({dx}, {dy}, {dtheta})"

        if method == "setAngles":
            angles = args.get("angles")
            if not isinstance(angles, dict) or not angles:
                raise _CommandRejected("setAngles needs an angles object")
            staged = {}
            for name, value in angles.items():
                joint = self.state.joints.get(name)
                if joint is None:
                    raise _CommandRejected(f"unknown joint: {name!r}")
                if not isinstance(value, (int, float)):
                    raise _CommandRejected(f"angle for {name} must be a number")
                if not joint.in_limits(float(value)):
                    raise _CommandRejected(
                        f"{name}={value} outside [{joint.min}, {joint.max}]")
                staged[name] = float(value)
            for name, value in staged.items():
                self.state.joints[name].target = value
            return 0, f"setAngles: {sorted(staged)}"

        if method == "wakeUp":
            self.state.resting = False
            return cfg.wake_ms, "awake"

        if method == "rest":
            self.state.resting = True
            self.state.posture = TRANSITION
            self.state.apply_posture_targets("Crouch")
            cmd["end_posture"] = "Crouch"
            return cfg.rest_ms, "resting"

        # dancing / singing / goodbye
        timeline = TIMELINES[method]
        cmd["timeline"] = {
            "t0": self.scheduler.now_ms(),
            "timeline": timeline,
            "start": self.state.angles(),
        }
        return int(round(timeline.duration * 1000)), f"performed: {method}"

    def _complete(self):
        with self._lock:
            cmd = self._active
            if cmd is None:
                return
            self._active = None
            ok = "fail" not in cmd
            if ok:
                if "end_posture" in cmd:
                    self.state.posture = cmd["end_posture"]
                if "move" in cmd:
                    x, y, h = cmd["move"]["to"]
                    self.state.torso_x, self.state.torso_y, self.state.heading = x, y, h
                if "timeline" in cmd:
                    final = cmd["timeline"]["timeline"].final_targets()
                    for name, value in final.items():
                        self.state.joints[name].target = float(value)
            detail = cmd.get("fail") or cmd.get("detail", "")
        self._safe_publish(KEY_REPLY, {"id": cmd["id"], "ok": ok, "detail": detail},
                           kind="reply")
        self.replies_sent += 1
        self._maybe_start()

    # -- integrator -----------------------------------------------------------

    def _tick(self):
        now = self.scheduler.now_ms()
        with self._lock:
            last = self._last_tick_ms if self._last_tick_ms is not None else now
            dt = (now - last) / 1000.0
            self._last_tick_ms = now
            if dt <= 0:
                return
            cmd = self._active
            if cmd is not None and "timeline" in cmd:
                tl = cmd["timeline"]
                t_local = (now - tl["t0"]) / 1000.0
                for name, value in tl["timeline"].targets_at(t_local, tl["start"]).items():
                    self.state.joints[name].target = value
            if cmd is not None and "move" in cmd:
                mv = cmd["move"]
                el = now - mv["t0"]
                fx, fy, fh = mv["from"]
                tx, ty, th = mv["to"]
                ft = min(1.0, el / mv["t_ms"]) if mv["t_ms"] else 1.0
                fr = min(1.0, el / mv["r_ms"]) if mv["r_ms"] else 1.0
                self.state.torso_x = fx + ft * (tx - fx)
                self.state.torso_y = fy + ft * (ty - fy)
                self.state.heading = fh + fr * (th - fh)
            for joint in self.state.joints.values():
                joint.advance(dt)
            if not self.state.resting:
                drain = self.cfg.battery_drain_per_s * dt
                self.state.battery = max(0.0, self.state.battery - drain)

    # -- introspection ----------------------------------------------------------

    def snapshot(self) -> dict:
        with self._lock:
            st = self.state
            return {
                "angles": st.angles(),
                "posture": st.posture,
                "torso": (st.torso_x, st.torso_y, st.heading),
                "battery": st.battery,
                "resting": st.resting,
                "visitor_face": st.visitor_face,
                "queue_depth": len(self._queue),
                "active": self._active["method"] if self._active else None,
            }


class _CommandRejected(Exception):
    pass


def _norm_angle(a: float) -> float:
    while a > 180:
        a -= 360
    while a < -180:
        a += 360
    return a
