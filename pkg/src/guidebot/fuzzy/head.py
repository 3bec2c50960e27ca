"""Face-centering head controller built on the fuzzy library.

Input is the face position in the 320x240 camera frame; output is a pair of
incremental angles for the head yaw/pitch joints.  Increments rather than
absolute angles give negative feedback: face left of center -> positive yaw
delta -> head turns left -> face drifts toward center.

Two parameter sets ship.  `corrected` has symmetric monotone centers
(negative < zero < positive) and is the default; `as_printed` keeps the
published table's ordering, in which the positive term of three variables
peaks at zero.  Only `corrected` converges in closed loop; `as_printed`
exists so the discrepancy can be studied.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .membership import GaussianTerm
from .system import FuzzyRule, FuzzySystem, LinguisticVariable

log = logging.getLogger(__name__)

FRAME_CX = 160.0
FRAME_CY = 120.0

# label -> (center, sigma) per variable; the two sets differ only in which
# of the swapped (center, sigma) pairs carries the "zero" vs "positive" label
PARAMS_CORRECTED = {
    "FaceXLoc": {"negative": (0, 80), "zero": (160, 50), "positive": (320, 80)},
    "FaceYLoc": {"negative": (0, 70), "zero": (120, 40), "positive": (240, 70)},
    "AngleX": {"negative": (-15, 10), "zero": (0, 10), "positive": (15, 10)},
    "AngleY": {"negative": (-7, 6), "zero": (0, 6), "positive": (7, 6)},
}
PARAMS_AS_PRINTED = {
    "FaceXLoc": {"negative": (0, 80), "positive": (320, 80), "zero": (160, 50)},
    "FaceYLoc": {"negative": (0, 70), "positive": (120, 40), "zero": (240, 70)},
    "AngleX": {"negative": (-15, 10), "positive": (0, 10), "zero": (15, 10)},
    "AngleY": {"negative": (-7, 6), "positive": (0, 6), "zero": (7, 6)},
}
PARAM_SETS = {"corrected": PARAMS_CORRECTED, "as_printed": PARAMS_AS_PRINTED}

UNIVERSES = {
    "FaceXLoc": (0.0, 320.0),
    "FaceYLoc": (0.0, 240.0),
    "AngleX": (-45.0, 45.0),
    "AngleY": (-25.0, 25.0),
}

# the six-rule table: x error drives yaw, y error drives pitch, sign flipped
RULES = [
    FuzzyRule(("FaceXLoc", "negative"), ("AngleX", "positive")),
    FuzzyRule(("FaceXLoc", "positive"), ("AngleX", "negative")),
    FuzzyRule(("FaceXLoc", "zero"), ("AngleX", "zero")),
    FuzzyRule(("FaceYLoc", "negative"), ("AngleY", "positive")),
    FuzzyRule(("FaceYLoc", "positive"), ("AngleY", "negative")),
    FuzzyRule(("FaceYLoc", "zero"), ("AngleY", "zero")),
]


@dataclass(frozen=True)
class HeadControllerConfig:
    parameter_set: str = "corrected"
    step: float = 0.01          # defuzzification grid, deg
    deadband_px: float = 5.0    # no output within this distance of center
    gain: float = 1.0
    yaw_limits: tuple[float, float] = (-119.0, 119.0)
    pitch_limits: tuple[float, float] = (-38.0, 29.0)

    def __post_init__(self):
        if self.parameter_set not in PARAM_SETS:
            raise ValueError(
                f"parameter_set must be one of {sorted(PARAM_SETS)}, got {self.parameter_set!r}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.deadband_px < 0:
            raise ValueError("deadband must be >= 0")


def build_system(parameter_set: str = "corrected", step: float = 0.01) -> FuzzySystem:
    params = PARAM_SETS[parameter_set]
    variables = {}
    for name, terms in params.items():
        variables[name] = LinguisticVariable(
            name,
            UNIVERSES[name],
            tuple(GaussianTerm(label, float(c), float(s)) for label, (c, s) in terms.items()),
        )
    return FuzzySystem(variables, RULES, step=step)


class HeadController:
    def __init__(self, cfg: HeadControllerConfig):
        self.cfg = cfg
        self.system = build_system(cfg.parameter_set, cfg.step)

    def step(self, face_x: float, face_y: float) -> tuple[float, float]:
        """(delta_yaw, delta_pitch) in degrees for a face at that pixel."""
        cfg = self.cfg
        if abs(face_x - FRAME_CX) <= cfg.deadband_px:
            dyaw = 0.0
        else:
            dyaw = cfg.gain * self.system.evaluate("AngleX", {"FaceXLoc": face_x})
        if abs(face_y - FRAME_CY) <= cfg.deadband_px:
            dpitch = 0.0
        else:
            dpitch = cfg.gain * self.system.evaluate("AngleY", {"FaceYLoc": face_y})
        return dyaw, dpitch


def build_head_controller(cfg: HeadControllerConfig | None = None) -> HeadController:
    return HeadController(cfg or HeadControllerConfig())


_default_controllers: dict[HeadControllerConfig, HeadController] = {}


def flc_step(face_x: float, face_y: float,
             cfg: HeadControllerConfig | None = None) -> tuple[float, float]:
    """Convenience wrapper that caches one controller per config."""
    cfg = cfg or HeadControllerConfig()
    ctl = _default_controllers.get(cfg)
    if ctl is None:
        ctl = _default_controllers[cfg] = HeadController(cfg)
    return ctl.step(face_x, face_y)


class HeadTracker:
    """Closed-loop consumer: camera frames in, setAngles commands out.

    Tracks the avatar's current head angles from the joint stream; a camera
    frame with a face produces one incremental setAngles command.  Frames
    with no face, frames inside the deadband, and frames arriving while the
    known joint state is stale (older than `stale_after_ms`) produce nothing.
    """

    def __init__(self, bus, cfg: HeadControllerConfig | None = None,
                 stale_after_ms: int = 1000, issuer: str = "head"):
        self.bus = bus
        self.controller = build_head_controller(cfg)
        self.stale_after_ms = stale_after_ms
        self.issuer = issuer
        self._yaw = 0.0
        self._pitch = 0.0
        self._joints_ts: int | None = None
        self._cmd_n = 0
        self.commands_sent = 0
        self.frames_skipped_stale = 0
        self._subs = [
            bus.subscribe("avatar.nao.data.joints", self._on_joints),
            bus.subscribe("avatar.nao.data.camera", self._on_camera),
        ]

    def _on_joints(self, env):
        angles = env.payload.get("angles", {})
        if "HeadYaw" in angles:
            self._yaw = float(angles["HeadYaw"])
        if "HeadPitch" in angles:
            self._pitch = float(angles["HeadPitch"])
        self._joints_ts = env.ts

    def _on_camera(self, env):
        face = env.payload.get("face")
        if face is None:
            return
        if self._joints_ts is None or env.ts - self._joints_ts > self.stale_after_ms:
            self.frames_skipped_stale += 1
            return
        dyaw, dpitch = self.controller.step(float(face["x"]), float(face["y"]))
        if dyaw == 0.0 and dpitch == 0.0:
            return
        cfg = self.controller.cfg
        yaw = _clamp(self._yaw + dyaw, *cfg.yaw_limits)
        pitch = _clamp(self._pitch + dpitch, *cfg.pitch_limits)
        self._cmd_n += 1
        self.bus.publish(
            "avatar.nao.command",
            {
                "id": f"{self.issuer}-{self._cmd_n}",
                "method": "setAngles",
                "args": {"angles": {"HeadYaw": yaw, "HeadPitch": pitch}},
            },
            kind="command",
        )
        self.commands_sent += 1

    def stop(self):
        for sid in self._subs:
            self.bus.unsubscribe(sid)
        self._subs = []


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def head_tracking_loop(bus, cfg: HeadControllerConfig | None = None,
                       stale_after_ms: int = 1000) -> HeadTracker:
    return HeadTracker(bus, cfg, stale_after_ms=stale_after_ms)
