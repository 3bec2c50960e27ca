"""Whole-robot mutable state and the named posture table."""

from __future__ import annotations

from dataclasses import dataclass, field

from .joints import JointState, make_joints

# named whole-body configurations; any joint not listed targets 0
POSTURES: dict[str, dict[str, float]] = {
    "Stand": {"LShoulderPitch": 90, "RShoulderPitch": 90},
    "StandInit": {"LShoulderPitch": 80, "RShoulderPitch": 80,
                  "LElbowRoll": -25, "RElbowRoll": 25,
                  "LKneePitch": 5, "RKneePitch": 5},
    "StandZero": {},
    "Crouch": {"LShoulderPitch": 60, "RShoulderPitch": 60,
               "LHipPitch": -45, "RHipPitch": -45,
               "LKneePitch": 100, "RKneePitch": 100,
               "HeadPitch": 10},
    "Sit": {"LShoulderPitch": 45, "RShoulderPitch": 45,
            "LHipPitch": -90, "RHipPitch": -90,
            "LKneePitch": 90, "RKneePitch": 90},
    "SitRelax": {"LShoulderPitch": 30, "RShoulderPitch": 30,
                 "LHipPitch": -80, "RHipPitch": -80,
                 "LKneePitch": 60, "RKneePitch": 60,
                 "HeadPitch": 10},
}

TRANSITION = "Transition"


@dataclass
class AvatarState:
    """Single mutation domain for the simulator.

    `visitor_face` is stored torso-relative: world azimuth is converted when
    the face is set, so the projection only ever compares head joints against
    it.  Battery only decreases (until an external reset); `resting` gates
    motion commands.
    """

    joints: dict[str, JointState] = field(default_factory=make_joints)
    posture: str = "Stand"
    torso_x: float = 0.0
    torso_y: float = 0.0
    heading: float = 0.0
    battery: float = 100.0
    resting: bool = False
    visitor_face: tuple[float, float] | None = None  # (azimuth, elevation) deg

    def __post_init__(self):
        self.apply_posture_targets(self.posture)
        for j in self.joints.values():
            j.angle = j.target

    def apply_posture_targets(self, posture: str):
        table = POSTURES[posture]
        for name, joint in self.joints.items():
            joint.target = float(table.get(name, 0.0))

    def angles(self) -> dict[str, float]:
        return {name: j.angle for name, j in self.joints.items()}

    def head(self) -> tuple[float, float]:
        return self.joints["HeadYaw"].angle, self.joints["HeadPitch"].angle
