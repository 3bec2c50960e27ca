"""Joint metadata and kinematic state.

Head joints carry the real hardware limits since the tracking controller
clamps against them; the remaining body joints share a generic symmetric
range.  Speeds are degrees per second of commanded motion; the integrator
never moves a joint faster than its max_speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# name -> (min deg, max deg, max_speed deg/s)
JOINT_SPECS: dict[str, tuple[float, float, float]] = {
    "HeadYaw": (-119.0, 119.0, 200.0),
    "HeadPitch": (-38.0, 29.0, 200.0),
    "LShoulderPitch": (-120.0, 120.0, 120.0),
    "LShoulderRoll": (-120.0, 120.0, 120.0),
    "LElbowYaw": (-120.0, 120.0, 120.0),
    "LElbowRoll": (-120.0, 120.0, 120.0),
    "LWristYaw": (-120.0, 120.0, 120.0),
    "RShoulderPitch": (-120.0, 120.0, 120.0),
    "RShoulderRoll": (-120.0, 120.0, 120.0),
    "RElbowYaw": (-120.0, 120.0, 120.0),
    "RElbowRoll": (-120.0, 120.0, 120.0),
    "RWristYaw": (-120.0, 120.0, 120.0),
    "LHipPitch": (-120.0, 120.0, 120.0),
    "LKneePitch": (-120.0, 120.0, 120.0),
    "RHipPitch": (-120.0, 120.0, 120.0),
    "RKneePitch": (-120.0, 120.0, 120.0),
}


@dataclass
class JointState:
    name: str
    angle: float = 0.0
    target: float = 0.0
    min: float = -120.0
    max: float = 120.0
    max_speed: float = 120.0

    def clamp(self, value: float) -> float:
        return self.min if value < self.min else self.max if value > self.max else value

    def in_limits(self, value: float) -> bool:
        return self.min <= value <= self.max

    def advance(self, dt: float):
        """Move toward target, rate-limited; lands exactly when close enough."""
        delta = self.target - self.angle
        budget = self.max_speed * dt
        if abs(delta) <= budget:
            self.angle = self.target
        else:
            self.angle += budget if delta > 0 else -budget


def make_joints() -> dict[str, JointState]:
    return {
        name: JointState(name=name, min=lo, max=hi, max_speed=speed)
        for name, (lo, hi, speed) in JOINT_SPECS.items()
    }
