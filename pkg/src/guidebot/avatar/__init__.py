"""Simulated humanoid avatar: five sensor streams plus a command executor.

The simulator is the robot end of the platform.  It publishes camera, sonar,
battery, tactile, and joint telemetry on the bus, executes speech/posture/
locomotion/gesture commands received on the command key, and answers every
command with exactly one reply envelope.  All timing runs off a scheduler,
so the same inputs under a virtual clock reproduce byte-identical output.
"""

from .camera import CameraModel, project_face
from .joints import JOINT_SPECS, JointState, make_joints
from .keyframes import DANCING, GOODBYE, SINGING, KeyframeTimeline
from .state import POSTURES, AvatarState
from .simulator import AvatarSimulator, SimulatorConfig

__all__ = [
    "AvatarSimulator",
    "AvatarState",
    "CameraModel",
    "DANCING",
    "GOODBYE",
    "JOINT_SPECS",
    "JointState",
    "KeyframeTimeline",
    "POSTURES",
    "SINGING",
    "SimulatorConfig",
    "make_joints",
    "project_face",
]
