"""Timed joint-target waypoints, linearly interpolated to produce gestures.

A timeline's trajectory for each joint starts at the pose the robot holds
when playback begins and runs through that joint's waypoints in order.  As
long as every segment's slope stays under the joint's max speed, the
rate-limited integrator tracks the interpolated value exactly, so each
waypoint is hit on its timestamp.

Three stock gestures ship: a two-arm dance, a slow swaying song pose
sequence, and a right-arm goodbye wave.  All finish in under ten seconds so
a performance completes before a supervising watchdog gives up on it.
"""

from __future__ import annotations

from bisect import bisect_right

from .joints import JOINT_SPECS


class KeyframeTimeline:
    """Ordered (t_seconds, {joint: target_deg}) waypoints."""

    def __init__(self, name: str, frames: list[tuple[float, dict]]):
        if not frames:
            raise ValueError("timeline needs at least one frame")
        self.name = name
        self.frames = [(float(t), dict(targets)) for t, targets in frames]
        last = 0.0
        for t, targets in self.frames:
            if t <= last:
                raise ValueError(f"{name}: frame times must be strictly increasing")
            last = t
            for joint, angle in targets.items():
                if joint not in JOINT_SPECS:
                    raise ValueError(f"{name}: unknown joint {joint!r}")
                lo, hi, _speed = JOINT_SPECS[joint]
                if not lo <= angle <= hi:
                    raise ValueError(
                        f"{name}: target {angle} for {joint} outside [{lo}, {hi}]")
        self.joints_used = sorted({j for _, targets in self.frames for j in targets})
        self._check_slopes()

    def _check_slopes(self):
        # consecutive mentions of one joint must be trackable at max speed
        for joint in self.joints_used:
            speed = JOINT_SPECS[joint][2]
            prev_t, prev_v = None, None
            for t, targets in self.frames:
                if joint not in targets:
                    continue
                if prev_t is not None:
                    slope = abs(targets[joint] - prev_v) / (t - prev_t)
                    if slope > speed:
                        raise ValueError(
                            f"{self.name}: {joint} needs {slope:.0f} deg/s "
                            f"between t={prev_t} and t={t}, limit {speed}")
                prev_t, prev_v = t, targets[joint]

    @property
    def duration(self) -> float:
        return self.frames[-1][0]

    def targets_at(self, t: float, start: dict) -> dict:
        """Interpolated target for every joint the timeline touches.

        `start` maps joint name to its angle at playback start; joints fall
        back to 0.0 if absent.  Before a joint's first waypoint the value
        interpolates from the start pose; after its last, it holds.
        """
        out = {}
        for joint in self.joints_used:
            series_t = [0.0]
            series_v = [float(start.get(joint, 0.0))]
            for ft, targets in self.frames:
                if joint in targets:
                    series_t.append(ft)
                    series_v.append(float(targets[joint]))
            if t >= series_t[-1]:
                out[joint] = series_v[-1]
                continue
            i = bisect_right(series_t, t)
            t0, t1 = series_t[i - 1], series_t[i]
            v0, v1 = series_v[i - 1], series_v[i]
            out[joint] = v0 + (t - t0) / (t1 - t0) * (v1 - v0)
        return out

    def final_targets(self) -> dict:
        out = {}
        for _, targets in self.frames:
            out.update(targets)
        return out


DANCING = KeyframeTimeline("dancing", [
    (0.8, {"LShoulderPitch": 40, "RShoulderPitch": 110,
           "LElbowRoll": -40, "RElbowRoll": 40, "HeadYaw": 20}),
    (1.6, {"LShoulderPitch": 100, "RShoulderPitch": 50, "HeadYaw": -20}),
    (2.4, {"LShoulderPitch": 40, "RShoulderPitch": 110, "HeadYaw": 20}),
    (3.2, {"LShoulderPitch": 100, "RShoulderPitch": 50, "HeadYaw": -20}),
    (4.0, {"LShoulderPitch": 40, "RShoulderPitch": 110, "HeadYaw": 20,
           "LElbowRoll": -70, "RElbowRoll": 70}),
    (4.8, {"LShoulderPitch": 100, "RShoulderPitch": 50, "HeadYaw": -20,
           "LElbowRoll": -40, "RElbowRoll": 40}),
    (5.6, {"LShoulderPitch": 40, "RShoulderPitch": 110, "HeadYaw": 20}),
    (6.4, {"LShoulderPitch": 100, "RShoulderPitch": 50, "HeadYaw": -20}),
    (7.0, {"LShoulderPitch": 70, "RShoulderPitch": 80, "HeadYaw": 0,
           "LElbowRoll": -55, "RElbowRoll": 55}),
    (7.4, {"LShoulderPitch": 80, "RShoulderPitch": 85,
           "LElbowRoll": -30, "RElbowRoll": 30}),
    (7.8, {"LShoulderPitch": 88, "RShoulderPitch": 89,
           "LElbowRoll": -5, "RElbowRoll": 5}),
    (8.0, {"LShoulderPitch": 90, "RShoulderPitch": 90,
           "LElbowRoll": 0, "RElbowRoll": 0, "HeadYaw": 0}),
])

SINGING = KeyframeTimeline("singing", [
    (1.0, {"LShoulderPitch": 60, "RShoulderPitch": 60, "HeadPitch": -10}),
    (2.0, {"LShoulderPitch": 45, "RShoulderPitch": 75, "HeadPitch": 5,
           "LElbowRoll": -35}),
    (3.0, {"LShoulderPitch": 75, "RShoulderPitch": 45, "HeadPitch": -10,
           "LElbowRoll": -10, "RElbowRoll": 35}),
    (4.0, {"LShoulderPitch": 45, "RShoulderPitch": 75, "HeadPitch": 5}),
    (5.0, {"LShoulderPitch": 75, "RShoulderPitch": 45, "HeadPitch": -10}),
    (6.0, {"LShoulderPitch": 45, "RShoulderPitch": 75, "HeadPitch": 5}),
    (7.0, {"LShoulderPitch": 60, "RShoulderPitch": 60, "HeadPitch": 0,
           "LElbowRoll": -20, "RElbowRoll": 20}),
    (8.0, {"LShoulderPitch": 80, "RShoulderPitch": 80,
           "LElbowRoll": -8, "RElbowRoll": 8}),
    (8.6, {"LShoulderPitch": 87, "RShoulderPitch": 87,
           "LElbowRoll": -3, "RElbowRoll": 3}),
    (9.0, {"LShoulderPitch": 90, "RShoulderPitch": 90,
           "LElbowRoll": 0, "RElbowRoll": 0, "HeadPitch": 0}),
])

GOODBYE = KeyframeTimeline("goodbye", [
    (1.0, {"RShoulderPitch": 0, "RElbowRoll": 40}),
    (1.5, {"RShoulderPitch": -30, "RElbowRoll": 60}),
    (2.0, {"RShoulderPitch": -35, "RElbowRoll": 20}),
    (2.5, {"RShoulderPitch": -30, "RElbowRoll": 60}),
    (3.0, {"RShoulderPitch": -35, "RElbowRoll": 20}),
    (3.5, {"RShoulderPitch": -30, "RElbowRoll": 60}),
    (4.1, {"RShoulderPitch": 30, "RElbowRoll": 40}),
    (4.5, {"RShoulderPitch": 70, "RElbowRoll": 10, "HeadYaw": 0}),
])

TIMELINES = {"dancing": DANCING, "singing": SINGING, "goodbye": GOODBYE}
