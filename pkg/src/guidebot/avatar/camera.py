"""Pinhole-ish camera model: head-relative angles to frame pixels.

The mapping is linear in angle (px per degree), which is all the controller
needs: x = cx + kx*(yaw - azimuth).  With the head pointed straight at the
face the pixel lands on frame center; a face to the LEFT of the optical axis
(azimuth > yaw) produces x < 160, which the rule base answers with a positive
yaw increment, turning the head left and driving x back toward 160.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CameraModel:
    width: int = 320
    height: int = 240
    hfov: float = 60.0
    vfov: float = 45.0

    @property
    def kx(self) -> float:
        return self.width / self.hfov

    @property
    def ky(self) -> float:
        return self.height / self.vfov

    @property
    def cx(self) -> float:
        return self.width / 2.0

    @property
    def cy(self) -> float:
        return self.height / 2.0


DEFAULT_CAMERA = CameraModel()


def project_face(yaw: float, pitch: float, azimuth: float, elevation: float,
                 cam: CameraModel = DEFAULT_CAMERA):
    """Pixel position of a face at (azimuth, elevation), seen by a head at
    (yaw, pitch); all torso-relative degrees.  None when outside the FOV."""
    dyaw = yaw - azimuth
    dpitch = pitch - elevation
    if abs(dyaw) > cam.hfov / 2 or abs(dpitch) > cam.vfov / 2:
        return None
    return (cam.cx + cam.kx * dyaw, cam.cy + cam.ky * dpitch)
