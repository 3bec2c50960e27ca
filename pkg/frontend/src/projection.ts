/**
 * Pixel <-> bearing conversions for the avatar's camera frame.
 *
 * The camera is a simple pinhole: 320x240 pixels spanning 60 deg
 * horizontally and 45 deg vertically, centered on wherever the head
 * points. Horizontal pixel coordinates grow to the right while azimuth
 * grows to the left, so the x term is mirrored; same story vertically.
 */

export const FRAME_W = 320;
export const FRAME_H = 240;
export const HFOV_DEG = 60;
export const VFOV_DEG = 45;

const KX = FRAME_W / HFOV_DEG;
const KY = FRAME_H / VFOV_DEG;
const CX = FRAME_W / 2;
const CY = FRAME_H / 2;

export interface PixelPoint {
  x: number;
  y: number;
}

export interface Bearing {
  azimuth: number;
  elevation: number;
}

/** Where a face at the given bearing lands in the frame, or null if outside the FOV. */
export function project(yawDeg: number, pitchDeg: number, azDeg: number, elDeg: number): PixelPoint | null {
  const dx = yawDeg - azDeg;
  const dy = pitchDeg - elDeg;
  if (Math.abs(dx) > HFOV_DEG / 2 || Math.abs(dy) > VFOV_DEG / 2) return null;
  return { x: CX + KX * dx, y: CY + KY * dy };
}

/** The bearing a pixel corresponds to, given the current head pose. */
export function unproject(yawDeg: number, pitchDeg: number, px: number, py: number): Bearing {
  return {
    azimuth: yawDeg - (px - CX) / KX,
    elevation: pitchDeg - (py - CY) / KY,
  };
}

export function insideFrame(px: number, py: number): boolean {
  return px >= 0 && px <= FRAME_W && py >= 0 && py <= FRAME_H;
}
