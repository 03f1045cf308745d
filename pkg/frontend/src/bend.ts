/**
 * Pure geometry for the dashboard: joystick <-> bend mapping and the
 * constant-curvature arc math used to draw the ring chain client-side.
 * No DOM access here so everything is unit-testable.
 */

export const THETA_MAX_DEG = 90;
export const RING_COUNT = 8;

/** Drag vector from the pad centre, clamped to the unit disk. */
export interface JoystickInput {
  u: number;
  v: number;
}

export interface Bend {
  thetaDeg: number;
  phiDeg: number;
}

export function clampToUnitDisk(u: number, v: number): JoystickInput {
  const r = Math.hypot(u, v);
  if (r <= 1 || r === 0) return { u, v };
  return { u: u / r, v: v / r };
}

/** Pad position -> bend command: pad edge is the 90 deg envelope, the drag
 * direction is the bend plane. Centre reports phi = 0. */
export function joystickToBend(input: JoystickInput): Bend {
  const { u, v } = clampToUnitDisk(input.u, input.v);
  // renormalization can round hypot to 1 + 1 ulp; never exceed the envelope
  const r = Math.min(Math.hypot(u, v), 1);
  if (r === 0) return { thetaDeg: 0, phiDeg: 0 };
  let phi = (Math.atan2(v, u) * 180) / Math.PI;
  if (phi < 0) phi += 360;
  if (phi >= 360) phi = 0;
  return { thetaDeg: THETA_MAX_DEG * r, phiDeg: phi };
}

/** Inverse of joystickToBend; used to place the target marker on the pad. */
export function bendToJoystick(bend: Bend): JoystickInput {
  const r = Math.min(Math.max(bend.thetaDeg / THETA_MAX_DEG, 0), 1);
  const phi = (bend.phiDeg * Math.PI) / 180;
  return { u: r * Math.cos(phi), v: r * Math.sin(phi) };
}

/** Tip of a constant-curvature arc (angles in radians, length in mm). */
export function tipPosition(
  theta: number,
  phi: number,
  arcLength: number,
): [number, number, number] {
  let a: number;
  let b: number;
  if (Math.abs(theta) < 1e-7) {
    a = 0.5 * theta;
    b = 1 - (theta * theta) / 6;
  } else {
    a = (1 - Math.cos(theta)) / theta;
    b = Math.sin(theta) / theta;
  }
  const r = arcLength * a;
  return [r * Math.cos(phi), r * Math.sin(phi), arcLength * b];
}

/** Arc length implied by an achieved bend and its tip z (straight limit: z). */
export function impliedArcLength(theta: number, tipZ: number): number {
  if (Math.abs(theta) < 1e-7) return tipZ;
  return (theta * tipZ) / Math.sin(theta);
}

/**
 * Ring positions of the discretized joint for the achieved bend, computed
 * from the state frame alone (theta/phi + tip). Ring k sits at the end of
 * the partial arc with bend theta*k/(N-1) and length L*k/(N-1).
 */
export function ringChain(
  thetaRad: number,
  phiRad: number,
  tipZ: number,
  ringCount: number = RING_COUNT,
): Array<[number, number, number]> {
  const arcLength = impliedArcLength(thetaRad, tipZ);
  const gaps = ringCount - 1;
  const points: Array<[number, number, number]> = [];
  for (let k = 0; k < ringCount; k++) {
    const f = k / gaps;
    if (k === 0) {
      points.push([0, 0, 0]);
    } else {
      points.push(tipPosition(thetaRad * f, phiRad, arcLength * f));
    }
  }
  return points;
}

/** True when no state frame has arrived for longer than the stale window. */
export function isStale(lastFrameMs: number | null, nowMs: number, windowMs = 500): boolean {
  return lastFrameMs === null || nowMs - lastFrameMs > windowMs;
}
