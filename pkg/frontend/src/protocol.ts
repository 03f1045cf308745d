/**
 * Wire protocol: newline-free JSON text frames over the teleoperation
 * WebSocket. Field names, degree/millisecond units and the message set
 * mirror the server exactly; the server is the only authority on joint
 * state.
 */

import { THETA_MAX_DEG } from "./bend.js";

export interface StateFrame {
  type: "state";
  t: number;
  theta_cmd_deg: number;
  phi_cmd_deg: number;
  theta_act_deg: number;
  phi_act_deg: number;
  residual_mm: number;
  dl_cmd_mm: [number, number, number, number];
  dl_act_mm: [number, number, number, number];
  motor_target_rad: [number, number, number, number];
  motor_angle_rad: [number, number, number, number];
  motor_velocity_rad_s: [number, number, number, number];
  encoder_counts: [number, number, number, number];
  tip_mm: [number, number, number];
  estop: boolean;
}

export interface AckFrame {
  type: "ack";
  for: string;
  clamped: boolean;
}

export interface ErrorFrame {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMessage = StateFrame | AckFrame | ErrorFrame;

/** Bend target; theta is clamped to the 90 deg envelope before encoding so
 * the client can never request more than the joint allows. */
export function encodeSetTarget(thetaDeg: number, phiDeg: number, rampMs: number): string {
  const theta = Math.min(Math.max(thetaDeg, 0), THETA_MAX_DEG);
  let phi = phiDeg % 360;
  if (phi < 0) phi += 360;
  return JSON.stringify({
    type: "set_target",
    theta_deg: theta,
    phi_deg: phi,
    ramp_ms: Math.max(rampMs, 0),
  });
}

export function encodeHome(): string {
  return JSON.stringify({ type: "home" });
}

export function encodeEStop(): string {
  return JSON.stringify({ type: "estop" });
}

export function encodeStreamConfig(rateHz: number): string {
  return JSON.stringify({ type: "stream_config", rate_hz: rateHz });
}

const QUAD_FIELDS: Array<keyof StateFrame> = [
  "dl_cmd_mm",
  "dl_act_mm",
  "motor_target_rad",
  "motor_angle_rad",
  "motor_velocity_rad_s",
  "encoder_counts",
];

function isNumberArray(value: unknown, length: number): boolean {
  return Array.isArray(value) && value.length === length && value.every((v) => typeof v === "number");
}

/** Parse one server frame; throws on anything that is not a valid server
 * message (the stream then shows as stale rather than rendering garbage). */
export function decodeServer(text: string): ServerMessage {
  const data = JSON.parse(text) as Record<string, unknown>;
  if (typeof data !== "object" || data === null || typeof data.type !== "string") {
    throw new Error("frame is not a tagged object");
  }
  switch (data.type) {
    case "ack":
      if (typeof data.for !== "string") throw new Error("ack missing 'for'");
      return { type: "ack", for: data.for, clamped: Boolean(data.clamped) };
    case "error":
      if (typeof data.code !== "string") throw new Error("error missing 'code'");
      return { type: "error", code: data.code, detail: String(data.detail ?? "") };
    case "state": {
      for (const key of [
        "t",
        "theta_cmd_deg",
        "phi_cmd_deg",
        "theta_act_deg",
        "phi_act_deg",
        "residual_mm",
      ]) {
        if (typeof data[key] !== "number") throw new Error(`state missing '${key}'`);
      }
      for (const key of QUAD_FIELDS) {
        if (!isNumberArray(data[key], 4)) throw new Error(`state missing '${key}'`);
      }
      if (!isNumberArray(data.tip_mm, 3)) throw new Error("state missing 'tip_mm'");
      return { ...(data as unknown as StateFrame), estop: Boolean(data.estop) };
    }
    default:
      throw new Error(`unknown message type '${data.type}'`);
  }
}
