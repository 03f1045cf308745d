import { describe, expect, it } from "vitest";

import { clampToUnitDisk, joystickToBend } from "../src/bend.js";
import {
  decodeServer,
  encodeEStop,
  encodeHome,
  encodeSetTarget,
  encodeStreamConfig,
} from "../src/protocol.js";

function sampleState(overrides: Record<string, unknown> = {}): string {
  return JSON.stringify({
    type: "state",
    t: 1.25,
    theta_cmd_deg: 30,
    phi_cmd_deg: 45,
    theta_act_deg: 29.9,
    phi_act_deg: 44.8,
    residual_mm: 0,
    dl_cmd_mm: [-0.9, -0.9, 0.9, 0.9],
    dl_act_mm: [-0.9, -0.9, 0.9, 0.9],
    motor_target_rad: [-0.18, -0.18, 0.18, 0.18],
    motor_angle_rad: [-0.18, -0.18, 0.18, 0.18],
    motor_velocity_rad_s: [0, 0, 0, 0],
    encoder_counts: [-34, -34, 34, 34],
    tip_mm: [7.2, 7.2, 38.9],
    estop: false,
    ...overrides,
  });
}

describe("set_target encoding", () => {
  it("uses the normative field names and units", () => {
    expect(JSON.parse(encodeSetTarget(90, 0, 500))).toEqual({
      type: "set_target",
      theta_deg: 90,
      phi_deg: 0,
      ramp_ms: 500,
    });
  });

  it("joystick edge drag at 45 degrees produces set_target{90, 45}", () => {
    const bend = joystickToBend(clampToUnitDisk(3, 3));
    const msg = JSON.parse(encodeSetTarget(bend.thetaDeg, bend.phiDeg, 150));
    expect(msg.theta_deg).toBeCloseTo(90, 6);
    expect(msg.phi_deg).toBeCloseTo(45, 6);
  });

  it("clamps theta to 90 client-side no matter the input", () => {
    expect(JSON.parse(encodeSetTarget(135, 10, 0)).theta_deg).toBe(90);
    expect(JSON.parse(encodeSetTarget(-5, 10, 0)).theta_deg).toBe(0);
    expect(JSON.parse(encodeSetTarget(45, 370, 0)).phi_deg).toBeCloseTo(10, 10);
  });

  it("other client messages carry only their tag", () => {
    expect(JSON.parse(encodeHome())).toEqual({ type: "home" });
    expect(JSON.parse(encodeEStop())).toEqual({ type: "estop" });
    expect(JSON.parse(encodeStreamConfig(25))).toEqual({ type: "stream_config", rate_hz: 25 });
  });
});

describe("server frame decoding", () => {
  it("round-trips a state frame", () => {
    const state = decodeServer(sampleState());
    expect(state.type).toBe("state");
    if (state.type === "state") {
      expect(state.theta_act_deg).toBeCloseTo(29.9);
      expect(state.dl_act_mm).toHaveLength(4);
      expect(state.estop).toBe(false);
    }
  });

  it("decodes acks and errors", () => {
    expect(decodeServer('{"type":"ack","for":"set_target","clamped":true}')).toEqual({
      type: "ack",
      for: "set_target",
      clamped: true,
    });
    expect(decodeServer('{"type":"error","code":"estop-latched","detail":"x"}')).toEqual({
      type: "error",
      code: "estop-latched",
      detail: "x",
    });
  });

  it("rejects unknown types and malformed frames", () => {
    expect(() => decodeServer('{"type":"warp"}')).toThrow(/unknown/);
    expect(() => decodeServer("not json")).toThrow();
    expect(() => decodeServer(sampleState({ dl_act_mm: [1, 2, 3] }))).toThrow(/dl_act_mm/);
    expect(() => decodeServer(sampleState({ t: "soon" }))).toThrow(/'t'/);
  });
});
