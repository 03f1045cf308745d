/**
 * Virtual joystick pad. Screen-space drags map to the bend frame with x
 * right and y up (screen y points down, hence the sign flip); the knob is
 * clamped to the pad disk so the edge is exactly the 90 deg envelope.
 */

import { clampToUnitDisk, JoystickInput } from "./bend.js";

export class JoystickPad {
  private knob: HTMLDivElement;
  private pointerId: number | null = null;
  private current: JoystickInput = { u: 0, v: 0 };
  private enabled = true;

  constructor(
    private pad: HTMLDivElement,
    private onInput: (input: JoystickInput, final: boolean) => void,
  ) {
    this.knob = pad.querySelector(".knob") as HTMLDivElement;
    this.pad.addEventListener("pointerdown", (e) => this.onDown(e));
    this.pad.addEventListener("pointermove", (e) => this.onMove(e));
    this.pad.addEventListener("pointerup", (e) => this.onUp(e));
    this.pad.addEventListener("pointercancel", (e) => this.onUp(e));
    this.moveKnob();
  }

  setEnabled(enabled: boolean): void {
    this.enabled = enabled;
    this.pad.classList.toggle("disabled", !enabled);
    if (!enabled && this.pointerId !== null) {
      this.pointerId = null;
    }
  }

  get value(): JoystickInput {
    return this.current;
  }

  private eventToInput(e: PointerEvent): JoystickInput {
    const rect = this.pad.getBoundingClientRect();
    const radius = rect.width / 2;
    const u = (e.clientX - (rect.left + radius)) / radius;
    const v = -(e.clientY - (rect.top + radius)) / radius;
    return clampToUnitDisk(u, v);
  }

  private onDown(e: PointerEvent): void {
    if (!this.enabled || this.pointerId !== null) return;
    this.pointerId = e.pointerId;
    this.pad.setPointerCapture(e.pointerId);
    this.update(this.eventToInput(e), false);
  }

  private onMove(e: PointerEvent): void {
    if (e.pointerId !== this.pointerId) return;
    this.update(this.eventToInput(e), false);
  }

  private onUp(e: PointerEvent): void {
    if (e.pointerId !== this.pointerId) return;
    this.pointerId = null;
    this.update(this.eventToInput(e), true);
  }

  private update(input: JoystickInput, final: boolean): void {
    this.current = input;
    this.moveKnob();
    this.onInput(input, final);
  }

  private moveKnob(): void {
    const radius = this.pad.clientWidth / 2 || 90;
    const x = this.current.u * radius;
    const y = -this.current.v * radius;
    this.knob.style.transform = `translate(calc(-50% + ${x}px), calc(-50% + ${y}px))`;
  }
}

/**
 * Rate limiter for drag streaming: at most one send per interval, and the
 * last value always goes out (trailing edge) so the held target is exact.
 */
export class TrailingThrottle<T> {
  private lastSent = 0;
  private pending: T | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private intervalMs: number,
    private send: (value: T) => void,
    private now: () => number = () => Date.now(),
  ) {}

  push(value: T): void {
    const now = this.now();
    if (now - this.lastSent >= this.intervalMs) {
      this.lastSent = now;
      this.send(value);
      return;
    }
    this.pending = value;
    if (this.timer === null) {
      const wait = this.intervalMs - (now - this.lastSent);
      this.timer = setTimeout(() => this.flush(), wait);
    }
  }

  flush(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.pending !== null) {
      this.lastSent = this.now();
      this.send(this.pending);
      this.pending = null;
    }
  }
}
