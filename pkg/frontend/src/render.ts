/**
 * Canvas views and numeric readouts. Top view: tip path in the x-y plane
 * (looking down the straight axis). Side view: ring chain projected on the
 * x-z plane. Everything rendered comes from server state frames.
 */

import { ringChain } from "./bend.js";
import { StateFrame } from "./protocol.js";

const VIEW_MM = 55; // half-extent of both views, mm
const TRAIL_LENGTH = 600;

function setupCanvas(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const ctx = canvas.getContext("2d")!;
  return ctx;
}

export class Dashboard {
  private topCtx: CanvasRenderingContext2D;
  private sideCtx: CanvasRenderingContext2D;
  private trail: Array<[number, number]> = [];
  private fields: Record<string, HTMLElement> = {};
  private bars: HTMLElement[];

  constructor(root: Document) {
    this.topCtx = setupCanvas(root.getElementById("top-view") as HTMLCanvasElement);
    this.sideCtx = setupCanvas(root.getElementById("side-view") as HTMLCanvasElement);
    for (const id of [
      "theta-cmd",
      "phi-cmd",
      "theta-act",
      "phi-act",
      "residual",
      "tip",
      "sim-time",
      "motor-0",
      "motor-1",
      "motor-2",
      "motor-3",
    ]) {
      this.fields[id] = root.getElementById(id) as HTMLElement;
    }
    this.bars = [0, 1, 2, 3].map((i) => root.getElementById(`bar-${i}`) as HTMLElement);
  }

  reset(): void {
    this.trail = [];
  }

  render(state: StateFrame): void {
    this.renderReadouts(state);
    this.renderTop(state);
    this.renderSide(state);
  }

  private renderReadouts(s: StateFrame): void {
    this.fields["theta-cmd"].textContent = s.theta_cmd_deg.toFixed(2);
    this.fields["phi-cmd"].textContent = s.phi_cmd_deg.toFixed(1);
    this.fields["theta-act"].textContent = s.theta_act_deg.toFixed(2);
    this.fields["phi-act"].textContent = s.phi_act_deg.toFixed(1);
    this.fields["residual"].textContent = s.residual_mm.toFixed(4);
    this.fields["sim-time"].textContent = s.t.toFixed(2);
    this.fields["tip"].textContent = s.tip_mm.map((v) => v.toFixed(1)).join(", ");
    for (let i = 0; i < 4; i++) {
      this.fields[`motor-${i}`].textContent = `${s.motor_angle_rad[i].toFixed(4)} rad  (${
        s.encoder_counts[i]
      } cnt)`;
      const dl = s.dl_act_mm[i];
      const bar = this.bars[i];
      const half = Math.min(Math.abs(dl) / 4.0, 1) * 50;
      bar.style.left = dl < 0 ? `${50 - half}%` : "50%";
      bar.style.width = `${half}%`;
      bar.classList.toggle("pull", dl < 0);
    }
  }

  private project(ctx: CanvasRenderingContext2D, x: number, y: number): [number, number] {
    const w = ctx.canvas.width;
    const h = ctx.canvas.height;
    return [w / 2 + (x / VIEW_MM) * (w / 2), h / 2 - (y / VIEW_MM) * (h / 2)];
  }

  private grid(ctx: CanvasRenderingContext2D, xLabel: string, yLabel: string): void {
    const w = ctx.canvas.width;
    const h = ctx.canvas.height;
    ctx.clearRect(0, 0, w, h);
    ctx.strokeStyle = "#2a3340";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(0, h / 2);
    ctx.lineTo(w, h / 2);
    ctx.moveTo(w / 2, 0);
    ctx.lineTo(w / 2, h);
    ctx.stroke();
    ctx.fillStyle = "#5c6b7d";
    ctx.font = "11px sans-serif";
    ctx.fillText(xLabel, w - 16, h / 2 - 5);
    ctx.fillText(yLabel, w / 2 + 5, 11);
  }

  private renderTop(s: StateFrame): void {
    const ctx = this.topCtx;
    this.grid(ctx, "x", "y");
    this.trail.push([s.tip_mm[0], s.tip_mm[1]]);
    if (this.trail.length > TRAIL_LENGTH) this.trail.shift();
    ctx.strokeStyle = "#3f8efc88";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    this.trail.forEach(([x, y], i) => {
      const [px, py] = this.project(ctx, x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    const [px, py] = this.project(ctx, s.tip_mm[0], s.tip_mm[1]);
    ctx.fillStyle = "#ffb454";
    ctx.beginPath();
    ctx.arc(px, py, 5, 0, 2 * Math.PI);
    ctx.fill();
  }

  private renderSide(s: StateFrame): void {
    const ctx = this.sideCtx;
    this.grid(ctx, "x", "z");
    const theta = (s.theta_act_deg * Math.PI) / 180;
    const phi = (s.phi_act_deg * Math.PI) / 180;
    const rings = ringChain(theta, phi, s.tip_mm[2]);
    ctx.strokeStyle = "#9ece6a";
    ctx.lineWidth = 2;
    ctx.beginPath();
    rings.forEach(([x, , z], i) => {
      const [px, py] = this.project(ctx, x, z - VIEW_MM * 0.8);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    ctx.fillStyle = "#c0caf5";
    for (const [x, , z] of rings) {
      const [px, py] = this.project(ctx, x, z - VIEW_MM * 0.8);
      ctx.beginPath();
      ctx.arc(px, py, 3.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}
