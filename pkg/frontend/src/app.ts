/**
 * Dashboard wiring: one WebSocket to the teleoperation service, joystick
 * commands out (20 Hz throttled with trailing edge), state frames in. The
 * page holds no simulation state of its own - every displayed value comes
 * from the server stream, and a missing stream shows as stale.
 */

import { isStale, joystickToBend } from "./bend.js";
import { JoystickPad, TrailingThrottle } from "./joystick.js";
import {
  decodeServer,
  encodeEStop,
  encodeHome,
  encodeSetTarget,
  ServerMessage,
} from "./protocol.js";
import { Dashboard } from "./render.js";

const SEND_INTERVAL_MS = 50; // 20 Hz during drag
const RAMP_MS = 150;
const STALE_MS = 500;

class App {
  private socket: WebSocket | null = null;
  private dashboard = new Dashboard(document);
  private pad: JoystickPad;
  private throttle: TrailingThrottle<string>;
  private lastFrameAt: number | null = null;
  private estopLatched = false;

  private urlInput = document.getElementById("server-url") as HTMLInputElement;
  private connectBtn = document.getElementById("connect") as HTMLButtonElement;
  private estopBtn = document.getElementById("estop") as HTMLButtonElement;
  private homeBtn = document.getElementById("home") as HTMLButtonElement;
  private statusEl = document.getElementById("status") as HTMLElement;
  private staleEl = document.getElementById("stale") as HTMLElement;
  private banner = document.getElementById("estop-banner") as HTMLElement;
  private log = document.getElementById("log") as HTMLElement;

  constructor() {
    this.throttle = new TrailingThrottle(SEND_INTERVAL_MS, (frame) => this.sendRaw(frame));
    this.pad = new JoystickPad(
      document.getElementById("pad") as HTMLDivElement,
      (input, final) => {
        const bend = joystickToBend(input);
        const frame = encodeSetTarget(bend.thetaDeg, bend.phiDeg, RAMP_MS);
        if (final) {
          this.throttle.push(frame);
          this.throttle.flush();
        } else {
          this.throttle.push(frame);
        }
      },
    );
    this.connectBtn.addEventListener("click", () => this.connect());
    this.estopBtn.addEventListener("click", () => this.sendRaw(encodeEStop()));
    this.homeBtn.addEventListener("click", () => this.sendRaw(encodeHome()));
    this.urlInput.value = localStorage.getItem("tjsim-url") ?? "ws://localhost:8080";
    setInterval(() => this.refreshStale(), 100);
  }

  private connect(): void {
    this.socket?.close();
    const url = this.urlInput.value.trim();
    localStorage.setItem("tjsim-url", url);
    this.setStatus(`connecting to ${url}...`, "pending");
    this.dashboard.reset();
    const socket = new WebSocket(url);
    this.socket = socket;
    socket.addEventListener("open", () => this.setStatus(`connected to ${url}`, "ok"));
    socket.addEventListener("close", () => this.setStatus("disconnected", "bad"));
    socket.addEventListener("error", () => this.setStatus("connection error", "bad"));
    socket.addEventListener("message", (event) => this.onMessage(String(event.data)));
  }

  private sendRaw(frame: string): void {
    if (this.socket?.readyState === WebSocket.OPEN) {
      this.socket.send(frame);
    }
  }

  private onMessage(text: string): void {
    let msg: ServerMessage;
    try {
      msg = decodeServer(text);
    } catch (err) {
      this.appendLog(`bad frame: ${err}`);
      return;
    }
    if (msg.type === "state") {
      this.lastFrameAt = Date.now();
      this.dashboard.render(msg);
      this.setEStop(msg.estop);
      return;
    }
    if (msg.type === "ack") {
      this.appendLog(msg.clamped ? `ack ${msg.for} (clamped to 90)` : `ack ${msg.for}`);
    } else {
      this.appendLog(`error ${msg.code}: ${msg.detail}`);
    }
  }

  private setEStop(latched: boolean): void {
    if (latched === this.estopLatched) return;
    this.estopLatched = latched;
    this.banner.classList.toggle("hidden", !latched);
    this.pad.setEnabled(!latched);
    this.estopBtn.disabled = latched;
  }

  private refreshStale(): void {
    const stale = isStale(this.lastFrameAt, Date.now(), STALE_MS);
    this.staleEl.classList.toggle("hidden", !stale);
  }

  private setStatus(text: string, kind: "ok" | "bad" | "pending"): void {
    this.statusEl.textContent = text;
    this.statusEl.className = `status ${kind}`;
  }

  private appendLog(line: string): void {
    const el = document.createElement("div");
    el.textContent = `[${new Date().toLocaleTimeString()}] ${line}`;
    this.log.prepend(el);
    while (this.log.children.length > 30) this.log.removeChild(this.log.lastChild!);
  }
}

window.addEventListener("load", () => new App());
