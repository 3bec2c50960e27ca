/**
 * DOM wiring: renders a DashboardState and routes pointer/keyboard input
 * back into the client. Everything interesting happens in client.ts and
 * state.ts; this file just paints.
 */

import type { ConsoleClient } from "./client.js";
import type { DashboardState } from "./state.js";
import { FRAME_H, FRAME_W } from "./projection.js";

function mustGet<T extends Element>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as unknown as T;
}

export class ConsoleUi {
  private readonly canvas: HTMLCanvasElement;
  private readonly ctx: CanvasRenderingContext2D;
  private readonly statusEl: HTMLElement;
  private readonly fsmEl: HTMLElement;
  private readonly transitionEl: HTMLElement;
  private readonly headEl: HTMLElement;
  private readonly batteryEl: HTMLElement;
  private readonly logEl: HTMLElement;
  private readonly sayInput: HTMLInputElement;
  private dragging = false;

  constructor(private readonly client: ConsoleClient) {
    this.canvas = mustGet<HTMLCanvasElement>("frame");
    this.canvas.width = FRAME_W;
    this.canvas.height = FRAME_H;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
    this.statusEl = mustGet("status");
    this.fsmEl = mustGet("fsm-state");
    this.transitionEl = mustGet("fsm-transition");
    this.headEl = mustGet("head-pose");
    this.batteryEl = mustGet("battery");
    this.logEl = mustGet("log");
    this.sayInput = mustGet<HTMLInputElement>("say-text");

    this.canvas.addEventListener("pointerdown", (ev) => {
      this.dragging = true;
      this.canvas.setPointerCapture(ev.pointerId);
      const [x, y] = this.framePoint(ev);
      this.client.dragFace(x, y);
    });
    this.canvas.addEventListener("pointermove", (ev) => {
      if (!this.dragging) return;
      const [x, y] = this.framePoint(ev);
      this.client.dragFace(x, y);
    });
    this.canvas.addEventListener("pointerup", (ev) => {
      if (!this.dragging) return;
      this.dragging = false;
      const [x, y] = this.framePoint(ev);
      this.client.releaseFace(x, y);
    });
    this.canvas.addEventListener("pointercancel", () => {
      if (!this.dragging) return;
      this.dragging = false;
      this.client.releaseFace(-1, -1);
    });

    const sayForm = mustGet<HTMLFormElement>("say-form");
    sayForm.addEventListener("submit", (ev) => {
      ev.preventDefault();
      this.client.sendUtterance(this.sayInput.value);
      this.sayInput.value = "";
    });

    client.onChange((s) => this.render(s));
    this.render(client.state);
  }

  /** Pointer event -> frame pixel coordinates (may land outside the frame). */
  private framePoint(ev: PointerEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) / rect.width) * FRAME_W;
    const y = ((ev.clientY - rect.top) / rect.height) * FRAME_H;
    return [x, y];
  }

  render(s: DashboardState): void {
    this.statusEl.textContent = s.connection;
    this.statusEl.className = s.connection === "connected" ? "ok" : "bad";
    this.fsmEl.textContent = s.fsmState;
    this.transitionEl.textContent = s.lastTransition
      ? `${s.lastTransition.from || "(start)"} --${s.lastTransition.event || "init"}--> ${s.lastTransition.to}`
      : "no transitions yet";
    this.headEl.textContent = `yaw ${s.headYaw.toFixed(1)}  pitch ${s.headPitch.toFixed(1)}`;
    this.batteryEl.textContent = s.battery === null ? "battery ?" : `battery ${s.battery.toFixed(1)}%`;
    this.paintFrame(s);
    this.paintLog(s);
  }

  private paintFrame(s: DashboardState): void {
    const { ctx } = this;
    ctx.fillStyle = "#10151c";
    ctx.fillRect(0, 0, FRAME_W, FRAME_H);
    ctx.strokeStyle = "#2a3a4d";
    ctx.beginPath();
    ctx.moveTo(FRAME_W / 2, 0);
    ctx.lineTo(FRAME_W / 2, FRAME_H);
    ctx.moveTo(0, FRAME_H / 2);
    ctx.lineTo(FRAME_W, FRAME_H / 2);
    ctx.stroke();
    if (s.face) {
      ctx.strokeStyle = "#58c470";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(s.face.x, s.face.y, 10, 0, Math.PI * 2);
      ctx.stroke();
      ctx.lineWidth = 1;
    }
  }

  private paintLog(s: DashboardState): void {
    // newest at the bottom, like a terminal
    const lines = s.log
      .slice(-40)
      .map((e) => `[${(e.ts / 1000).toFixed(2)}s] ${e.text}`)
      .join("\n");
    if (this.logEl.textContent !== lines) {
      this.logEl.textContent = lines;
      this.logEl.scrollTop = this.logEl.scrollHeight;
    }
  }
}
