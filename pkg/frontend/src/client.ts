/**
 * Bus client for the operator console.
 *
 * Owns one WebSocket to the gateway, keeps it alive with exponential
 * backoff, and folds everything it hears into a DashboardState. The
 * socket constructor and the clock are injectable, which lets the test
 * suite run the whole connection lifecycle on fake time.
 */

import type { ClientFrame, Envelope } from "./protocol.js";
import { KEY_FACE, KEY_SPEECH, SUBSCRIPTIONS, parseServerFrame } from "./protocol.js";
import type { DashboardState } from "./state.js";
import { applyConnection, applyEnvelope, initialState } from "./state.js";
import { insideFrame, unproject } from "./projection.js";
import type { Timers } from "./util.js";
import { Throttle, realTimers } from "./util.js";

export interface WsLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
}

export type WsFactory = (url: string) => WsLike;

export interface ClientOptions {
  wsFactory?: WsFactory;
  timers?: Timers;
  clientName?: string;
}

const BACKOFF_FIRST_MS = 250;
const BACKOFF_MAX_MS = 4000;
// Face drags are throttled to at most one publish per interval; 67 ms
// keeps a continuous drag just under 15 Hz while staying above 10 Hz.
const FACE_INTERVAL_MS = 67;

export class ConsoleClient {
  readonly state: DashboardState = initialState();

  private readonly timers: Timers;
  private readonly wsFactory: WsFactory;
  private readonly clientName: string;
  private readonly faceThrottle: Throttle;
  private readonly listeners: Array<(s: DashboardState) => void> = [];

  private ws: WsLike | null = null;
  private nextEnvelope = 1;
  private nextFrame = 1;
  private backoff = BACKOFF_FIRST_MS;
  private reconnectHandle: unknown = null;
  private stopped = true;

  constructor(private readonly url: string, opts: ClientOptions = {}) {
    this.timers = opts.timers ?? realTimers;
    this.wsFactory = opts.wsFactory ?? ((u) => new WebSocket(u) as unknown as WsLike);
    this.clientName = opts.clientName ?? "operator-console";
    this.faceThrottle = new Throttle(FACE_INTERVAL_MS, this.timers);
  }

  onChange(fn: (s: DashboardState) => void): void {
    this.listeners.push(fn);
  }

  connect(): void {
    this.stopped = false;
    this.open();
  }

  stop(): void {
    this.stopped = true;
    if (this.reconnectHandle !== null) {
      this.timers.clearTimeout(this.reconnectHandle);
      this.reconnectHandle = null;
    }
    this.faceThrottle.cancel();
    this.ws?.close();
    this.ws = null;
  }

  // -- operator inputs -------------------------------------------------------

  /**
   * Pointer moved to a frame pixel while dragging the simulated visitor.
   * Converts through the camera model at the current head pose and
   * publishes at a bounded rate.
   */
  dragFace(px: number, py: number): void {
    const b = unproject(this.state.headYaw, this.state.headPitch, px, py);
    this.faceThrottle.run(() => this.publishFace(b.azimuth, b.elevation));
  }

  /**
   * Pointer released. Inside the frame the face stays where it was
   * dropped; outside, the visitor is cleared.
   */
  releaseFace(px: number, py: number): void {
    this.faceThrottle.cancel();
    if (insideFrame(px, py)) {
      const b = unproject(this.state.headYaw, this.state.headPitch, px, py);
      this.publishFace(b.azimuth, b.elevation);
    } else {
      this.publishFace(null, 0);
    }
  }

  /** Queue a typed line for the speech pipeline. Empty input is a no-op. */
  sendUtterance(text: string): void {
    if (text === "") return;
    this.publish(KEY_SPEECH, { text });
  }

  // -- socket lifecycle ------------------------------------------------------

  private open(): void {
    const ws = this.wsFactory(this.url);
    this.ws = ws;
    ws.onopen = () => this.handleOpen(ws);
    ws.onclose = () => this.handleClose(ws);
    ws.onerror = () => {
      // close always follows an error; nothing extra to do here
    };
    ws.onmessage = (ev) => this.handleMessage(String(ev.data));
  }

  private handleOpen(ws: WsLike): void {
    if (ws !== this.ws) return;
    this.backoff = BACKOFF_FIRST_MS;
    this.sendFrame({ op: "hello", client: this.clientName });
    for (const pattern of SUBSCRIPTIONS) {
      this.sendFrame({ op: "subscribe", pattern, id: `f-${this.nextFrame++}` });
    }
    applyConnection(this.state, "connected");
    this.notify();
  }

  private handleClose(ws: WsLike): void {
    if (ws !== this.ws) return;
    this.ws = null;
    applyConnection(this.state, "disconnected");
    this.notify();
    if (!this.stopped) this.scheduleReconnect();
  }

  private scheduleReconnect(): void {
    if (this.reconnectHandle !== null) return;
    const delay = this.backoff;
    this.backoff = Math.min(this.backoff * 2, BACKOFF_MAX_MS);
    this.reconnectHandle = this.timers.setTimeout(() => {
      this.reconnectHandle = null;
      if (!this.stopped) this.open();
    }, delay);
  }

  private handleMessage(text: string): void {
    const frame = parseServerFrame(text);
    if (frame === null) return;
    if (frame.op === "deliver") {
      applyEnvelope(this.state, frame.envelope);
      this.notify();
    }
    // ok and error frames need no action: subscriptions are fire-and-forget
    // from the console's point of view, and a fatal error closes the socket.
  }

  // -- publishing ------------------------------------------------------------

  private publishFace(azimuth: number | null, elevation: number): void {
    this.publish(KEY_FACE, { azimuth, elevation });
  }

  private publish(key: string, payload: Record<string, unknown>): void {
    const envelope: Envelope = {
      key,
      kind: "data",
      ts: Math.round(this.timers.now()),
      id: `web-${this.nextEnvelope++}`,
      payload,
    };
    this.sendFrame({ op: "publish", envelope });
  }

  private sendFrame(frame: ClientFrame): void {
    this.ws?.send(JSON.stringify(frame));
  }

  private notify(): void {
    for (const fn of this.listeners) fn(this.state);
  }
}
