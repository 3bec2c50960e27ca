/**
 * Console state and the reducer that folds bus traffic into it.
 *
 * Everything the page renders lives in one plain object; the client feeds
 * delivered envelopes through `applyEnvelope` and connection flips through
 * `applyConnection`, and the UI redraws from whatever comes back. Keeping
 * this pure makes the interesting logic testable without a DOM.
 */

import type { Envelope } from "./protocol.js";
import { KEY_BRAIN_STATE, KEY_CAMERA, KEY_JOINTS, KEY_BATTERY, KEY_COMMAND, KEY_REPLY } from "./protocol.js";

export type ConnectionStatus = "connected" | "disconnected";

export interface FaceMark {
  x: number;
  y: number;
}

export interface TransitionNote {
  from: string;
  event: string;
  to: string;
  ts: number;
}

export interface LogEntry {
  ts: number;
  text: string;
}

export interface DashboardState {
  connection: ConnectionStatus;
  face: FaceMark | null;
  headYaw: number;
  headPitch: number;
  fsmState: string;
  lastTransition: TransitionNote | null;
  battery: number | null;
  log: LogEntry[];
}

export const LOG_LIMIT = 200;

export function initialState(): DashboardState {
  return {
    connection: "disconnected",
    face: null,
    headYaw: 0,
    headPitch: 0,
    fsmState: "(unknown)",
    lastTransition: null,
    battery: null,
    log: [],
  };
}

function pushLog(state: DashboardState, ts: number, text: string): void {
  state.log.push({ ts, text });
  if (state.log.length > LOG_LIMIT) {
    state.log.splice(0, state.log.length - LOG_LIMIT);
  }
}

function asNumber(v: unknown): number | null {
  return typeof v === "number" && Number.isFinite(v) ? v : null;
}

/** Fold one delivered envelope into the state. Mutates and returns it. */
export function applyEnvelope(state: DashboardState, env: Envelope): DashboardState {
  const p = env.payload ?? {};
  switch (env.key) {
    case KEY_CAMERA: {
      const face = p["face"];
      if (face && typeof face === "object") {
        const x = asNumber((face as Record<string, unknown>)["x"]);
        const y = asNumber((face as Record<string, unknown>)["y"]);
        state.face = x !== null && y !== null ? { x, y } : null;
      } else {
        state.face = null;
      }
      break;
    }
    case KEY_JOINTS: {
      const angles = p["angles"];
      if (angles && typeof angles === "object") {
        const a = angles as Record<string, unknown>;
        const yaw = asNumber(a["HeadYaw"]);
        const pitch = asNumber(a["HeadPitch"]);
        if (yaw !== null) state.headYaw = yaw;
        if (pitch !== null) state.headPitch = pitch;
      }
      break;
    }
    case KEY_BATTERY: {
      const percent = asNumber(p["percent"]);
      if (percent !== null) state.battery = percent;
      break;
    }
    case KEY_BRAIN_STATE: {
      // Render whatever name arrives, including states this build has
      // never heard of; the brain is the authority on its own vocabulary.
      const to = p["to"];
      if (typeof to === "string" && to.length > 0) {
        const from = typeof p["from"] === "string" ? (p["from"] as string) : "";
        const event = typeof p["event"] === "string" ? (p["event"] as string) : "";
        state.fsmState = to;
        state.lastTransition = { from, event, to, ts: env.ts };
        pushLog(state, env.ts, from ? `${from} --${event}--> ${to}` : `state: ${to}`);
      }
      break;
    }
    case KEY_COMMAND: {
      // ids and methods ride inside the payload on this key
      const cid = typeof p["id"] === "string" ? (p["id"] as string) : "?";
      const method = typeof p["method"] === "string" ? (p["method"] as string) : "?";
      pushLog(state, env.ts, `command ${cid}: ${method}`);
      break;
    }
    case KEY_REPLY: {
      const cid = typeof p["id"] === "string" ? (p["id"] as string) : "?";
      const ok = p["ok"] === true ? "ok" : "failed";
      const detail = typeof p["detail"] === "string" && p["detail"] ? ` (${p["detail"]})` : "";
      pushLog(state, env.ts, `reply ${cid}: ${ok}${detail}`);
      break;
    }
    default:
      break;
  }
  return state;
}

export function applyConnection(state: DashboardState, status: ConnectionStatus): DashboardState {
  if (state.connection !== status) {
    state.connection = status;
    pushLog(state, Date.now(), `bus ${status}`);
  }
  return state;
}
