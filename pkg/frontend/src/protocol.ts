/** Wire frames and message envelopes spoken over the bus WebSocket gateway. */

export type Kind = "data" | "command" | "event" | "reply";

export interface Envelope {
  key: string;
  kind: Kind;
  ts: number;
  id: string;
  payload: Record<string, unknown>;
  reply_to?: string;
}

/** Client -> server frames. */
export interface HelloFrame {
  op: "hello";
  client: string;
}

export interface SubscribeFrame {
  op: "subscribe";
  pattern: string;
  id: string;
}

export interface UnsubscribeFrame {
  op: "unsubscribe";
  sub: string;
  id: string;
}

export interface PublishFrame {
  op: "publish";
  envelope: Envelope;
  id?: string;
}

export type ClientFrame = HelloFrame | SubscribeFrame | UnsubscribeFrame | PublishFrame;

/** Server -> client frames. */
export interface OkFrame {
  op: "ok";
  re: string;
  sub?: string;
}

export interface ErrorFrame {
  op: "error";
  re: string | null;
  code: string;
  message: string;
}

export interface DeliverFrame {
  op: "deliver";
  sub: string;
  envelope: Envelope;
}

export type ServerFrame = OkFrame | ErrorFrame | DeliverFrame;

/** Routing keys the console cares about. */
export const KEY_FACE = "lumen.visual.face";
export const KEY_SPEECH = "lumen.audio.speech";
export const KEY_BRAIN_STATE = "lumen.brain.state";
export const KEY_CAMERA = "avatar.nao.data.camera";
export const KEY_JOINTS = "avatar.nao.data.joints";
export const KEY_BATTERY = "avatar.nao.data.battery";
export const KEY_COMMAND = "avatar.nao.command";
export const KEY_REPLY = "avatar.nao.reply";

/** Every pattern the console subscribes to on connect. */
export const SUBSCRIPTIONS: readonly string[] = [
  "avatar.nao.data.#",
  KEY_BRAIN_STATE,
  KEY_COMMAND,
  KEY_REPLY,
];

export function parseServerFrame(text: string): ServerFrame | null {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const op = (obj as { op?: unknown }).op;
  if (op === "ok" || op === "error" || op === "deliver") {
    return obj as ServerFrame;
  }
  return null;
}
