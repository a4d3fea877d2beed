// Wire protocol mirror of the server: JSON text messages over one WebSocket.

export type Orient = "N" | "S" | "E" | "W";
export type Held = "onion" | "dish" | "soup" | null;

export interface PlayerView {
  pos: [number, number];
  orient: Orient;
  held: Held;
}

export interface WorldStateMsg {
  tick: number;
  players: PlayerView[];
  pots: [number, number][]; // [onion_count, cook_timer]
  counters: [[number, number], Exclude<Held, null>][];
  score: number;
}

export interface HelloMsg {
  type: "hello";
  layout: { name: string; grid: string; width: number; height: number };
  seat: 0 | 1;
  tick_ms: number;
  horizon: number;
  round: number;
  episode: number;
  partner_label: string;
}

export interface StateMsg {
  type: "state";
  tick: number;
  state: WorldStateMsg;
  score: number;
  round: number;
  episode: number;
  partner_label: string;
  digest: string;
}

export interface RoundEndMsg {
  type: "round_end";
  round: number;
  scores: number[];
}

export interface PromptPreferenceMsg {
  type: "prompt_preference";
  round: number;
  labels: string[];
}

export interface DoneMsg {
  type: "done";
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type ServerMsg =
  | HelloMsg
  | StateMsg
  | RoundEndMsg
  | PromptPreferenceMsg
  | DoneMsg
  | ErrorMsg;

export type Action = "North" | "South" | "East" | "West" | "Stay" | "Interact";

export const ACTIONS: readonly Action[] = [
  "North",
  "South",
  "East",
  "West",
  "Stay",
  "Interact",
];

export function parseServerMessage(raw: string): ServerMsg {
  const obj = JSON.parse(raw);
  if (typeof obj !== "object" || obj === null || typeof obj.type !== "string") {
    throw new Error("malformed server message");
  }
  switch (obj.type) {
    case "hello":
    case "state":
    case "round_end":
    case "prompt_preference":
    case "done":
    case "error":
      return obj as ServerMsg;
    default:
      throw new Error(`unknown server message type ${obj.type}`);
  }
}

export function joinMessage(session: string): string {
  return JSON.stringify({ type: "join", session });
}

export function inputMessage(action: Action): string {
  return JSON.stringify({ type: "input", action });
}

export function preferenceMessage(choice: -1 | 1): string {
  return JSON.stringify({ type: "preference", choice });
}
