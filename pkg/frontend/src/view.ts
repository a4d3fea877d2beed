// Client view model: a pure projection of the latest server state message.
// The client never simulates; stale frames are simply dropped.

import { HelloMsg, StateMsg } from "./protocol.js";

export interface Hud {
  score: number;
  ticksRemaining: number;
  round: number;
  episode: number;
  partnerLabel: string;
}

export class LatestStateBuffer {
  // One-slot buffer: rendering always consumes the newest state, old frames
  // are dropped if the renderer falls behind the network.
  private slot: StateMsg | null = null;
  dropped = 0;

  push(msg: StateMsg): void {
    if (this.slot !== null) {
      this.dropped += 1;
    }
    this.slot = msg;
  }

  take(): StateMsg | null {
    const out = this.slot;
    this.slot = null;
    return out;
  }
}

export function hudFrom(hello: HelloMsg, state: StateMsg): Hud {
  return {
    score: state.score,
    ticksRemaining: Math.max(0, hello.horizon - state.tick),
    round: state.round,
    episode: state.episode,
    partnerLabel: state.partner_label,
  };
}

export function gridRows(hello: HelloMsg): string[] {
  const rows = hello.layout.grid.split("\n").filter((r) => r.length > 0);
  if (rows.length !== hello.layout.height) {
    throw new Error(
      `grid rows ${rows.length} != height ${hello.layout.height}`,
    );
  }
  return rows;
}
