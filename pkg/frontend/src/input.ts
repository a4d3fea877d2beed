// Keyboard mapping and the per-tick input gate.
//
// Discrete key presses map to actions (arrows move, space interacts). The
// gate keeps only the latest press within a tick window and releases at
// most one input message per incoming state, matching the server's
// last-writer-wins consumption.

import { Action } from "./protocol.js";

export const KEY_ACTIONS: Record<string, Action> = {
  ArrowUp: "North",
  ArrowDown: "South",
  ArrowRight: "East",
  ArrowLeft: "West",
  " ": "Interact",
};

export function actionForKey(key: string): Action | null {
  return KEY_ACTIONS[key] ?? null;
}

export class InputGate {
  private pending: Action | null = null;
  sent = 0;

  press(key: string): Action | null {
    const action = actionForKey(key);
    if (action !== null) {
      this.pending = action;
    }
    return action;
  }

  // Called once per received state (= one tick window elapsed). Returns the
  // single action to transmit, or null when no key was pressed.
  flush(): Action | null {
    const out = this.pending;
    this.pending = null;
    if (out !== null) {
      this.sent += 1;
    }
    return out;
  }
}
