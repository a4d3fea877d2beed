// 2D tile rendering with plain canvas primitives. The draw surface is a
// minimal structural subset of CanvasRenderingContext2D so tests can pass a
// recording fake.

import { HelloMsg, StateMsg, Orient } from "./protocol.js";
import { gridRows } from "./view.js";

export interface DrawSurface {
  fillStyle: string;
  strokeStyle: string;
  font: string;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

export const TILE = 48;

const TERRAIN_COLORS: Record<string, string> = {
  X: "#8d6e63", // counter
  " ": "#efebe9", // floor
  P: "#37474f", // pot
  O: "#fbc02d", // onion dispenser
  D: "#90a4ae", // dish dispenser
  S: "#66bb6a", // serving counter
  "1": "#efebe9",
  "2": "#efebe9",
};

const PLAYER_COLORS = ["#1e88e5", "#43a047"]; // seat 0 blue, seat 1 green

const ITEM_COLORS: Record<string, string> = {
  onion: "#f9a825",
  dish: "#eceff1",
  soup: "#ef6c00",
};

const ORIENT_OFFSETS: Record<Orient, [number, number]> = {
  N: [0, -1],
  S: [0, 1],
  E: [1, 0],
  W: [-1, 0],
};

export function drawTerrain(ctx: DrawSurface, hello: HelloMsg): void {
  const rows = gridRows(hello);
  for (let y = 0; y < rows.length; y++) {
    for (let x = 0; x < rows[y].length; x++) {
      ctx.fillStyle = TERRAIN_COLORS[rows[y][x]] ?? "#000000";
      ctx.fillRect(x * TILE, y * TILE, TILE, TILE);
      ctx.strokeStyle = "#d7ccc8";
      ctx.strokeRect(x * TILE, y * TILE, TILE, TILE);
    }
  }
}

export function drawState(ctx: DrawSurface, hello: HelloMsg, msg: StateMsg): void {
  drawTerrain(ctx, hello);
  const rows = gridRows(hello);

  // counter items
  for (const [[x, y], item] of msg.state.counters) {
    ctx.fillStyle = ITEM_COLORS[item];
    ctx.beginPath();
    ctx.arc(x * TILE + TILE / 2, y * TILE + TILE / 2, TILE / 5, 0, Math.PI * 2);
    ctx.fill();
  }

  // pot fill and cook timer
  let potIndex = 0;
  for (let y = 0; y < rows.length; y++) {
    for (let x = 0; x < rows[y].length; x++) {
      if (rows[y][x] !== "P") continue;
      const [onions, timer] = msg.state.pots[potIndex++] ?? [0, 0];
      ctx.fillStyle = "#ffffff";
      ctx.font = "12px monospace";
      const label = timer > 0 ? `${timer}` : onions === 3 ? "ready" : `${onions}/3`;
      ctx.fillText(label, x * TILE + 6, y * TILE + TILE - 8);
    }
  }

  // players with facing marker and held item
  msg.state.players.forEach((p, i) => {
    const [x, y] = p.pos;
    ctx.fillStyle = PLAYER_COLORS[i];
    ctx.beginPath();
    ctx.arc(x * TILE + TILE / 2, y * TILE + TILE / 2, TILE / 3, 0, Math.PI * 2);
    ctx.fill();
    const [dx, dy] = ORIENT_OFFSETS[p.orient];
    ctx.fillStyle = "#263238";
    ctx.beginPath();
    ctx.arc(
      x * TILE + TILE / 2 + (dx * TILE) / 3,
      y * TILE + TILE / 2 + (dy * TILE) / 3,
      TILE / 10,
      0,
      Math.PI * 2,
    );
    ctx.fill();
    if (p.held !== null) {
      ctx.fillStyle = ITEM_COLORS[p.held];
      ctx.beginPath();
      ctx.arc(x * TILE + TILE / 2, y * TILE + TILE / 4, TILE / 8, 0, Math.PI * 2);
      ctx.fill();
    }
  });
}

export function drawHud(
  ctx: DrawSurface,
  hello: HelloMsg,
  msg: StateMsg,
  y: number,
): void {
  ctx.fillStyle = "#212121";
  ctx.font = "16px sans-serif";
  const remaining = Math.max(0, hello.horizon - msg.tick);
  ctx.fillText(
    `score ${msg.score}  ticks left ${remaining}  round ${msg.round + 1}` +
      `  episode ${msg.episode + 1}  partner ${msg.partner_label}`,
    8,
    y,
  );
}
