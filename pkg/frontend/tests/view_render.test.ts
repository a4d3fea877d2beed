import { describe, expect, it } from "vitest";

import { HelloMsg, StateMsg } from "../src/protocol.js";
import { DrawSurface, TILE, drawHud, drawState } from "../src/renderer.js";
import { LatestStateBuffer, gridRows, hudFrom } from "../src/view.js";

const hello: HelloMsg = {
  type: "hello",
  layout: {
    name: "cramped_room",
    grid: "XXPXX\nO  2O\nX1  X\nXDXSX\n",
    width: 5,
    height: 4,
  },
  seat: 0,
  tick_ms: 150,
  horizon: 400,
  round: 0,
  episode: 0,
  partner_label: "A",
};

function stateMsg(tick: number, score: number): StateMsg {
  return {
    type: "state",
    tick,
    score,
    round: 0,
    episode: 0,
    partner_label: "A",
    digest: "d",
    state: {
      tick,
      score,
      players: [
        { pos: [1, 2], orient: "N", held: "onion" },
        { pos: [3, 1], orient: "S", held: null },
      ],
      pots: [[3, 7]],
      counters: [[[1, 0], "dish"]],
    },
  };
}

class RecordingSurface implements DrawSurface {
  fillStyle = "";
  strokeStyle = "";
  font = "";
  calls: string[] = [];
  texts: string[] = [];
  fillRect(x: number, y: number, w: number, h: number): void {
    this.calls.push(`fillRect ${x},${y}`);
  }
  strokeRect(): void {
    this.calls.push("strokeRect");
  }
  beginPath(): void {
    this.calls.push("beginPath");
  }
  arc(): void {
    this.calls.push("arc");
  }
  fill(): void {
    this.calls.push("fill");
  }
  fillText(text: string): void {
    this.texts.push(text);
  }
}

describe("view", () => {
  it("derives HUD fields from the latest state", () => {
    const hud = hudFrom(hello, stateMsg(150, 40));
    expect(hud.score).toBe(40);
    expect(hud.ticksRemaining).toBe(250);
    expect(hud.partnerLabel).toBe("A");
  });

  it("splits the layout grid into rows", () => {
    const rows = gridRows(hello);
    expect(rows).toHaveLength(4);
    expect(rows[0]).toBe("XXPXX");
  });

  it("one-slot buffer drops stale frames", () => {
    const buf = new LatestStateBuffer();
    buf.push(stateMsg(1, 0));
    buf.push(stateMsg(2, 0));
    buf.push(stateMsg(3, 0));
    const latest = buf.take();
    expect(latest?.tick).toBe(3);
    expect(buf.dropped).toBe(2);
    expect(buf.take()).toBeNull();
  });
});

describe("renderer", () => {
  it("draws every tile plus players, items and pot label", () => {
    const ctx = new RecordingSurface();
    drawState(ctx, hello, stateMsg(10, 20));
    const tilePaints = ctx.calls.filter((c) => c.startsWith("fillRect")).length;
    expect(tilePaints).toBe(5 * 4);
    // two players + facing markers + held item + counter item = arcs
    const arcs = ctx.calls.filter((c) => c === "arc").length;
    expect(arcs).toBeGreaterThanOrEqual(5);
    expect(ctx.texts.some((t) => t === "7")).toBe(true); // cook timer label
  });

  it("hud text carries score and remaining ticks", () => {
    const ctx = new RecordingSurface();
    drawHud(ctx, hello, stateMsg(390, 60), hello.layout.height * TILE + 20);
    expect(ctx.texts[0]).toContain("score 60");
    expect(ctx.texts[0]).toContain("ticks left 10");
    expect(ctx.texts[0]).toContain("partner A");
  });
});
