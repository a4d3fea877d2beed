import { describe, expect, it } from "vitest";

import { InputGate, actionForKey } from "../src/input.js";

describe("key mapping", () => {
  it("maps arrows to movement and space to interact", () => {
    expect(actionForKey("ArrowUp")).toBe("North");
    expect(actionForKey("ArrowDown")).toBe("South");
    expect(actionForKey("ArrowRight")).toBe("East");
    expect(actionForKey("ArrowLeft")).toBe("West");
    expect(actionForKey(" ")).toBe("Interact");
    expect(actionForKey("x")).toBeNull();
  });
});

describe("input gate", () => {
  it("releases exactly one message per tick window", () => {
    const gate = new InputGate();
    gate.press("ArrowUp");
    gate.press("ArrowUp");
    gate.press("ArrowUp");
    expect(gate.flush()).toBe("North");
    expect(gate.flush()).toBeNull(); // nothing new this window
    expect(gate.sent).toBe(1);
  });

  it("last writer wins within a window", () => {
    const gate = new InputGate();
    gate.press("ArrowUp");
    gate.press("ArrowLeft");
    gate.press(" ");
    expect(gate.flush()).toBe("Interact");
  });

  it("ignores unmapped keys without clobbering the pending action", () => {
    const gate = new InputGate();
    gate.press("ArrowRight");
    gate.press("q");
    expect(gate.flush()).toBe("East");
  });

  it("no press means no message (server defaults to Stay)", () => {
    const gate = new InputGate();
    expect(gate.flush()).toBeNull();
    expect(gate.sent).toBe(0);
  });
});
