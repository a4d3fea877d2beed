// Browser entry point: connects to the play server, renders state frames,
// forwards keyboard input, and shows the between-round preference prompt.

import { InputGate } from "./input.js";
import {
  HelloMsg,
  StateMsg,
  inputMessage,
  joinMessage,
  parseServerMessage,
  preferenceMessage,
} from "./protocol.js";
import { DrawSurface, TILE, drawHud, drawState } from "./renderer.js";
import { LatestStateBuffer } from "./view.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/ws`;
}

function sessionId(): string {
  const params = new URLSearchParams(location.search);
  const given = params.get("session");
  if (given) return given;
  return Math.random().toString(36).slice(2, 14);
}

class Client {
  private ws: WebSocket | null = null;
  private hello: HelloMsg | null = null;
  private buffer = new LatestStateBuffer();
  private gate = new InputGate();
  private lastFrame: StateMsg | null = null;
  private session = sessionId();

  constructor(
    private canvas: HTMLCanvasElement,
    private banner: HTMLElement,
    private prefPanel: HTMLElement,
  ) {}

  connect(): void {
    this.banner.textContent = "connecting...";
    const ws = new WebSocket(wsUrl());
    this.ws = ws;
    ws.onopen = () => {
      this.banner.textContent = "";
      ws.send(joinMessage(this.session));
    };
    ws.onmessage = (ev) => this.onMessage(String(ev.data));
    ws.onclose = () => {
      this.banner.textContent = "disconnected - retrying...";
      setTimeout(() => this.connect(), 1000);
    };
  }

  private onMessage(raw: string): void {
    const msg = parseServerMessage(raw);
    switch (msg.type) {
      case "hello": {
        this.hello = msg;
        this.canvas.width = msg.layout.width * TILE;
        this.canvas.height = msg.layout.height * TILE + 28;
        this.banner.textContent =
          `you are the ${msg.seat === 0 ? "blue" : "green"} chef - ` +
          `arrows move, space interacts`;
        break;
      }
      case "state": {
        this.buffer.push(msg);
        const action = this.gate.flush();
        if (action !== null && this.ws) {
          this.ws.send(inputMessage(action));
        }
        break;
      }
      case "round_end":
        this.banner.textContent = `round over - scores ${msg.scores.join(" / ")}`;
        break;
      case "prompt_preference":
        this.prefPanel.style.display = "block";
        break;
      case "done":
        this.banner.textContent = "session complete - thanks for playing";
        this.prefPanel.style.display = "none";
        break;
      case "error":
        this.banner.textContent = `server error: ${msg.message}`;
        break;
    }
  }

  onKey(key: string): void {
    if (this.gate.press(key) !== null) {
      return;
    }
  }

  sendPreference(choice: -1 | 1): void {
    this.ws?.send(preferenceMessage(choice));
    this.prefPanel.style.display = "none";
  }

  renderLoop(): void {
    const ctx = this.canvas.getContext("2d") as unknown as DrawSurface;
    const frame = () => {
      const latest = this.buffer.take();
      if (latest !== null) {
        this.lastFrame = latest;
      }
      if (ctx && this.hello && this.lastFrame) {
        drawState(ctx, this.hello, this.lastFrame);
        drawHud(ctx, this.hello, this.lastFrame, this.hello.layout.height * TILE + 20);
      }
      requestAnimationFrame(frame);
    };
    requestAnimationFrame(frame);
  }
}

function boot(): void {
  const client = new Client(
    el<HTMLCanvasElement>("board"),
    el<HTMLElement>("banner"),
    el<HTMLElement>("preference"),
  );
  document.addEventListener("keydown", (ev) => {
    if (ev.key in { ArrowUp: 1, ArrowDown: 1, ArrowLeft: 1, ArrowRight: 1, " ": 1 }) {
      ev.preventDefault();
    }
    client.onKey(ev.key);
  });
  el<HTMLButtonElement>("prefer-a").onclick = () => client.sendPreference(-1);
  el<HTMLButtonElement>("prefer-b").onclick = () => client.sendPreference(1);
  client.connect();
  client.renderLoop();
}

boot();
