/**
 * Thin websocket wrapper: parses inbound frames, exposes typed callbacks,
 * sends client commands.
 */

import { ClientMsg, ConfigMsg, ErrorMsg, ServerMsg, StateMsg, TrialResultMsg, parseServerMsg } from "./protocol.js";

export interface SessionCallbacks {
  onConfig?(msg: ConfigMsg): void;
  onState?(msg: StateMsg): void;
  onResult?(msg: TrialResultMsg): void;
  onError?(msg: ErrorMsg): void;
  onClose?(): void;
}

export class SessionClient {
  private ws: WebSocket | null = null;
  config: ConfigMsg | null = null;

  constructor(private readonly callbacks: SessionCallbacks) {}

  connect(serverBase: string): void {
    this.close();
    const url = serverBase.replace(/^http/, "ws").replace(/\/$/, "") + "/ws";
    const ws = new WebSocket(url);
    this.ws = ws;
    ws.addEventListener("message", (event) => {
      const msg = dispatchable(event.data);
      if (msg === null) return;
      this.handle(msg);
    });
    ws.addEventListener("close", () => {
      if (this.ws === ws) this.ws = null;
      this.callbacks.onClose?.();
    });
  }

  private handle(msg: ServerMsg): void {
    switch (msg.type) {
      case "config":
        this.config = msg;
        this.callbacks.onConfig?.(msg);
        break;
      case "state":
        this.callbacks.onState?.(msg);
        break;
      case "trial_result":
        this.callbacks.onResult?.(msg);
        break;
      case "error":
        this.callbacks.onError?.(msg);
        break;
    }
  }

  send(msg: ClientMsg): void {
    if (this.ws !== null && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
    }
  }

  connected(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  close(): void {
    if (this.ws !== null) {
      this.ws.close();
      this.ws = null;
    }
  }

  logUrl(serverBase: string, trial: number): string | null {
    if (this.config === null) return null;
    const base = serverBase.replace(/\/$/, "");
    return `${base}/sessions/${this.config.session}/trials/${trial}/log`;
  }
}

function dispatchable(data: unknown): ServerMsg | null {
  if (typeof data !== "string") return null;
  return parseServerMsg(data);
}
