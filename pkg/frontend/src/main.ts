/**
 * App wiring: connect, render loop, trial flow, results panel.
 *
 * The render loop never exceeds the server stream rate when sending pad
 * commands, and draws only fields present in the masked state message.
 */

import { CommandRateLimiter, InputSnapshot, inputToCommands } from "./input.js";
import { SessionClient } from "./net.js";
import { buildPlaylist, PlaylistEntry, seededRng } from "./playlist.js";
import { Feedback, SpeedClass, StateMsg, TrialResultMsg } from "./protocol.js";
import { buildScene, paint, ViewModel, ViewTransform } from "./scene.js";

const KEY_PAD_SPEED = 0.25; // m/s for the arrow/WASD pad

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

class App {
  private canvas = el<HTMLCanvasElement>("scene");
  private ctx = this.canvas.getContext("2d")!;
  private client: SessionClient;
  private view: ViewModel;
  private latestState: StateMsg | null = null;
  private results: Array<{ trial: number; label: string; outcome: TrialResultMsg }> = [];
  private playlist: PlaylistEntry[] = [];
  private playlistPos = 0;
  private playlistActive = false;
  private currentLabel = "";
  private keys = new Set<string>();
  private pointer = { dx: 0, dy: 0, active: false, lastX: 0, lastY: 0 };
  private lastFrame = performance.now();
  private limiter: CommandRateLimiter | null = null;
  private descending = false;

  constructor() {
    this.client = new SessionClient({
      onConfig: (msg) => {
        this.limiter = new CommandRateLimiter(msg.stream_rate);
        this.setStatus(`connected (session ${msg.session.slice(0, 8)})`);
      },
      onState: (msg) => {
        this.latestState = msg;
        this.descending = msg.phase === "descending";
      },
      onResult: (msg) => this.onResult(msg),
      onError: (msg) => this.setStatus(`server: ${msg.code}: ${msg.message}`),
      onClose: () => this.setStatus("disconnected"),
    });
    const transform: ViewTransform = {
      pixelsPerMeter: 420,
      originX: this.canvas.width / 2,
      originY: this.canvas.height * 0.78,
    };
    this.view = { config: null, state: null, transform };
    this.bindControls();
    this.bindPointerAndKeys();
    requestAnimationFrame(() => this.frame());
  }

  private serverBase(): string {
    return el<HTMLInputElement>("server").value || window.location.origin;
  }

  private setStatus(text: string): void {
    el<HTMLElement>("status").textContent = text;
  }

  private bindControls(): void {
    el<HTMLButtonElement>("connect").addEventListener("click", () => {
      this.client.connect(this.serverBase());
      this.setStatus("connecting...");
    });
    el<HTMLButtonElement>("start").addEventListener("click", () => {
      this.playlistActive = false;
      this.startTrial(
        el<HTMLSelectElement>("condition").value as Feedback,
        el<HTMLSelectElement>("speed").value as SpeedClass,
      );
    });
    el<HTMLButtonElement>("playlist").addEventListener("click", () => {
      const per = parseInt(el<HTMLInputElement>("per-cell").value, 10) || 5;
      this.playlist = buildPlaylist(per, seededRng(Date.now() >>> 0));
      this.playlistPos = 0;
      this.playlistActive = true;
      this.setStatus(`playlist armed: ${this.playlist.length} trials, upcoming hidden`);
      this.advancePlaylist();
    });
    el<HTMLInputElement>("scale").addEventListener("change", () => {
      const v = parseFloat(el<HTMLInputElement>("scale").value);
      if (Number.isFinite(v) && v > 10) this.view.transform.pixelsPerMeter = v;
    });
  }

  private droneCount(): 1 | 2 {
    return el<HTMLSelectElement>("drones").value === "2" ? 2 : 1;
  }

  private startTrial(condition: Feedback, speed: SpeedClass): void {
    this.currentLabel = `${condition}-${speed}-${this.droneCount()}`;
    this.client.send({
      type: "start_trial",
      condition,
      speed,
      drones: this.droneCount(),
    });
  }

  private advancePlaylist(): void {
    if (!this.playlistActive || this.playlistPos >= this.playlist.length) {
      if (this.playlistActive) this.setStatus("playlist complete");
      this.playlistActive = false;
      return;
    }
    const entry = this.playlist[this.playlistPos++];
    // the upcoming condition stays hidden: no label until the trial starts
    this.startTrial(entry.condition, entry.speed);
    this.setStatus(`playlist trial ${this.playlistPos}/${this.playlist.length}`);
  }

  private onResult(msg: TrialResultMsg): void {
    this.results.push({ trial: msg.trial, label: this.currentLabel, outcome: msg });
    const table = el<HTMLTableSectionElement>("results-body");
    const row = document.createElement("tr");
    const disp = msg.outcomes
      .map((o) => `${o.displacement_mm.toFixed(1)}`)
      .join(" / ");
    const url = this.client.logUrl(this.serverBase(), msg.trial);
    row.innerHTML =
      `<td>${msg.trial}</td><td>${this.currentLabel}</td>` +
      `<td>${disp}${msg.timed_out ? " (timeout)" : ""}</td>` +
      `<td>${url ? `<a href="${url}" download="trial_${msg.trial}.jsonl">log</a>` : ""}</td>`;
    table.appendChild(row);
    if (this.playlistActive) {
      window.setTimeout(() => this.advancePlaylist(), 800);
    }
  }

  private bindPointerAndKeys(): void {
    this.canvas.addEventListener("pointerdown", (e) => {
      this.pointer.active = true;
      this.pointer.lastX = e.clientX;
      this.pointer.lastY = e.clientY;
      this.canvas.setPointerCapture(e.pointerId);
    });
    this.canvas.addEventListener("pointermove", (e) => {
      if (!this.pointer.active) return;
      this.pointer.dx += e.clientX - this.pointer.lastX;
      this.pointer.dy += e.clientY - this.pointer.lastY;
      this.pointer.lastX = e.clientX;
      this.pointer.lastY = e.clientY;
    });
    const release = () => {
      this.pointer.active = false;
    };
    this.canvas.addEventListener("pointerup", release);
    this.canvas.addEventListener("pointercancel", release);
    window.addEventListener("keydown", (e) => this.keys.add(e.key));
    window.addEventListener("keyup", (e) => this.keys.delete(e.key));
  }

  private frame(): void {
    const now = performance.now();
    const dt = Math.min(0.05, Math.max(1e-3, (now - this.lastFrame) / 1000));
    this.lastFrame = now;

    const config = this.client.config;
    if (
      this.descending &&
      config !== null &&
      this.limiter !== null &&
      this.limiter.ready(now / 1000)
    ) {
      const snapshot: InputSnapshot = {
        pointerDx: this.pointer.dx,
        pointerDy: this.pointer.dy,
        pointerActive: this.pointer.active,
        keys: this.keys,
      };
      const commands = inputToCommands(
        snapshot,
        {
          pixelsPerMeter: this.view.transform.pixelsPerMeter,
          maxHandSpeed: config.max_hand_speed,
          keyPadSpeed: KEY_PAD_SPEED,
        },
        dt,
        this.latestState?.pads.length ?? 1,
      );
      for (const c of commands) {
        this.client.send({ type: "pad_cmd", pad: c.pad, vx: c.vx, vy: c.vy });
      }
      this.pointer.dx = 0;
      this.pointer.dy = 0;
    }

    this.view.config = config;
    this.view.state = this.latestState;
    this.view.countdown = this.playlistActive
      ? `trial ${this.playlistPos}/${this.playlist.length}`
      : undefined;
    const nodes = buildScene(this.view);
    paint(this.ctx, nodes, this.view.transform, this.canvas.width, this.canvas.height);
    requestAnimationFrame(() => this.frame());
  }
}

window.addEventListener("load", () => new App());
