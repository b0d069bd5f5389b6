/**
 * Input mapping: pointer drag steers pad 0, arrows/WASD steer pad 1.
 *
 * One pointer cannot steer two pads, so the bimanual task is split across
 * devices.  Commands are velocities in m/s, clamped client-side to the
 * server-advertised hand-speed limit before they ever reach the wire.
 */

export interface InputSnapshot {
  pointerDx: number; // pixels moved since the last frame
  pointerDy: number;
  pointerActive: boolean;
  keys: ReadonlySet<string>;
}

export interface InputOptions {
  pixelsPerMeter: number;
  maxHandSpeed: number;
  keyPadSpeed: number; // commanded speed for the key-driven pad, m/s
}

export interface PadVelocity {
  pad: number;
  vx: number;
  vy: number;
}

export function clampSpeed(vx: number, vy: number, limit: number): [number, number] {
  const mag = Math.hypot(vx, vy);
  if (!Number.isFinite(mag)) return [0, 0];
  if (mag <= limit || mag === 0) return [vx, vy];
  return [(vx * limit) / mag, (vy * limit) / mag];
}

const KEYS_UP = ["ArrowUp", "w", "W"];
const KEYS_DOWN = ["ArrowDown", "s", "S"];
const KEYS_LEFT = ["ArrowLeft", "a", "A"];
const KEYS_RIGHT = ["ArrowRight", "d", "D"];

function keyAxis(keys: ReadonlySet<string>, pos: string[], neg: string[]): number {
  const p = pos.some((k) => keys.has(k)) ? 1 : 0;
  const n = neg.some((k) => keys.has(k)) ? 1 : 0;
  return p - n;
}

export function inputToCommands(
  input: InputSnapshot,
  opts: InputOptions,
  dt: number,
  padCount: number,
): PadVelocity[] {
  const commands: PadVelocity[] = [];
  if (dt <= 0 || padCount < 1) return commands;

  // pad 0: drag displacement over dt is a velocity; screen y points down
  let vx = 0;
  let vy = 0;
  if (input.pointerActive) {
    vx = input.pointerDx / opts.pixelsPerMeter / dt;
    vy = -input.pointerDy / opts.pixelsPerMeter / dt;
  }
  [vx, vy] = clampSpeed(vx, vy, opts.maxHandSpeed);
  commands.push({ pad: 0, vx, vy });

  if (padCount >= 2) {
    const ax = keyAxis(input.keys, KEYS_RIGHT, KEYS_LEFT);
    const ay = keyAxis(input.keys, KEYS_UP, KEYS_DOWN);
    let kx = 0;
    let ky = 0;
    if (ax !== 0 || ay !== 0) {
      const mag = Math.hypot(ax, ay);
      const speed = Math.min(opts.keyPadSpeed, opts.maxHandSpeed);
      kx = (ax / mag) * speed;
      ky = (ay / mag) * speed;
    }
    commands.push({ pad: 1, vx: kx, vy: ky });
  }
  return commands;
}

/** Gate outbound pad commands to at most the server stream rate. */
export class CommandRateLimiter {
  private lastSent = -Infinity;

  constructor(private readonly streamRate: number) {}

  ready(nowSeconds: number): boolean {
    if (nowSeconds - this.lastSent >= 1.0 / this.streamRate) {
      this.lastSent = nowSeconds;
      return true;
    }
    return false;
  }
}
