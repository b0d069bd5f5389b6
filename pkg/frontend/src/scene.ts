/**
 * Top-down scene construction and painting.
 *
 * buildScene is pure: it maps the latest (already masked) state message to
 * a display list, which makes the masking contract testable -- a T-condition
 * message can never yield a drone marker because the coordinates simply are
 * not there.  paint() walks the list onto a canvas 2D context.
 */

import { ConfigMsg, StateMsg } from "./protocol.js";

export interface ViewTransform {
  pixelsPerMeter: number;
  originX: number; // world (0,0) in canvas pixels
  originY: number;
}

export interface ViewModel {
  config: ConfigMsg | null;
  state: StateMsg | null;
  transform: ViewTransform;
  countdown?: string;
}

export type SceneNode =
  | { kind: "pad"; x: number; y: number; r: number }
  | { kind: "glow"; x: number; y: number; r: number; opacity: number }
  | { kind: "drone"; x: number; y: number; led: boolean }
  | { kind: "altitude-ring"; x: number; y: number; r: number }
  | { kind: "banner"; text: string };

// Tactor layout mirrored from the pad hardware: six units on a 40 mm ring
// plus one at the centre, unit 0 on +X.
export const UNIT_OFFSETS: ReadonlyArray<readonly [number, number]> = (() => {
  const ring = 0.04;
  const pts: Array<readonly [number, number]> = [];
  for (let i = 0; i < 6; i++) {
    const a = (Math.PI / 3) * i;
    pts.push([ring * Math.cos(a), ring * Math.sin(a)] as const);
  }
  pts.push([0, 0] as const);
  return pts;
})();

const GLOW_RADIUS_M = 0.009;
const MIN_ALTITUDE_RING_M = 0.012;
const MAX_ALTITUDE_RING_M = 0.22;

export function toPixels(tf: ViewTransform, wx: number, wy: number): [number, number] {
  // +Y (away from the operator) points up the screen
  return [tf.originX + wx * tf.pixelsPerMeter, tf.originY - wy * tf.pixelsPerMeter];
}

export function buildScene(view: ViewModel): SceneNode[] {
  const nodes: SceneNode[] = [];
  const state = view.state;
  if (state === null) {
    nodes.push({ kind: "banner", text: "connecting..." });
    return nodes;
  }
  const plateRadius = view.config?.plate_radius ?? 0.08;
  const startHeight = view.config?.start_height ?? 2.0;
  const padHeight = view.config?.pad_height ?? 1.1;

  for (const pad of state.pads) {
    nodes.push({ kind: "pad", x: pad.x, y: pad.y, r: plateRadius });
    const amps = state.tactile?.[pad.id];
    if (amps) {
      UNIT_OFFSETS.forEach(([ux, uy], i) => {
        nodes.push({
          kind: "glow",
          x: pad.x + ux,
          y: pad.y + uy,
          r: GLOW_RADIUS_M,
          opacity: Math.max(0, Math.min(1, amps[i] ?? 0)),
        });
      });
    }
  }

  for (const drone of state.drones) {
    if (drone.x === undefined || drone.y === undefined) {
      continue; // masked: nothing to draw, by construction
    }
    nodes.push({ kind: "drone", x: drone.x, y: drone.y, led: drone.led });
    if (drone.z !== undefined) {
      const span = Math.max(1e-6, startHeight - padHeight);
      const frac = Math.max(0, Math.min(1, (drone.z - padHeight) / span));
      const r = MIN_ALTITUDE_RING_M + frac * (MAX_ALTITUDE_RING_M - MIN_ALTITUDE_RING_M);
      nodes.push({ kind: "altitude-ring", x: drone.x, y: drone.y, r });
    }
  }

  let banner = `phase: ${state.phase}  t=${state.t.toFixed(2)}s`;
  if (view.countdown) banner = `${view.countdown}  |  ${banner}`;
  nodes.push({ kind: "banner", text: banner });
  return nodes;
}

/** The canvas surface buildScene's output is painted onto. */
export interface Canvas2DLike {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  globalAlpha: number;
  lineWidth: number;
  font: string;
}

export function paint(
  ctx: Canvas2DLike,
  nodes: SceneNode[],
  tf: ViewTransform,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.globalAlpha = 1;
  for (const node of nodes) {
    switch (node.kind) {
      case "pad": {
        const [px, py] = toPixels(tf, node.x, node.y);
        ctx.globalAlpha = 1;
        ctx.beginPath();
        ctx.arc(px, py, node.r * tf.pixelsPerMeter, 0, 2 * Math.PI);
        ctx.fillStyle = "#2b3442";
        ctx.fill();
        ctx.strokeStyle = "#5b6b80";
        ctx.lineWidth = 2;
        ctx.stroke();
        break;
      }
      case "glow": {
        const [px, py] = toPixels(tf, node.x, node.y);
        ctx.globalAlpha = node.opacity;
        ctx.beginPath();
        ctx.arc(px, py, node.r * tf.pixelsPerMeter, 0, 2 * Math.PI);
        ctx.fillStyle = "#ffb43c";
        ctx.fill();
        ctx.globalAlpha = 1;
        break;
      }
      case "drone": {
        const [px, py] = toPixels(tf, node.x, node.y);
        ctx.beginPath();
        ctx.arc(px, py, 7, 0, 2 * Math.PI);
        ctx.fillStyle = node.led ? "#7fd4ff" : "#9aa4b0";
        ctx.fill();
        break;
      }
      case "altitude-ring": {
        const [px, py] = toPixels(tf, node.x, node.y);
        ctx.beginPath();
        ctx.arc(px, py, node.r * tf.pixelsPerMeter, 0, 2 * Math.PI);
        ctx.strokeStyle = "#7fd4ff";
        ctx.lineWidth = 1;
        ctx.stroke();
        break;
      }
      case "banner": {
        ctx.fillStyle = "#e8edf4";
        ctx.font = "14px system-ui, sans-serif";
        ctx.fillText(node.text, 12, 20);
        break;
      }
    }
  }
}
