/**
 * Wire protocol types for the session websocket.
 *
 * Fields the server masks per feedback condition are optional here; the
 * client renders only what is present and never reconstructs hidden state.
 * All coordinates are metres in the world frame.
 */

export type Feedback = "V" | "T" | "VT";
export type SpeedClass = "slow" | "fast";
export type Phase = "waiting" | "descending" | "finished";

export interface ConfigMsg {
  type: "config";
  session: string;
  stream_rate: number;
  max_hand_speed: number;
  plate_radius: number;
  start_height: number;
  pad_height: number;
  dt: number;
}

export interface DroneEntry {
  id: number;
  led: boolean;
  x?: number;
  y?: number;
  z?: number;
}

export interface PadEntry {
  id: number;
  x: number;
  y: number;
}

export interface StateMsg {
  type: "state";
  t: number;
  drones: DroneEntry[];
  pads: PadEntry[];
  tactile?: number[][];
  phase: Phase;
}

export interface TrialOutcome {
  drone: number;
  displacement_mm: number;
  dx: number;
  dy: number;
}

export interface TrialResultMsg {
  type: "trial_result";
  trial: number;
  timed_out: boolean;
  outcomes: TrialOutcome[];
}

export interface ErrorMsg {
  type: "error";
  code: string;
  message: string;
}

export type ServerMsg = ConfigMsg | StateMsg | TrialResultMsg | ErrorMsg;

export interface StartTrialCmd {
  type: "start_trial";
  condition: Feedback;
  speed: SpeedClass;
  drones: 1 | 2;
  seed?: number;
}

export interface PadCmd {
  type: "pad_cmd";
  pad: number;
  vx: number;
  vy: number;
}

export interface EndSessionCmd {
  type: "end_session";
}

export type ClientMsg = StartTrialCmd | PadCmd | EndSessionCmd;

export function parseServerMsg(raw: string): ServerMsg | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const type = (doc as { type?: unknown }).type;
  if (type === "config" || type === "state" || type === "trial_result" || type === "error") {
    return doc as ServerMsg;
  }
  return null;
}
