/**
 * Randomized trial playlist: every (feedback x speed) cell appears the same
 * number of times, order shuffled, upcoming conditions hidden until each
 * trial starts.
 */

import { Feedback, SpeedClass } from "./protocol.js";

export interface PlaylistEntry {
  condition: Feedback;
  speed: SpeedClass;
}

export const FEEDBACKS: Feedback[] = ["V", "T", "VT"];
export const SPEEDS: SpeedClass[] = ["slow", "fast"];

export type Rng = () => number; // [0, 1)

export function buildPlaylist(trialsPerCell: number, rng: Rng = Math.random): PlaylistEntry[] {
  const entries: PlaylistEntry[] = [];
  for (const condition of FEEDBACKS) {
    for (const speed of SPEEDS) {
      for (let k = 0; k < trialsPerCell; k++) {
        entries.push({ condition, speed });
      }
    }
  }
  // Fisher-Yates
  for (let i = entries.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    [entries[i], entries[j]] = [entries[j], entries[i]];
  }
  return entries;
}

export function cellCounts(entries: PlaylistEntry[]): Map<string, number> {
  const counts = new Map<string, number>();
  for (const e of entries) {
    const key = `${e.condition}-${e.speed}`;
    counts.set(key, (counts.get(key) ?? 0) + 1);
  }
  return counts;
}

/** Deterministic rng for tests and reproducible playlists (mulberry32). */
export function seededRng(seed: number): Rng {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
