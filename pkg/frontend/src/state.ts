/** View state: selected model, partner point, trajectories, playback clock. */

import { ModelInfo, SphereCoords, TrajectoryResponse } from "./types.js";

// charts exclude the exact poles; clamp drags into the open interval
const THETA_EPS = 1e-3;

export function clampToChart(coords: SphereCoords): SphereCoords {
  const theta = Math.min(Math.max(coords.theta, THETA_EPS), Math.PI - THETA_EPS);
  let phi = coords.phi % (2 * Math.PI);
  if (phi < 0) phi += 2 * Math.PI;
  return { theta, phi };
}

export interface TrajectoryEntry {
  id: number;
  data: TrajectoryResponse;
}

export class ViewState {
  model: ModelInfo | null = null;
  params: Record<string, number> = {};
  partner: SphereCoords = clampToChart({ theta: Math.PI / 2, phi: Math.PI / 2 });
  gridResolution = 24;
  trajectories: TrajectoryEntry[] = [];
  staleData = false;

  private clock = 0;
  private playing = false;
  private nextId = 1;

  selectModel(model: ModelInfo) {
    this.model = model;
    this.params = { ...model.params };
    this.trajectories = [];
  }

  movePartner(coords: SphereCoords): SphereCoords {
    this.partner = clampToChart(coords);
    return this.partner;
  }

  addTrajectory(data: TrajectoryResponse): TrajectoryEntry {
    const entry = { id: this.nextId++, data };
    this.trajectories.push(entry);
    return entry;
  }

  get playbackClock(): number {
    return this.clock;
  }

  get isPlaying(): boolean {
    return this.playing;
  }

  play() {
    this.playing = true;
  }

  pause() {
    this.playing = false;
  }

  tick(dtSeconds: number) {
    // the clock is monotone while playing; pausing freezes it
    if (this.playing && dtSeconds > 0) this.clock += dtSeconds;
  }

  /** Index of the trajectory sample at or before the playback clock. */
  sampleIndex(entry: TrajectoryEntry): number {
    const times = entry.data.times;
    const horizon = times[times.length - 1];
    const t = horizon > 0 ? this.clock % horizon : 0;
    let lo = 0;
    let hi = times.length - 1;
    while (lo < hi) {
      const mid = (lo + hi + 1) >> 1;
      if (times[mid] <= t) lo = mid;
      else hi = mid - 1;
    }
    return lo;
  }
}
