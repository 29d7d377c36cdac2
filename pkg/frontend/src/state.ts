import { Plane, SegmentResult, VolumeInfo } from './api.js';
import { planeCount } from './transforms.js';

export interface SegmentParams {
  template: 'cube' | 'sphere';
  edge_mm: number;
  m: number;
  k: number;
  delta: number;
  stats_halfwidth: number;
}

// mirrors the CLI defaults so both front ends behave identically
export const DEFAULT_PARAMS: SegmentParams = {
  template: 'cube',
  edge_mm: 80,
  m: 15,
  k: 40,
  delta: 2,
  stats_halfwidth: 2,
};

export const PARAM_RANGES = {
  edge_mm: { min: 1, max: 500 },
  m: { min: 2, max: 41 },
  k: { min: 2, max: 200 },
  delta: { min: 0, max: 10 },
  stats_halfwidth: { min: 0, max: 10 },
} as const;

export function clampParam(name: keyof typeof PARAM_RANGES, value: number): number {
  const { min, max } = PARAM_RANGES[name];
  if (!Number.isFinite(value)) return min;
  return Math.min(max, Math.max(min, value));
}

export class ViewerState {
  volume: VolumeInfo | null = null;
  plane: Plane = 'axial';
  index = 0;
  seedMm: [number, number, number] | null = null;
  params: SegmentParams = { ...DEFAULT_PARAMS };
  result: SegmentResult | null = null;
  referenceId: number | null = null;
  private inFlight = false;

  get busy(): boolean {
    return this.inFlight;
  }

  setVolume(info: VolumeInfo): void {
    this.volume = info;
    this.index = Math.floor(planeCount(info, this.plane) / 2);
    this.seedMm = null;
    this.result = null;
  }

  setPlane(plane: Plane): void {
    this.plane = plane;
    if (this.volume) {
      this.index = Math.min(this.index, planeCount(this.volume, plane) - 1);
    }
  }

  stepIndex(delta: number): void {
    if (!this.volume) return;
    const last = planeCount(this.volume, this.plane) - 1;
    this.index = Math.min(last, Math.max(0, this.index + delta));
  }

  setParam(name: keyof typeof PARAM_RANGES, value: number): void {
    this.params = { ...this.params, [name]: clampParam(name, value) };
  }

  /** Claim the single in-flight segmentation slot; false when already running. */
  beginRun(): boolean {
    if (this.inFlight || !this.volume || !this.seedMm) return false;
    this.inFlight = true;
    return true;
  }

  endRun(result: SegmentResult | null): void {
    this.inFlight = false;
    if (result) this.result = result;
  }

  /** Contours of the current slice, or [] when none intersect it. */
  currentContours(): number[][][] {
    if (!this.result) return [];
    const perPlane = this.result.per_slice_contours[this.plane];
    if (!perPlane) return [];
    return perPlane[String(this.index)] ?? [];
  }
}
