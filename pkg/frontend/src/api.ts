export type Plane = 'axial' | 'sagittal' | 'coronal';

export interface VolumeInfo {
  volume_id: number;
  dims: [number, number, number];
  spacing: [number, number, number];
  origin: [number, number, number];
}

export interface SegmentRequest {
  seed_mm: [number, number, number];
  template: 'cube' | 'sphere';
  edge_mm: number;
  m: number;
  k: number;
  delta: number;
  stats_halfwidth: number;
}

/** plane -> slice index (as string) -> closed polylines of [x, y] pixel points */
export type ContourMap = Record<string, Record<string, number[][][]>>;

export interface SegmentResult {
  mask_id: number;
  cut_value: number;
  warnings: string[];
  per_slice_contours: ContourMap;
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (typeof body.detail === 'string') return body.detail;
  } catch {
    // fall through to the generic message
  }
  return `request failed with status ${response.status}`;
}

export class ApiClient {
  constructor(private baseUrl: string = '') {}

  async uploadVolume(mhd: File, raw?: File): Promise<VolumeInfo> {
    const form = new FormData();
    form.append('mhd', mhd);
    if (raw) form.append('raw', raw);
    const response = await fetch(`${this.baseUrl}/api/v1/volumes`, {
      method: 'POST',
      body: form,
    });
    if (!response.ok) throw new Error(await errorDetail(response));
    return response.json();
  }

  async volumeInfo(volumeId: number): Promise<VolumeInfo> {
    const response = await fetch(`${this.baseUrl}/api/v1/volumes/${volumeId}`);
    if (!response.ok) throw new Error(await errorDetail(response));
    return response.json();
  }

  sliceUrl(volumeId: number, plane: Plane, index: number, window?: [number, number]): string {
    const params = new URLSearchParams({ plane, index: String(index) });
    if (window) params.set('window', `${window[0]},${window[1]}`);
    return `${this.baseUrl}/api/v1/volumes/${volumeId}/slice?${params}`;
  }

  async segment(volumeId: number, body: SegmentRequest): Promise<SegmentResult> {
    const response = await fetch(`${this.baseUrl}/api/v1/volumes/${volumeId}/segment`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw new Error(await errorDetail(response));
    return response.json();
  }

  maskUrl(maskId: number): string {
    return `${this.baseUrl}/api/v1/masks/${maskId}`;
  }

  async dsc(maskId: number, referenceId: number): Promise<number> {
    const response = await fetch(`${this.baseUrl}/api/v1/masks/${maskId}/dsc`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ reference: referenceId }),
    });
    if (!response.ok) throw new Error(await errorDetail(response));
    const body = await response.json();
    return body.dsc;
  }
}
