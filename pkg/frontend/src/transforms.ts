import { Plane, VolumeInfo } from './api.js';

// Slice layout matches the server's rendering:
//   axial (index along z):    rows = y, cols = x
//   sagittal (index along x): rows = z, cols = y
//   coronal (index along y):  rows = z, cols = x

export function planeCount(info: VolumeInfo, plane: Plane): number {
  const [nx, ny, nz] = info.dims;
  return plane === 'axial' ? nz : plane === 'sagittal' ? nx : ny;
}

export function sliceShape(info: VolumeInfo, plane: Plane): { rows: number; cols: number } {
  const [nx, ny, nz] = info.dims;
  if (plane === 'axial') return { rows: ny, cols: nx };
  if (plane === 'sagittal') return { rows: nz, cols: ny };
  return { rows: nz, cols: nx };
}

/** World coordinates (mm) of a pixel on a slice; row/col may be fractional. */
export function pixelToMm(
  info: VolumeInfo,
  plane: Plane,
  index: number,
  row: number,
  col: number,
): [number, number, number] {
  const [ox, oy, oz] = info.origin;
  const [sx, sy, sz] = info.spacing;
  if (plane === 'axial') return [ox + col * sx, oy + row * sy, oz + index * sz];
  if (plane === 'sagittal') return [ox + index * sx, oy + col * sy, oz + row * sz];
  return [ox + col * sx, oy + index * sy, oz + row * sz];
}

/** Fractional slice coordinates of a world point on the given plane. */
export function mmToPixel(
  info: VolumeInfo,
  plane: Plane,
  mm: [number, number, number],
): { index: number; row: number; col: number } {
  const [ox, oy, oz] = info.origin;
  const [sx, sy, sz] = info.spacing;
  const vx = (mm[0] - ox) / sx;
  const vy = (mm[1] - oy) / sy;
  const vz = (mm[2] - oz) / sz;
  if (plane === 'axial') return { index: vz, row: vy, col: vx };
  if (plane === 'sagittal') return { index: vx, row: vz, col: vy };
  return { index: vy, row: vz, col: vx };
}
