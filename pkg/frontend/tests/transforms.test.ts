import { describe, expect, it } from 'vitest';

import { Plane, VolumeInfo } from '../src/api.js';
import { mmToPixel, pixelToMm, planeCount, sliceShape } from '../src/transforms.js';

const INFO: VolumeInfo = {
  volume_id: 1,
  dims: [40, 50, 60],
  spacing: [0.7, 1.0, 2.5],
  origin: [-10, 5, 0],
};

const PLANES: Plane[] = ['axial', 'sagittal', 'coronal'];

describe('plane geometry', () => {
  it('counts slices along the orthogonal axis', () => {
    expect(planeCount(INFO, 'axial')).toBe(60);
    expect(planeCount(INFO, 'sagittal')).toBe(40);
    expect(planeCount(INFO, 'coronal')).toBe(50);
  });

  it('matches the server slice shapes', () => {
    expect(sliceShape(INFO, 'axial')).toEqual({ rows: 50, cols: 40 });
    expect(sliceShape(INFO, 'sagittal')).toEqual({ rows: 60, cols: 50 });
    expect(sliceShape(INFO, 'coronal')).toEqual({ rows: 60, cols: 40 });
  });
});

describe('pixel/mm round trips', () => {
  it('round-trips within half a voxel on every plane', () => {
    for (const plane of PLANES) {
      for (let trial = 0; trial < 50; trial++) {
        const index = Math.floor(Math.random() * planeCount(INFO, plane));
        const { rows, cols } = sliceShape(INFO, plane);
        const row = Math.random() * (rows - 1);
        const col = Math.random() * (cols - 1);
        const mm = pixelToMm(INFO, plane, index, row, col);
        const back = mmToPixel(INFO, plane, mm);
        expect(Math.abs(back.index - index)).toBeLessThan(0.5);
        expect(Math.abs(back.row - row)).toBeLessThan(0.5);
        expect(Math.abs(back.col - col)).toBeLessThan(0.5);
      }
    }
  });

  it('maps a point consistently across all three planes', () => {
    // a seed clicked on one plane must land on the same world point
    const mm = pixelToMm(INFO, 'sagittal', 12, 30.5, 20.25);
    for (const plane of PLANES) {
      const pix = mmToPixel(INFO, plane, mm);
      const roundTrip = pixelToMm(INFO, plane, pix.index, pix.row, pix.col);
      expect(roundTrip[0]).toBeCloseTo(mm[0], 9);
      expect(roundTrip[1]).toBeCloseTo(mm[1], 9);
      expect(roundTrip[2]).toBeCloseTo(mm[2], 9);
    }
  });

  it('voxel (0,0,0) center sits at the origin', () => {
    expect(pixelToMm(INFO, 'axial', 0, 0, 0)).toEqual([-10, 5, 0]);
  });

  it('accounts for anisotropic spacing', () => {
    const mm = pixelToMm(INFO, 'axial', 2, 0, 0);
    expect(mm[2]).toBeCloseTo(5.0); // 2 slices at 2.5 mm
    const pix = mmToPixel(INFO, 'sagittal', [-10 + 0.7 * 7, 5, 0]);
    expect(pix.index).toBeCloseTo(7);
  });
});
