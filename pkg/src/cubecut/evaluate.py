"""Quantitative evaluation: Dice coefficient, volumes, and synthetic phantoms."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .volume import Volume


def dsc(mask_a: np.ndarray, mask_b: np.ndarray) -> float:
    """Dice Similarity Coefficient 2|A n B| / (|A| + |B|), in [0, 1]."""
    a = np.asarray(mask_a) != 0
    b = np.asarray(mask_b) != 0
    if a.shape != b.shape:
        raise ValueError(f"mask dims differ: {a.shape} vs {b.shape}")
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        raise ValueError("DSC undefined for two empty masks")
    return 2.0 * int((a & b).sum()) / total


def mask_volume_mm3(mask: np.ndarray, spacing) -> float:
    """Physical volume of the set voxels in cubic millimeters."""
    sx, sy, sz = spacing
    if sx <= 0 or sy <= 0 or sz <= 0:
        raise ValueError("spacing must be positive")
    return float(np.count_nonzero(mask)) * sx * sy * sz


@dataclass(frozen=True)
class PhantomSpec:
    """Deterministic synthetic volume: a bright (or dark) box with optional
    Gaussian noise, grey-value outliers, and a homogeneous boundary gap.

    Noise is drawn from numpy's PCG64 generator seeded with ``rng_seed``
    (normal draws first, then outlier positions), so phantoms are bit-
    reproducible for a given spec.
    """

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    background_grey: float = 30.0
    object_grey: float = 120.0
    box_center_mm: tuple[float, float, float] = (0.0, 0.0, 0.0)
    box_half_mm: tuple[float, float, float] = (10.0, 10.0, 10.0)
    noise_sigma: float = 0.0
    outlier_count: int = 0
    outlier_grey: float = 0.0
    # outlier placement region (center, half-extents) in mm; defaults to the box
    outlier_region: tuple[tuple[float, float, float], tuple[float, float, float]] | None = None
    # face patch where object grey continues past the box face: one of
    # +x -x +y -y +z -z, with tangential half-width and outward depth in mm
    gap_face: str | None = None
    gap_half_mm: float = 0.0
    gap_depth_mm: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be >= 0")
        lo = np.asarray(self.box_center_mm) - np.asarray(self.box_half_mm)
        hi = np.asarray(self.box_center_mm) + np.asarray(self.box_half_mm)
        vlo = np.zeros(3)
        vhi = (np.asarray(self.dims) - 1) * np.asarray(self.spacing)
        if np.any(lo < vlo - 1e-9) or np.any(hi > vhi + 1e-9):
            raise ValueError("object box must lie inside the volume")

    @staticmethod
    def from_json(path) -> "PhantomSpec":
        with open(path) as f:
            raw = json.load(f)
        for key in ("dims", "spacing", "box_center_mm", "box_half_mm"):
            if key in raw:
                raw[key] = tuple(raw[key])
        if raw.get("outlier_region"):
            raw["outlier_region"] = tuple(tuple(v) for v in raw["outlier_region"])
        return PhantomSpec(**raw)

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(asdict(self), f, indent=2)
            f.write("\n")


_FACE_AXIS = {"+x": (0, 1), "-x": (0, -1), "+y": (1, 1), "-y": (1, -1), "+z": (2, 1), "-z": (2, -1)}


def gen_phantom(spec: PhantomSpec) -> tuple[Volume, np.ndarray]:
    """Generate (volume, ground-truth mask); the mask depends only on geometry."""
    nx, ny, nz = spec.dims
    sx, sy, sz = spec.spacing
    xs = np.arange(nx) * sx
    ys = np.arange(ny) * sy
    zs = np.arange(nz) * sz
    cx, cy, cz = spec.box_center_mm
    hx, hy, hz = spec.box_half_mm
    inx = np.abs(xs - cx) <= hx + 1e-12
    iny = np.abs(ys - cy) <= hy + 1e-12
    inz = np.abs(zs - cz) <= hz + 1e-12
    truth = (inx[:, None, None] & iny[None, :, None] & inz[None, None, :])

    data = np.full((nx, ny, nz), spec.background_grey, dtype=np.float64)
    data[truth] = spec.object_grey

    if spec.gap_face is not None:
        axis, sign = _FACE_AXIS[spec.gap_face]
        centers = (xs, ys, zs)
        center = (cx, cy, cz)[axis]
        half = (hx, hy, hz)[axis]
        along = sign * (centers[axis] - center)
        in_depth = (along > half) & (along <= half + spec.gap_depth_mm + 1e-12)
        tang = [a for a in range(3) if a != axis]
        patch = np.ones((nx, ny, nz), dtype=bool)
        shape = [1, 1, 1]
        for a in tang:
            sel = np.abs(centers[a] - (cx, cy, cz)[a]) <= spec.gap_half_mm + 1e-12
            sh = shape.copy()
            sh[a] = -1
            patch &= sel.reshape(sh)
        sh = shape.copy()
        sh[axis] = -1
        patch &= in_depth.reshape(sh)
        data[patch] = spec.object_grey

    rng = np.random.default_rng(np.random.PCG64(spec.rng_seed))
    if spec.noise_sigma > 0:
        data = data + rng.normal(0.0, spec.noise_sigma, size=data.shape)
    if spec.outlier_count > 0:
        if spec.outlier_region is not None:
            rc, rh = (np.asarray(v, dtype=float) for v in spec.outlier_region)
        else:
            rc, rh = np.array([cx, cy, cz]), np.array([hx, hy, hz])
        lo = np.maximum(np.ceil((rc - rh) / spec.spacing).astype(int), 0)
        hi = np.minimum(np.floor((rc + rh) / spec.spacing).astype(int), np.asarray(spec.dims) - 1)
        if np.any(hi < lo):
            raise ValueError("outlier region contains no voxel centers")
        for _ in range(spec.outlier_count):
            i, j, kz = (int(rng.integers(lo[a], hi[a] + 1)) for a in range(3))
            data[i, j, kz] = spec.outlier_grey
    np.clip(data, 0.0, None, out=data)
    volume = Volume(data=data, spacing=spec.spacing, origin=(0.0, 0.0, 0.0))
    return volume, truth.astype(np.uint8)


@dataclass
class CaseResult:
    """One row of the evaluation report."""

    case_id: str
    manual_volume_mm3: float | None
    automatic_volume_mm3: float
    manual_voxels: int | None
    automatic_voxels: int
    dsc: float | None


REPORT_COLUMNS = [
    "case_id",
    "manual_volume_mm3",
    "automatic_volume_mm3",
    "manual_voxels",
    "automatic_voxels",
    "dsc",
]


def write_report(path, cases: list[CaseResult]) -> None:
    """Evaluation report as CSV, one case per row."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(REPORT_COLUMNS)
        for c in cases:
            writer.writerow([
                c.case_id,
                "" if c.manual_volume_mm3 is None else f"{c.manual_volume_mm3:.1f}",
                f"{c.automatic_volume_mm3:.1f}",
                "" if c.manual_voxels is None else c.manual_voxels,
                c.automatic_voxels,
                "" if c.dsc is None else f"{c.dsc:.4f}",
            ])
