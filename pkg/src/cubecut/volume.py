"""Volumetric scalar images: MetaImage I/O, trilinear sampling, resampling, seed statistics."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

# MetaImage element types we accept, mapped to little-endian numpy dtypes.
_ELEMENT_TYPES = {
    "MET_UCHAR": np.dtype("u1"),
    "MET_SHORT": np.dtype("<i2"),
    "MET_USHORT": np.dtype("<u2"),
    "MET_FLOAT": np.dtype("<f4"),
}


@dataclass(frozen=True)
class Volume:
    """Axis-aligned scalar grid with per-axis spacing (mm) and world origin.

    ``data`` is indexed [i, j, k] (x, y, z); the world coordinate of voxel
    (i, j, k) is ``origin + (i*sx, j*sy, k*sz)`` (voxel-center convention).
    """

    data: np.ndarray
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValueError("only 3-D volumes supported")
        if any(d < 1 for d in self.data.shape):
            raise ValueError("volume dims must be positive")
        if any(not np.isfinite(s) or s <= 0 for s in self.spacing):
            raise ValueError("spacings must be strictly positive and finite")
        if self.data.dtype != np.float64:
            object.__setattr__(self, "data", self.data.astype(np.float64))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    def world_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounding box of the voxel centers, (low, high) in mm."""
        lo = np.asarray(self.origin, dtype=float)
        hi = lo + (np.asarray(self.dims) - 1) * np.asarray(self.spacing)
        return lo, hi


@dataclass(frozen=True)
class SeedStats:
    """Grey-value interval and mean sampled in a block around the seed."""

    g_min: float
    g_max: float
    g_avg: float
    sample_count: int

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if not (self.g_min <= self.g_avg <= self.g_max):
            raise ValueError("requires g_min <= g_avg <= g_max")


def _parse_mhd_header(text: str) -> dict[str, str]:
    header = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed header line: {line!r}")
        key, value = line.split("=", 1)
        header[key.strip()] = value.strip()
    return header


def load_mhd(path: str | os.PathLike) -> Volume:
    """Load a MetaImage volume (.mhd + .raw, or .mha with local payload).

    Integer element types are widened to float64 grey values. A missing
    Offset defaults to (0,0,0), missing ElementSpacing to (1,1,1).
    """
    path = os.fspath(path)
    with open(path, "rb") as f:
        blob = f.read()

    # The header is line-oriented text; ElementDataFile is its last key and,
    # for LOCAL payloads, the raw bytes follow immediately after that line.
    marker = blob.find(b"ElementDataFile")
    if marker < 0:
        raise ValueError("missing ElementDataFile key")
    header_end = blob.find(b"\n", marker)
    if header_end < 0:
        header_end = len(blob)
    header = _parse_mhd_header(blob[: header_end + 1].decode("ascii", "strict"))

    if header.get("ObjectType", "Image") != "Image":
        raise ValueError(f"unsupported ObjectType {header.get('ObjectType')!r}")
    if int(header.get("NDims", "3")) != 3:
        raise ValueError("only 3-D volumes supported")

    dims = tuple(int(v) for v in header["DimSize"].split())
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise ValueError(f"bad DimSize {header['DimSize']!r}")
    elem = header.get("ElementType", "MET_UCHAR")
    if elem not in _ELEMENT_TYPES:
        raise ValueError(f"unsupported ElementType {elem!r}")
    dtype = _ELEMENT_TYPES[elem]
    msb = header.get("BinaryDataByteOrderMSB", header.get("ElementByteOrderMSB", "False"))
    if msb.lower() == "true":
        dtype = dtype.newbyteorder(">")

    spacing = tuple(float(v) for v in header.get("ElementSpacing", "1 1 1").split())
    origin = tuple(float(v) for v in header.get("Offset", "0 0 0").split())

    datafile = header["ElementDataFile"]
    if datafile == "LOCAL":
        raw = blob[header_end + 1 :]
    else:
        raw_path = os.path.join(os.path.dirname(path), datafile)
        with open(raw_path, "rb") as f:
            raw = f.read()

    nx, ny, nz = dims
    expected = nx * ny * nz * dtype.itemsize
    if len(raw) != expected:
        raise ValueError(
            f"data size mismatch: expected {expected} bytes for {nx}x{ny}x{nz} "
            f"{elem}, got {len(raw)}"
        )
    # Raw payload is x-fastest, z-slowest.
    flat = np.frombuffer(raw, dtype=dtype)
    data = flat.reshape((nz, ny, nx)).transpose(2, 1, 0).astype(np.float64)
    return Volume(data=data, spacing=spacing, origin=origin)


def save_mask_mhd(
    mask: np.ndarray,
    spacing: tuple[float, float, float],
    origin: tuple[float, float, float],
    path: str | os.PathLike,
) -> None:
    """Write a binary mask as MET_UCHAR MetaImage with values exactly {0, 1}.

    ``path`` ending in .mha writes a single file (ElementDataFile = LOCAL);
    otherwise a .raw file is written next to the header.
    """
    mask = np.asarray(mask)
    if mask.ndim != 3 or any(d < 1 for d in mask.shape):
        raise ValueError("mask dims must be positive")
    path = os.fspath(path)
    nx, ny, nz = mask.shape
    payload = np.ascontiguousarray((mask != 0).astype(np.uint8).transpose(2, 1, 0)).tobytes()
    local = path.endswith(".mha")
    lines = [
        "ObjectType = Image",
        "NDims = 3",
        f"DimSize = {nx} {ny} {nz}",
        "ElementType = MET_UCHAR",
        f"ElementSpacing = {spacing[0]} {spacing[1]} {spacing[2]}",
        f"Offset = {origin[0]} {origin[1]} {origin[2]}",
        "BinaryDataByteOrderMSB = False",
    ]
    if local:
        lines.append("ElementDataFile = LOCAL")
        with open(path, "wb") as f:
            f.write(("\n".join(lines) + "\n").encode("ascii"))
            f.write(payload)
    else:
        rawname = os.path.basename(path)
        rawname = (rawname[:-4] if rawname.endswith(".mhd") else rawname) + ".raw"
        lines.append(f"ElementDataFile = {rawname}")
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")
        with open(os.path.join(os.path.dirname(path), rawname), "wb") as f:
            f.write(payload)


def sample_trilinear(volume: Volume, points: np.ndarray) -> np.ndarray | float:
    """Trilinear interpolation of the grid at world points, shape (..., 3).

    Coordinates outside the voxel-center bounding box are clamped onto it
    before interpolation, so sampling never fails out of bounds.
    """
    pts = np.asarray(points, dtype=np.float64)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    dims = np.asarray(volume.dims)
    u = (pts - np.asarray(volume.origin)) / np.asarray(volume.spacing)
    u = np.clip(u, 0.0, dims - 1)
    i0 = np.minimum(np.floor(u).astype(np.intp), np.maximum(dims - 2, 0))
    f = np.clip(u - i0, 0.0, 1.0)
    i1 = np.minimum(i0 + 1, dims - 1)
    d = volume.data
    x0, y0, z0 = i0[..., 0], i0[..., 1], i0[..., 2]
    x1, y1, z1 = i1[..., 0], i1[..., 1], i1[..., 2]
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    c00 = d[x0, y0, z0] * (1 - fx) + d[x1, y0, z0] * fx
    c10 = d[x0, y1, z0] * (1 - fx) + d[x1, y1, z0] * fx
    c01 = d[x0, y0, z1] * (1 - fx) + d[x1, y0, z1] * fx
    c11 = d[x0, y1, z1] * (1 - fx) + d[x1, y1, z1] * fx
    c0 = c00 * (1 - fy) + c10 * fy
    c1 = c01 * (1 - fy) + c11 * fy
    out = c0 * (1 - fz) + c1 * fz
    return float(out[0]) if scalar else out


def resample_isotropic(volume: Volume, target_spacing: float) -> Volume:
    """Resample to isotropic spacing by trilinear sampling at new voxel centers.

    New dims are round(old physical extent / target spacing) per axis
    (minimum 1); the origin is preserved.
    """
    if not np.isfinite(target_spacing) or target_spacing <= 0:
        raise ValueError("target_spacing must be positive")
    dims = np.asarray(volume.dims)
    extent = dims * np.asarray(volume.spacing)
    new_dims = np.maximum(1, np.round(extent / target_spacing).astype(int))
    axes = [np.asarray(volume.origin)[a] + np.arange(new_dims[a]) * target_spacing for a in range(3)]
    data = np.empty(tuple(new_dims), dtype=np.float64)
    # Sample slab by slab along z to bound peak memory.
    gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
    pts = np.empty((new_dims[0], new_dims[1], 3))
    pts[..., 0] = gx
    pts[..., 1] = gy
    for kz, z in enumerate(axes[2]):
        pts[..., 2] = z
        data[:, :, kz] = sample_trilinear(volume, pts)
    return Volume(data=data, spacing=(target_spacing,) * 3, origin=volume.origin)


def nearest_voxel(volume: Volume, point) -> tuple[int, int, int]:
    """Index of the voxel whose center is nearest to the world point.

    Raises ValueError if the point lies outside the volume extent.
    """
    u = (np.asarray(point, dtype=float) - np.asarray(volume.origin)) / np.asarray(volume.spacing)
    idx = np.round(u).astype(int)
    if np.any(idx < 0) or np.any(idx >= np.asarray(volume.dims)):
        lo, hi = volume.world_bounds()
        raise ValueError(
            f"seed {tuple(np.asarray(point, dtype=float))} outside volume "
            f"(voxel-center bounds {tuple(lo)} .. {tuple(hi)})"
        )
    return tuple(int(v) for v in idx)


def seed_stats(volume: Volume, seed, halfwidth: int = 2) -> SeedStats:
    """Grey statistics of the (2*halfwidth+1)^3 voxel block around the seed.

    The block is centered on the voxel nearest the seed and clamped to the
    volume bounds; returns min, max, arithmetic mean, and sample count.
    """
    if halfwidth < 0:
        raise ValueError("halfwidth must be >= 0")
    ci, cj, ck = nearest_voxel(volume, seed)
    nx, ny, nz = volume.dims
    block = volume.data[
        max(0, ci - halfwidth) : min(nx, ci + halfwidth + 1),
        max(0, cj - halfwidth) : min(ny, cj + halfwidth + 1),
        max(0, ck - halfwidth) : min(nz, ck + halfwidth + 1),
    ]
    return SeedStats(
        g_min=float(block.min()),
        g_max=float(block.max()),
        g_avg=float(block.mean()),
        sample_count=int(block.size),
    )
