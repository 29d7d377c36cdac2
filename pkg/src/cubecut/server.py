"""HTTP service: volume upload, slice rendering, segmentation, mask download, DSC."""

from __future__ import annotations

import io
import os
import tempfile
import threading
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Response, UploadFile
from pydantic import BaseModel, Field
from skimage.measure import find_contours

from .evaluate import dsc
from .segment import Params, Segmentation, segment
from .volume import Volume, load_mhd, save_mask_mhd

PLANES = ("axial", "sagittal", "coronal")


@dataclass
class SessionStore:
    """In-memory registry of uploaded volumes and produced masks."""

    volumes: dict[int, Volume] = field(default_factory=dict)
    masks: dict[int, tuple[Segmentation, Volume]] = field(default_factory=dict)
    _next_id: int = 1
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def new_id(self) -> int:
        with self._lock:
            value = self._next_id
            self._next_id += 1
        return value


class VolumeInfo(BaseModel):
    volume_id: int
    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]


class SegmentRequest(BaseModel):
    seed_mm: tuple[float, float, float]
    template: str = Field(default="cube", pattern="^(cube|sphere)$")
    edge_mm: float = 80.0
    m: int = 15
    k: int = 40
    delta: int = 2
    stats_halfwidth: int = 2
    diameter_mm: float = 80.0
    n_theta: int = 15
    n_phi: int = 30


class SegmentResponse(BaseModel):
    mask_id: int
    cut_value: float
    warnings: list[str]
    # plane -> slice index (as str) -> closed polylines [[x, y], ...] in pixel coords
    per_slice_contours: dict[str, dict[str, list[list[list[float]]]]]


class DscRequest(BaseModel):
    reference: int


def slice_2d(volume_data: np.ndarray, plane: str, index: int) -> np.ndarray:
    """Extract a display slice as a (rows, cols) array.

    axial: rows=y, cols=x at z=index; sagittal: rows=z, cols=y at x=index;
    coronal: rows=z, cols=x at y=index.
    """
    if plane == "axial":
        return volume_data[:, :, index].T
    if plane == "sagittal":
        return volume_data[index, :, :].T
    if plane == "coronal":
        return volume_data[:, index, :].T
    raise ValueError(f"unknown plane {plane!r}")


def plane_depth(dims: tuple[int, int, int], plane: str) -> int:
    return {"axial": dims[2], "sagittal": dims[0], "coronal": dims[1]}[plane]


def slice_contours(mask2d: np.ndarray) -> list[list[list[float]]]:
    """Closed boundary polylines of a binary slice in (x, y) pixel coordinates."""
    padded = np.pad(mask2d.astype(float), 1)
    polylines = []
    for contour in find_contours(padded, 0.5):
        # find_contours yields (row, col); padding guarantees closed loops
        poly = [[float(c - 1.0), float(r - 1.0)] for r, c in contour]
        polylines.append(poly)
    return polylines


def mask_contours(mask: np.ndarray) -> dict[str, dict[str, list]]:
    out: dict[str, dict[str, list]] = {}
    for plane in PLANES:
        per_plane: dict[str, list] = {}
        for index in range(plane_depth(mask.shape, plane)):
            sl = slice_2d(mask, plane, index)
            if not sl.any():
                continue
            per_plane[str(index)] = slice_contours(sl)
        out[plane] = per_plane
    return out


def create_app(data_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="cubecut", version="0.1.0")
    store = SessionStore()
    app.state.store = store
    app.state.data_dir = data_dir

    @app.post("/api/v1/volumes", response_model=VolumeInfo)
    async def upload_volume(mhd: UploadFile, raw: UploadFile | None = None) -> VolumeInfo:
        header = await mhd.read()
        with tempfile.TemporaryDirectory(dir=data_dir) as tmp:
            header_path = os.path.join(tmp, os.path.basename(mhd.filename or "volume.mhd"))
            with open(header_path, "wb") as f:
                f.write(header)
            if raw is not None:
                # save the payload under the name the header references
                rawname = None
                for line in header.decode("ascii", "ignore").splitlines():
                    if line.strip().startswith("ElementDataFile"):
                        rawname = line.split("=", 1)[1].strip()
                if rawname is None or rawname == "LOCAL":
                    rawname = os.path.basename(raw.filename or "volume.raw")
                with open(os.path.join(tmp, rawname), "wb") as f:
                    f.write(await raw.read())
            try:
                volume = load_mhd(header_path)
            except (ValueError, OSError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
        volume_id = store.new_id()
        store.volumes[volume_id] = volume
        return VolumeInfo(
            volume_id=volume_id, dims=volume.dims, spacing=volume.spacing, origin=volume.origin
        )

    def _get_volume(volume_id: int) -> Volume:
        volume = store.volumes.get(volume_id)
        if volume is None:
            raise HTTPException(status_code=404, detail=f"unknown volume id {volume_id}")
        return volume

    @app.get("/api/v1/volumes/{volume_id}")
    def volume_info(volume_id: int) -> VolumeInfo:
        volume = _get_volume(volume_id)
        return VolumeInfo(
            volume_id=volume_id, dims=volume.dims, spacing=volume.spacing, origin=volume.origin
        )

    @app.get("/api/v1/volumes/{volume_id}/slice")
    def render_slice(
        volume_id: int, plane: str = "axial", index: int = 0, window: str | None = None
    ) -> Response:
        from PIL import Image

        volume = _get_volume(volume_id)
        if plane not in PLANES:
            raise HTTPException(status_code=400, detail=f"unknown plane {plane!r}")
        if not (0 <= index < plane_depth(volume.dims, plane)):
            raise HTTPException(status_code=404, detail="slice index out of range")
        if window:
            try:
                lo, hi = (float(v) for v in window.split(","))
            except ValueError as exc:
                raise HTTPException(status_code=400, detail="window must be LO,HI") from exc
        else:
            lo, hi = float(volume.data.min()), float(volume.data.max())
        if hi <= lo:
            hi = lo + 1.0
        sl = slice_2d(volume.data, plane, index)
        grey = np.clip((sl - lo) / (hi - lo) * 255.0, 0, 255).astype(np.uint8)
        buf = io.BytesIO()
        Image.fromarray(grey, mode="L").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/api/v1/volumes/{volume_id}/segment", response_model=SegmentResponse)
    def segment_volume(volume_id: int, request: SegmentRequest) -> SegmentResponse:
        volume = _get_volume(volume_id)
        params = Params(
            seed=request.seed_mm,
            kind=request.template,
            edge_mm=request.edge_mm,
            m=request.m,
            k=request.k,
            delta=request.delta,
            stats_halfwidth=request.stats_halfwidth,
            diameter_mm=request.diameter_mm,
            n_theta=request.n_theta,
            n_phi=request.n_phi,
        )
        try:
            result = segment(volume, params)
        except ValueError as exc:
            status = 422 if "outside volume" in str(exc) else 400
            raise HTTPException(status_code=status, detail=str(exc)) from exc
        mask_id = store.new_id()
        store.masks[mask_id] = (result, volume)
        return SegmentResponse(
            mask_id=mask_id,
            cut_value=result.cut_value,
            warnings=result.warnings,
            per_slice_contours=mask_contours(result.mask),
        )

    @app.get("/api/v1/masks/{mask_id}")
    def download_mask(mask_id: int) -> Response:
        entry = store.masks.get(mask_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown mask id {mask_id}")
        result, volume = entry
        with tempfile.TemporaryDirectory(dir=data_dir) as tmp:
            path = os.path.join(tmp, f"mask_{mask_id}.mha")
            save_mask_mhd(result.mask, volume.spacing, volume.origin, path)
            with open(path, "rb") as f:
                payload = f.read()
        return Response(
            content=payload,
            media_type="application/octet-stream",
            headers={"Content-Disposition": f'attachment; filename="mask_{mask_id}.mha"'},
        )

    def _lookup_mask(ref_id: int) -> np.ndarray:
        entry = store.masks.get(ref_id)
        if entry is not None:
            return entry[0].mask
        volume = store.volumes.get(ref_id)
        if volume is not None:
            return volume.data > 0.5
        raise HTTPException(status_code=404, detail=f"unknown mask id {ref_id}")

    @app.post("/api/v1/masks/{mask_id}/dsc")
    def mask_dsc(mask_id: int, request: DscRequest) -> dict:
        entry = store.masks.get(mask_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown mask id {mask_id}")
        reference = _lookup_mask(request.reference)
        try:
            return {"dsc": dsc(entry[0].mask, reference)}
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    # serve the viewer bundle when it has been built
    frontend = os.path.join(os.path.dirname(__file__), "..", "..", "frontend", "dist")
    frontend = os.path.abspath(frontend)
    if os.path.isdir(frontend):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend, html=True), name="viewer")

    return app
