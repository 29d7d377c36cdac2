"""Command-line front door: segment volumes, generate phantoms, compute DSC, serve."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import evaluate
from .evaluate import CaseResult, PhantomSpec, dsc, gen_phantom, mask_volume_mm3
from .segment import Params, segment, write_stl
from .volume import load_mhd, resample_isotropic, save_mask_mhd


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; runtime problems exit 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="cubecut", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment a volume from a single seed")
    seg.add_argument("--input", required=True, help="input MetaImage volume (.mhd/.mha)")
    seg.add_argument("--seed", required=True, help="seed as X,Y,Z")
    seg.add_argument("--seed-units", choices=("mm", "voxel"), default="mm")
    seg.add_argument("--template", choices=("cube", "sphere"), default="cube")
    seg.add_argument("--edge", type=float, default=80.0, help="cube edge length in mm")
    seg.add_argument("--rays-per-edge", type=int, default=15, metavar="M")
    seg.add_argument("--nodes-per-ray", type=int, default=40, metavar="K")
    seg.add_argument("--delta", type=int, default=2, help="smoothness constraint")
    seg.add_argument("--stats-halfwidth", type=int, default=2)
    seg.add_argument("--diameter", type=float, default=80.0, help="sphere diameter in mm")
    seg.add_argument("--rings", type=int, default=15, help="sphere latitude rings")
    seg.add_argument("--rays-per-ring", type=int, default=30)
    seg.add_argument("--resample", type=float, default=None, metavar="MM",
                     help="resample to isotropic spacing first")
    seg.add_argument("--out-mask", required=True)
    seg.add_argument("--out-mesh", default=None, help="ASCII STL output")
    seg.add_argument("--reference", default=None, help="reference mask for DSC")
    seg.add_argument("--report", default=None, help="CSV evaluation report")
    seg.add_argument("--case-id", default="case")

    ph = sub.add_parser("phantom", help="generate a synthetic phantom volume")
    ph.add_argument("--spec", required=True, help="PhantomSpec JSON file")
    ph.add_argument("--out", required=True)
    ph.add_argument("--out-truth", required=True)

    dc = sub.add_parser("dsc", help="Dice similarity coefficient of two masks")
    dc.add_argument("--a", required=True)
    dc.add_argument("--b", required=True)

    info = sub.add_parser("info", help="print dims/spacing of a volume")
    info.add_argument("--input", required=True)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--data-dir", default=None)
    return parser


def _parse_seed(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"seed must be X,Y,Z, got {text!r}")
    return tuple(float(p) for p in parts)


def _cmd_segment(args) -> int:
    volume = load_mhd(args.input)
    if args.resample is not None:
        volume = resample_isotropic(volume, args.resample)
    seed = _parse_seed(args.seed)
    if args.seed_units == "voxel":
        seed = tuple(
            volume.origin[a] + seed[a] * volume.spacing[a] for a in range(3)
        )
    params = Params(
        seed=seed,
        kind=args.template,
        edge_mm=args.edge,
        m=args.rays_per_edge,
        k=args.nodes_per_ray,
        delta=args.delta,
        stats_halfwidth=args.stats_halfwidth,
        diameter_mm=args.diameter,
        n_theta=args.rings,
        n_phi=args.rays_per_ring,
    )
    result = segment(volume, params)
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    save_mask_mhd(result.mask, volume.spacing, volume.origin, args.out_mask)
    if args.out_mesh:
        write_stl(result.vertices, result.triangles, args.out_mesh)
    score = None
    manual_voxels = None
    manual_volume = None
    if args.reference:
        ref = load_mhd(args.reference)
        ref_mask = ref.data > 0.5
        score = dsc(result.mask, ref_mask)
        manual_voxels = int(ref_mask.sum())
        manual_volume = mask_volume_mm3(ref_mask, ref.spacing)
        print(f"dsc {score:.4f}")
    if args.report:
        evaluate.write_report(args.report, [CaseResult(
            case_id=args.case_id,
            manual_volume_mm3=manual_volume,
            automatic_volume_mm3=mask_volume_mm3(result.mask, volume.spacing),
            manual_voxels=manual_voxels,
            automatic_voxels=int(result.mask.sum()),
            dsc=score,
        )])
    print(f"cut_value {result.cut_value:.6g}")
    return 0


def _cmd_phantom(args) -> int:
    spec = PhantomSpec.from_json(args.spec)
    volume, truth = gen_phantom(spec)
    data = volume.data
    # store phantoms as float to keep the noise; truth is a binary mask
    save_mask_mhd(truth, spec.spacing, (0.0, 0.0, 0.0), args.out_truth)
    _save_float_mhd(data, spec.spacing, args.out)
    return 0


def _save_float_mhd(data: np.ndarray, spacing, path) -> None:
    import os

    nx, ny, nz = data.shape
    payload = np.ascontiguousarray(data.astype("<f4").transpose(2, 1, 0)).tobytes()
    path = str(path)
    local = path.endswith(".mha")
    lines = [
        "ObjectType = Image",
        "NDims = 3",
        f"DimSize = {nx} {ny} {nz}",
        "ElementType = MET_FLOAT",
        f"ElementSpacing = {spacing[0]} {spacing[1]} {spacing[2]}",
        "Offset = 0.0 0.0 0.0",
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


def _cmd_dsc(args) -> int:
    a = load_mhd(args.a)
    b = load_mhd(args.b)
    print(f"{dsc(a.data > 0.5, b.data > 0.5):.4f}")
    return 0


def _cmd_info(args) -> int:
    volume = load_mhd(args.input)
    lo, hi = volume.world_bounds()
    print(f"dims {volume.dims[0]} {volume.dims[1]} {volume.dims[2]}")
    print(f"spacing {volume.spacing[0]} {volume.spacing[1]} {volume.spacing[2]}")
    print(f"origin {volume.origin[0]} {volume.origin[1]} {volume.origin[2]}")
    print(f"bounds {tuple(lo)} .. {tuple(hi)}")
    print(f"grey range {volume.data.min()} .. {volume.data.max()}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(args.data_dir), host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "segment": _cmd_segment,
    "phantom": _cmd_phantom,
    "dsc": _cmd_dsc,
    "info": _cmd_info,
    "serve": _cmd_serve,
}


def run_cli(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"cubecut: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
