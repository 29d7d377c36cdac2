"""Template-driven graph-cut segmentation of roughly cubic structures in volumes."""

from .evaluate import PhantomSpec, dsc, gen_phantom, mask_volume_mm3
from .maxflow import bk_maxflow, min_cut_partition, reference_mincut
from .netbuild import FlowNetwork, build_network, w_coeff
from .segment import Params, Segmentation, segment, triangulate, voxelize, write_stl
from .template import build_cube_template, build_sphere_template, cube_surface_lattice
from .volume import (
    SeedStats,
    Volume,
    load_mhd,
    resample_isotropic,
    sample_trilinear,
    save_mask_mhd,
    seed_stats,
)

__all__ = [
    "FlowNetwork",
    "Params",
    "PhantomSpec",
    "SeedStats",
    "Segmentation",
    "Volume",
    "bk_maxflow",
    "build_cube_template",
    "build_network",
    "build_sphere_template",
    "cube_surface_lattice",
    "dsc",
    "gen_phantom",
    "load_mhd",
    "mask_volume_mm3",
    "min_cut_partition",
    "reference_mincut",
    "resample_isotropic",
    "sample_trilinear",
    "save_mask_mhd",
    "seed_stats",
    "segment",
    "triangulate",
    "voxelize",
    "w_coeff",
    "write_stl",
]

__version__ = "0.1.0"
