"""End-to-end pipeline: seed stats -> template -> network -> min-cut -> labels, mask, mesh."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .maxflow import FlowState, bk_maxflow, min_cut_partition
from .netbuild import FlowNetwork, S_NODE, build_network, node_id
from .template import Template, build_cube_template, build_sphere_template
from .volume import Volume, seed_stats

# A voxel center is inside when its continuous layer is at most the
# interpolated boundary plus half a layer: the cut runs between the last
# source-labeled node and the first sink-labeled one.
BOUNDARY_OFFSET = 0.5


@dataclass(frozen=True)
class Params:
    """User-facing knobs of a segmentation run."""

    seed: tuple[float, float, float]
    kind: str = "cube"
    edge_mm: float = 80.0
    m: int = 15
    k: int = 40
    delta: int = 2
    stats_halfwidth: int = 2
    # sphere-template settings
    diameter_mm: float = 80.0
    n_theta: int = 15
    n_phi: int = 30


@dataclass
class Segmentation:
    """Cut converted into labels, per-ray boundaries, mask, mesh, and energy."""

    template: Template
    labels: np.ndarray  # (n, k) bool, True = object (L_s)
    boundaries: np.ndarray  # (n,) int, b_r
    mask: np.ndarray  # uint8, aligned to the input volume
    vertices: np.ndarray  # (v, 3) world mm
    triangles: np.ndarray  # (f, 3) vertex indices
    cut_value: float
    warnings: list[str] = field(default_factory=list)


def build_template(params: Params) -> Template:
    if params.kind == "cube":
        return build_cube_template(params.seed, params.edge_mm, params.m, params.k)
    if params.kind == "sphere":
        return build_sphere_template(
            params.seed, params.diameter_mm, params.n_theta, params.n_phi, params.k
        )
    raise ValueError(f"unknown template kind {params.kind!r}")


def node_labels(template: Template, in_source: np.ndarray) -> np.ndarray:
    """Per-(ray, layer) object labels from the source-side partition."""
    n, k = template.n, template.k
    labels = np.empty((n, k), dtype=bool)
    labels[:, 0] = in_source[node_id(0, 1, k)]
    body = in_source[3 : 3 + n * (k - 1)].reshape(n, k - 1)
    labels[:, 1:] = body
    return labels


def ray_boundaries(template: Template, in_source: np.ndarray) -> np.ndarray:
    """Largest source-side layer per ray; requires prefix-structured labels."""
    labels = node_labels(template, in_source)
    if not labels[:, 0].all():
        raise ValueError("seed node not on the source side")
    b = labels.sum(axis=1)
    # Each ray must be cut exactly once: L_s...L_s then L_t...L_t.
    expected = np.arange(1, template.k + 1)[None, :] <= b[:, None]
    if not np.array_equal(labels, expected):
        raise ValueError("non-prefix labeling along a ray (solver bug)")
    return b.astype(int)


def energy(network: FlowNetwork, labels_by_node: np.ndarray) -> float:
    """Energy of a labeling: severed o-link capacities plus severed inter-node arcs.

    ``labels_by_node`` is boolean over node ids (True = object); entries for
    s and t are forced. Equals the cut capacity of the induced partition.
    """
    if labels_by_node.shape[0] != network.n_nodes:
        raise ValueError("labeling must cover all nodes")
    lab = labels_by_node.copy()
    lab[0] = True
    lab[1] = False
    crossing = lab[network.tails] & ~lab[network.heads]
    return float(network.caps[crossing].sum())


def _face_axes(axis: int, positive: bool) -> tuple[int, int]:
    """Tangential (u, v) axes per cube face, ordered so u x v points outward."""
    table = {
        (0, True): (1, 2), (0, False): (2, 1),
        (1, True): (2, 0), (1, False): (0, 2),
        (2, True): (0, 1), (2, False): (1, 0),
    }
    return table[(axis, positive)]


def _face_boundary_grids(template: Template, boundaries: np.ndarray) -> np.ndarray:
    """Boundary indices arranged per cube face, shape (6, m, m); face id = 2*axis + (1 - positive)."""
    lattice = template.lattice
    m = lattice.m
    grids = np.empty((6, m, m))
    pts = lattice.points
    for axis in range(3):
        for positive in (True, False):
            face = 2 * axis + (0 if positive else 1)
            sel = pts[:, axis] == (m - 1 if positive else 0)
            ua, va = _face_axes(axis, positive)
            grids[face, pts[sel, ua], pts[sel, va]] = boundaries[sel]
    return grids


def voxelize(template: Template, boundaries: np.ndarray, volume: Volume) -> np.ndarray:
    """Binary mask over the volume's voxel centers enclosed by the cut surface."""
    if template.kind == "cube":
        return _voxelize_cube(template, boundaries, volume)
    return _voxelize_sphere(template, boundaries, volume)


def _voxelize_cube(template: Template, boundaries: np.ndarray, volume: Volume) -> np.ndarray:
    m = template.lattice.m
    k = template.k
    half = template.scale
    grids = _face_boundary_grids(template, boundaries)
    nx, ny, nz = volume.dims
    ox, oy, oz = volume.origin
    sx, sy, sz = volume.spacing
    dx = (ox + np.arange(nx) * sx - template.seed[0])[:, None]
    dy = (oy + np.arange(ny) * sy - template.seed[1])[None, :]
    mask = np.zeros((nx, ny, nz), dtype=np.uint8)
    adx = np.broadcast_to(np.abs(dx), (nx, ny)).copy()
    ady = np.broadcast_to(np.abs(dy), (nx, ny)).copy()
    dxs = np.broadcast_to(dx, (nx, ny))
    dys = np.broadcast_to(dy, (nx, ny))
    for kz in range(nz):
        dz = oz + kz * sz - template.seed[2]
        adz = abs(dz)
        smax = np.maximum(np.maximum(adx, ady), adz)
        s = smax / half
        within = s <= 1.0 + 1e-12
        if not within.any():
            continue
        # dominant axis with tie priority x > y > z
        is_x = (adx >= ady) & (adx >= adz)
        is_y = ~is_x & (ady >= adz)
        axis = np.where(is_x, 0, np.where(is_y, 1, 2))
        d_dom = np.where(is_x, dxs, np.where(is_y, dys, dz))
        face = 2 * axis + (d_dom < 0)
        safe = np.where(smax > 0, smax, 1.0)
        # unit-cube face coordinates; (u, v) axis choice per face follows _face_axes
        comp = (dxs / safe, dys / safe, np.broadcast_to(dz / safe, safe.shape))
        eu = np.choose(face, [comp[1], comp[2], comp[2], comp[0], comp[0], comp[1]])
        ev = np.choose(face, [comp[2], comp[1], comp[0], comp[2], comp[1], comp[0]])
        pu = np.clip((eu + 1.0) * (m - 1) / 2.0, 0, m - 1)
        pv = np.clip((ev + 1.0) * (m - 1) / 2.0, 0, m - 1)
        i0 = np.minimum(np.floor(pu).astype(np.intp), m - 2 if m > 1 else 0)
        j0 = np.minimum(np.floor(pv).astype(np.intp), m - 2 if m > 1 else 0)
        fu = pu - i0
        fv = pv - j0
        g = grids
        b00 = g[face, i0, j0]
        b10 = g[face, i0 + 1, j0]
        b01 = g[face, i0, j0 + 1]
        b11 = g[face, i0 + 1, j0 + 1]
        b_hat = (
            b00 * (1 - fu) * (1 - fv)
            + b10 * fu * (1 - fv)
            + b01 * (1 - fu) * fv
            + b11 * fu * fv
        )
        layer = 1.0 + s * (k - 1)
        mask[:, :, kz] = (within & (layer <= b_hat + BOUNDARY_OFFSET + 1e-9)).astype(np.uint8)
    return mask


def _voxelize_sphere(template: Template, boundaries: np.ndarray, volume: Volume) -> np.ndarray:
    n_theta, n_phi = template.grid_shape
    k = template.k
    radius = template.scale
    north = n_theta * n_phi
    south = north + 1
    nx, ny, nz = volume.dims
    ox, oy, oz = volume.origin
    sx, sy, sz = volume.spacing
    dx = (ox + np.arange(nx) * sx - template.seed[0])[:, None]
    dy = (oy + np.arange(ny) * sy - template.seed[1])[None, :]
    mask = np.zeros((nx, ny, nz), dtype=np.uint8)
    dxs = np.broadcast_to(dx, (nx, ny))
    dys = np.broadcast_to(dy, (nx, ny))
    dtheta = np.pi / (n_theta + 1)
    for kz in range(nz):
        dz = oz + kz * sz - template.seed[2]
        dist = np.sqrt(dxs**2 + dys**2 + dz**2)
        s = dist / radius
        within = s <= 1.0 + 1e-12
        if not within.any():
            continue
        safe = np.where(dist > 0, dist, 1.0)
        theta = np.arccos(np.clip(dz / safe, -1.0, 1.0))
        phi = np.mod(np.arctan2(dys, dxs), 2 * np.pi)
        # nearest ray: ring 0 is the north pole, rings 1..n_theta the grid,
        # ring n_theta+1 the south pole
        ring = np.clip(np.round(theta / dtheta).astype(int), 0, n_theta + 1)
        pidx = np.mod(np.round(phi / (2 * np.pi / n_phi)).astype(int), n_phi)
        ray = np.where(
            ring == 0, north, np.where(ring == n_theta + 1, south, (ring - 1) * n_phi + pidx)
        )
        b_hat = boundaries[ray]
        layer = 1.0 + s * (k - 1)
        mask[:, :, kz] = (within & (layer <= b_hat + BOUNDARY_OFFSET + 1e-9)).astype(np.uint8)
    return mask


def triangulate(template: Template, boundaries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed, outward-oriented triangle mesh with one vertex per ray at node b_r."""
    frac = (boundaries - 1) / (template.k - 1)
    vertices = template.seed + frac[:, None] * (template.endpoints - template.seed)
    if template.kind == "cube":
        triangles = _cube_triangles(template)
    else:
        triangles = _sphere_triangles(template)
    return vertices, np.asarray(triangles, dtype=np.intp)


def _cube_triangles(template: Template) -> list[tuple[int, int, int]]:
    lattice = template.lattice
    m = lattice.m
    index = {tuple(p): i for i, p in enumerate(lattice.points)}
    tris = []
    for axis in range(3):
        for positive in (True, False):
            fixed = m - 1 if positive else 0
            ua, va = _face_axes(axis, positive)
            for u in range(m - 1):
                for v in range(m - 1):
                    def pt(du, dv):
                        c = [0, 0, 0]
                        c[axis] = fixed
                        c[ua] = u + du
                        c[va] = v + dv
                        return index[tuple(c)]
                    p00, p10, p11, p01 = pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)
                    # fixed diagonal p00 -> p11
                    tris.append((p00, p10, p11))
                    tris.append((p00, p11, p01))
    return tris


def _sphere_triangles(template: Template) -> list[tuple[int, int, int]]:
    n_theta, n_phi = template.grid_shape
    north = n_theta * n_phi
    south = north + 1
    tris = []
    # pole fans (theta increases away from +z, phi counter-clockwise from +z)
    for p in range(n_phi):
        pn = (p + 1) % n_phi
        tris.append((north, pn, p))
        tris.append((south, (n_theta - 1) * n_phi + p, (n_theta - 1) * n_phi + pn))
    for j in range(n_theta - 1):
        for p in range(n_phi):
            pn = (p + 1) % n_phi
            a = j * n_phi + p
            b = j * n_phi + pn
            c = (j + 1) * n_phi + pn
            d = (j + 1) * n_phi + p
            tris.append((a, c, b))
            tris.append((a, d, c))
    return tris


def write_stl(vertices: np.ndarray, triangles: np.ndarray, path, name: str = "cubecut") -> None:
    """ASCII STL export with per-facet normals recomputed from the geometry."""
    with open(path, "w") as f:
        f.write(f"solid {name}\n")
        for tri in triangles:
            a, b, c = vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]
            nvec = np.cross(b - a, c - a)
            norm = np.linalg.norm(nvec)
            nvec = nvec / norm if norm > 0 else np.zeros(3)
            f.write(f"  facet normal {nvec[0]:.9g} {nvec[1]:.9g} {nvec[2]:.9g}\n")
            f.write("    outer loop\n")
            for v in (a, b, c):
                f.write(f"      vertex {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
            f.write("    endloop\n")
            f.write("  endfacet\n")
        f.write(f"endsolid {name}\n")


def segment(volume: Volume, params: Params) -> Segmentation:
    """Run the full pipeline on a volume; deterministic for identical inputs."""
    stats = seed_stats(volume, params.seed, params.stats_halfwidth)
    template = build_template(params)
    network = build_network(template, volume, stats, params.delta)
    state = bk_maxflow(network)
    in_source = min_cut_partition(network, state)
    labels = node_labels(template, in_source)
    boundaries = ray_boundaries(template, in_source)
    mask = voxelize(template, boundaries, volume)
    vertices, triangles = triangulate(template, boundaries)
    warnings = []
    at_rim = float(np.mean(boundaries == template.k - 1))
    if at_rim > 0.05:
        warnings.append(
            f"template likely smaller than the target: {at_rim:.0%} of rays cut at "
            "the last interior layer; increase the template size"
        )
    return Segmentation(
        template=template,
        labels=labels,
        boundaries=boundaries,
        mask=mask,
        vertices=vertices,
        triangles=triangles,
        cut_value=state.flow_value,
        warnings=warnings,
    )
