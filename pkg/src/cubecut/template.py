"""Ray templates: cubic (and spherical) node distributions with 4-neighborhood adjacency."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SurfaceLattice:
    """Integer lattice points on the surface of an m x m x m cube.

    Two points are adjacent iff they differ by one lattice step along one
    axis with both points on the surface; corners have 3 neighbors, edge
    and face-interior points 4.
    """

    m: int
    points: np.ndarray  # (n, 3) int
    adjacency: np.ndarray  # (e, 2) int, unordered pairs i < j


def cube_surface_lattice(m: int) -> SurfaceLattice:
    """All integer points of [0, m-1]^3 with some coordinate in {0, m-1}."""
    if m < 2:
        raise ValueError("m must be >= 2")
    coords = np.arange(m)
    grid = np.stack(np.meshgrid(coords, coords, coords, indexing="ij"), axis=-1).reshape(-1, 3)
    on_surface = np.any((grid == 0) | (grid == m - 1), axis=1)
    points = grid[on_surface]  # lexicographic in (x, y, z)
    index = {tuple(p): i for i, p in enumerate(points)}
    pairs = []
    for i, p in enumerate(points):
        for axis in range(3):
            q = (p[0] + (axis == 0), p[1] + (axis == 1), p[2] + (axis == 2))
            j = index.get(q)
            if j is not None:
                pairs.append((i, j))
    return SurfaceLattice(m=m, points=points, adjacency=np.asarray(pairs, dtype=np.intp))


@dataclass(frozen=True)
class Template:
    """Rays of k equidistant nodes from a shared seed to template endpoints.

    Layer 1 is the seed for every ray; node (r, i) sits at
    seed + (i-1)/(k-1) * (endpoint_r - seed). ``neighbors`` are unordered
    ray-index pairs (the surface 4-neighborhood).
    """

    seed: np.ndarray  # (3,) world mm
    kind: str  # "cube" | "sphere"
    k: int
    endpoints: np.ndarray  # (n, 3) world mm
    neighbors: np.ndarray  # (e, 2) ray indices
    scale: float  # cube half-edge or sphere radius, mm
    # cube: the generating lattice; sphere: (n_theta, n_phi)
    lattice: SurfaceLattice | None = None
    grid_shape: tuple[int, int] | None = None

    @property
    def n(self) -> int:
        return self.endpoints.shape[0]

    def node_pos(self, r: int, i: int) -> np.ndarray:
        if not (1 <= i <= self.k):
            raise ValueError("layer index out of range")
        frac = (i - 1) / (self.k - 1)
        return self.seed + frac * (self.endpoints[r] - self.seed)

    def node_positions(self) -> np.ndarray:
        """All node positions, shape (n, k, 3); layer index i maps to [:, i-1]."""
        frac = np.arange(self.k) / (self.k - 1)
        return self.seed + frac[None, :, None] * (self.endpoints - self.seed)[:, None, :]


def build_cube_template(seed, edge_mm: float, m: int, k: int) -> Template:
    """Cubic template: one ray per surface-lattice point, n = 6m^2 - 12m + 8."""
    if edge_mm <= 0:
        raise ValueError("edge_mm must be positive")
    if k < 2:
        raise ValueError("k must be >= 2")
    lattice = cube_surface_lattice(m)
    seed = np.asarray(seed, dtype=np.float64)
    # Lattice coordinate p maps to (2p/(m-1) - 1) per axis, scaled by the half-edge.
    offsets = (2.0 * lattice.points / (m - 1) - 1.0) * (edge_mm / 2.0)
    return Template(
        seed=seed,
        kind="cube",
        k=k,
        endpoints=seed + offsets,
        neighbors=lattice.adjacency,
        scale=edge_mm / 2.0,
        lattice=lattice,
    )


def build_sphere_template(seed, diameter_mm: float, n_theta: int, n_phi: int, k: int) -> Template:
    """Spherical template: latitude-longitude endpoint grid plus two pole rays.

    Rays 0 .. n_theta*n_phi-1 are the grid (ring-major), followed by the
    north (+z) and south (-z) pole rays. Adjacency is the 4-neighborhood on
    the grid with wraparound in phi; each pole ray is adjacent to every ray
    of its nearest ring.
    """
    if diameter_mm <= 0:
        raise ValueError("diameter_mm must be positive")
    if n_theta < 2 or n_phi < 3 or k < 2:
        raise ValueError("requires n_theta >= 2, n_phi >= 3, k >= 2")
    radius = diameter_mm / 2.0
    seed = np.asarray(seed, dtype=np.float64)
    thetas = np.pi * np.arange(1, n_theta + 1) / (n_theta + 1)
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    dirs = np.empty((n_theta * n_phi + 2, 3))
    for j, th in enumerate(thetas):
        for p, ph in enumerate(phis):
            dirs[j * n_phi + p] = (np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th))
    north = n_theta * n_phi
    south = north + 1
    dirs[north] = (0.0, 0.0, 1.0)
    dirs[south] = (0.0, 0.0, -1.0)

    pairs = []
    for j in range(n_theta):
        for p in range(n_phi):
            r = j * n_phi + p
            pairs.append((r, j * n_phi + (p + 1) % n_phi))
            if j + 1 < n_theta:
                pairs.append((r, (j + 1) * n_phi + p))
    for p in range(n_phi):
        pairs.append((p, north))
        pairs.append(((n_theta - 1) * n_phi + p, south))

    return Template(
        seed=seed,
        kind="sphere",
        k=k,
        endpoints=seed + radius * dirs,
        neighbors=np.asarray(pairs, dtype=np.intp),
        scale=radius,
        grid_shape=(n_theta, n_phi),
    )
