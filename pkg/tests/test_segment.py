import numpy as np
import pytest

from cubecut.evaluate import PhantomSpec, dsc, gen_phantom
from cubecut.maxflow import bk_maxflow, min_cut_partition
from cubecut.netbuild import build_network, node_id
from cubecut.segment import (
    Params,
    build_template,
    energy,
    node_labels,
    ray_boundaries,
    segment,
    triangulate,
    voxelize,
    write_stl,
)
from cubecut.template import build_cube_template
from cubecut.volume import Volume, seed_stats


def box_volume(dims=(40, 40, 40), half=12.0, contrast=(30.0, 120.0), sigma=0.0, seed=0):
    center = tuple((d - 1) / 2.0 for d in dims)
    spec = PhantomSpec(
        dims=dims,
        box_center_mm=center,
        box_half_mm=(half, half, half),
        background_grey=contrast[0],
        object_grey=contrast[1],
        noise_sigma=sigma,
        rng_seed=seed,
    )
    volume, truth = gen_phantom(spec)
    return volume, truth, center


def run_params(center, **overrides):
    base = dict(seed=center, edge_mm=32, m=5, k=17, delta=2, stats_halfwidth=1)
    base.update(overrides)
    return Params(**base)


class TestLabelsAndBoundaries:
    def test_uniform_volume_degenerates_to_seed(self):
        volume = Volume(data=np.full((30, 30, 30), 60.0), spacing=(1, 1, 1))
        center = (14.5, 14.5, 14.5)
        result = segment(volume, run_params(center, delta=0))
        assert np.all(result.boundaries == 1)
        assert result.cut_value == pytest.approx(0.0, abs=1e-12)

    def test_boundaries_are_prefix_lengths(self):
        volume, _, center = box_volume(sigma=4.0, seed=7)
        params = run_params(center)
        template = build_template(params)
        stats = seed_stats(volume, center, params.stats_halfwidth)
        net = build_network(template, volume, stats, params.delta)
        state = bk_maxflow(net)
        in_source = min_cut_partition(net, state)
        labels = node_labels(template, in_source)
        b = ray_boundaries(template, in_source)
        for r in range(template.n):
            assert labels[r, : b[r]].all()
            assert not labels[r, b[r] :].any()

    def test_rejects_non_prefix_labels(self):
        params = run_params((0.0, 0.0, 0.0), edge_mm=8, m=2, k=4)
        template = build_template(params)
        in_source = np.zeros(3 + template.n * (template.k - 1), dtype=bool)
        in_source[0] = True
        in_source[2] = True
        in_source[node_id(0, 3, template.k)] = True  # layer 2 skipped
        with pytest.raises(ValueError, match="non-prefix"):
            ray_boundaries(template, in_source)

    def test_smoothness_bound_holds(self):
        volume, _, center = box_volume(sigma=6.0, seed=11)
        for delta in (0, 1, 2):
            result = segment(volume, run_params(center, delta=delta))
            b = result.boundaries
            for a, c in result.template.neighbors:
                assert abs(int(b[int(a)]) - int(b[int(c)])) <= delta


class TestEnergy:
    def test_energy_equals_flow_value(self):
        volume, _, center = box_volume(sigma=5.0, seed=3)
        params = run_params(center)
        template = build_template(params)
        stats = seed_stats(volume, center, params.stats_halfwidth)
        net = build_network(template, volume, stats, params.delta)
        state = bk_maxflow(net)
        in_source = min_cut_partition(net, state)
        assert energy(net, in_source) == pytest.approx(state.flow_value, rel=1e-9)

    def test_energy_of_worse_labeling_is_higher(self):
        volume, _, center = box_volume(sigma=5.0, seed=3)
        params = run_params(center)
        template = build_template(params)
        stats = seed_stats(volume, center, params.stats_halfwidth)
        net = build_network(template, volume, stats, params.delta)
        state = bk_maxflow(net)
        in_source = min_cut_partition(net, state)
        everything = np.ones_like(in_source)
        everything[1] = False
        assert energy(net, everything) >= state.flow_value - 1e-9

    def test_requires_full_labeling(self):
        volume, _, center = box_volume()
        params = run_params(center)
        template = build_template(params)
        stats = seed_stats(volume, center, params.stats_halfwidth)
        net = build_network(template, volume, stats, params.delta)
        with pytest.raises(ValueError):
            energy(net, np.ones(3, dtype=bool))


class TestVoxelize:
    def test_full_boundary_fills_template_cube(self):
        volume = Volume(data=np.zeros((21, 21, 21)), spacing=(1, 1, 1))
        template = build_cube_template((10, 10, 10), edge_mm=12, m=3, k=7)
        mask = voxelize(template, np.full(template.n, template.k), volume)
        xs = np.arange(21.0)
        inside = np.abs(xs - 10) <= 6 + 1e-9
        expect = inside[:, None, None] & inside[None, :, None] & inside[None, None, :]
        assert np.array_equal(mask.astype(bool), expect)

    def test_seed_only_boundary_is_tiny(self):
        volume = Volume(data=np.zeros((21, 21, 21)), spacing=(1, 1, 1))
        template = build_cube_template((10, 10, 10), edge_mm=12, m=3, k=7)
        mask = voxelize(template, np.ones(template.n, dtype=int), volume)
        assert mask[10, 10, 10] == 1
        # half a layer is 1 mm here, so nothing beyond the direct neighbors
        assert mask.sum() <= 7

    def test_mask_within_template_extent(self):
        volume = Volume(data=np.zeros((30, 30, 30)), spacing=(1, 1, 1))
        template = build_cube_template((14.5, 14.5, 14.5), edge_mm=16, m=4, k=9)
        rng = np.random.default_rng(9)
        b = rng.integers(1, template.k + 1, template.n)
        # smoothness not needed for voxelization itself
        mask = voxelize(template, b, volume)
        idx = np.argwhere(mask)
        if len(idx):
            linf = np.abs(idx - 14.5).max()
            assert linf <= 8.0 + 1e-9

    def test_sphere_full_boundary_is_ball(self):
        volume = Volume(data=np.zeros((25, 25, 25)), spacing=(1, 1, 1))
        params = Params(seed=(12, 12, 12), kind="sphere", diameter_mm=16,
                        n_theta=6, n_phi=12, k=9)
        template = build_template(params)
        mask = voxelize(template, np.full(template.n, template.k), volume)
        idx = np.argwhere(mask)
        dist = np.linalg.norm(idx - np.array([12, 12, 12]), axis=1)
        assert dist.max() <= 8.0 + 0.5 + 1e-9
        # voxel centers strictly inside must all be set
        grid = np.indices((25, 25, 25)).reshape(3, -1).T
        inside = np.linalg.norm(grid - np.array([12, 12, 12]), axis=1) <= 7.4
        assert mask.reshape(-1)[inside].all()


class TestTriangulate:
    def test_cube_mesh_euler(self):
        template = build_cube_template((0, 0, 0), edge_mm=10, m=4, k=5)
        verts, tris = triangulate(template, np.full(template.n, template.k))
        m = 4
        assert len(verts) == 6 * m * m - 12 * m + 8
        assert len(tris) == 12 * (m - 1) ** 2
        edges = set()
        for a, b, c in tris:
            for u, v in ((a, b), (b, c), (c, a)):
                edges.add((min(u, v), max(u, v)))
        assert len(verts) - len(edges) + len(tris) == 2

    def test_m2_box_mesh(self):
        template = build_cube_template((0, 0, 0), edge_mm=10, m=2, k=3)
        verts, tris = triangulate(template, np.full(template.n, template.k))
        assert len(verts) == 8 and len(tris) == 12

    def test_outward_orientation(self):
        template = build_cube_template((1, 2, 3), edge_mm=10, m=3, k=4)
        verts, tris = triangulate(template, np.full(template.n, template.k))
        center = np.array([1.0, 2.0, 3.0])
        for a, b, c in tris:
            normal = np.cross(verts[b] - verts[a], verts[c] - verts[a])
            outward = verts[[a, b, c]].mean(axis=0) - center
            assert np.dot(normal, outward) > 0

    def test_sphere_mesh_euler(self):
        params = Params(seed=(0, 0, 0), kind="sphere", diameter_mm=10,
                        n_theta=4, n_phi=8, k=3)
        template = build_template(params)
        verts, tris = triangulate(template, np.full(template.n, template.k))
        edges = set()
        for a, b, c in tris:
            for u, v in ((a, b), (b, c), (c, a)):
                edges.add((min(u, v), max(u, v)))
        assert len(verts) - len(edges) + len(tris) == 2

    def test_vertices_at_boundary_nodes(self):
        template = build_cube_template((0, 0, 0), edge_mm=10, m=2, k=5)
        b = np.array([1, 2, 3, 4, 5, 5, 3, 2])
        verts, _ = triangulate(template, b)
        for r in range(template.n):
            assert np.allclose(verts[r], template.node_pos(r, int(b[r])))

    def test_stl_export(self, tmp_path):
        template = build_cube_template((0, 0, 0), edge_mm=10, m=2, k=3)
        verts, tris = triangulate(template, np.full(template.n, template.k))
        path = tmp_path / "mesh.stl"
        write_stl(verts, tris, path)
        text = path.read_text()
        assert text.startswith("solid") and text.rstrip().endswith("endsolid cubecut")
        assert text.count("facet normal") == len(tris)
        assert text.count("vertex") == 3 * len(tris)


class TestSegmentPipeline:
    def test_recovers_box(self):
        volume, truth, center = box_volume(sigma=4.0, seed=2)
        result = segment(volume, run_params(center))
        assert dsc(result.mask, truth) > 0.95
        assert result.warnings == []

    def test_deterministic(self):
        volume, _, center = box_volume(sigma=5.0, seed=21)
        a = segment(volume, run_params(center))
        b = segment(volume, run_params(center))
        assert np.array_equal(a.mask, b.mask)
        assert np.array_equal(a.boundaries, b.boundaries)
        assert a.cut_value == b.cut_value

    def test_noiseless_delta0_is_analytic_cube(self):
        volume, _, center = box_volume(half=12.0)
        result = segment(volume, run_params(center, delta=0))
        assert np.all(result.boundaries == result.boundaries[0])
        b = int(result.boundaries[0])
        half = 16.0 * (b - 1) / 16.0  # edge 32 -> half-edge 16, k = 17
        linf = np.abs(result.vertices - np.array(center)).max(axis=1)
        assert np.allclose(linf, half, atol=1e-9)

    def test_small_template_warns(self):
        volume, _, center = box_volume(half=14.0, sigma=4.0, seed=5)
        result = segment(volume, run_params(center, edge_mm=20))
        assert any("smaller" in w for w in result.warnings)

    def test_seed_outside_errors(self):
        volume, _, _ = box_volume()
        with pytest.raises(ValueError, match="outside volume"):
            segment(volume, run_params((500.0, 0.0, 0.0)))

    def test_sphere_kind_runs(self):
        volume, truth, center = box_volume(sigma=4.0, seed=2)
        params = Params(seed=center, kind="sphere", diameter_mm=36,
                        n_theta=8, n_phi=16, k=17, delta=2, stats_halfwidth=1)
        result = segment(volume, params)
        assert dsc(result.mask, truth) > 0.8

    def test_unknown_kind_rejected(self):
        volume, _, center = box_volume()
        with pytest.raises(ValueError, match="template kind"):
            segment(volume, run_params(center, kind="torus"))
