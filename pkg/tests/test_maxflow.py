import numpy as np
import pytest

from cubecut.maxflow import (
    bk_maxflow,
    cut_capacity,
    min_cut_partition,
    reference_mincut,
)
from cubecut.netbuild import FlowNetwork, build_network
from cubecut.template import build_cube_template
from cubecut.volume import Volume, seed_stats


def make_network(n_nodes, arcs):
    tails = np.array([a[0] for a in arcs], dtype=np.int64)
    heads = np.array([a[1] for a in arcs], dtype=np.int64)
    caps = np.array([a[2] for a in arcs], dtype=np.float64)
    return FlowNetwork(
        n_nodes=n_nodes, tails=tails, heads=heads, caps=caps,
        inf_value=1.0 + float(caps.sum()),
    )


def random_network(rng, max_nonterminals=6):
    n_mid = int(rng.integers(1, max_nonterminals + 1))
    n_nodes = 2 + n_mid
    arcs = []
    for u in range(n_nodes):
        for v in range(n_nodes):
            if u == v or v == 0 or u == 1:
                continue
            if rng.random() < 0.5:
                arcs.append((u, v, float(rng.uniform(0, 10))))
    if not arcs:
        arcs.append((0, 1, float(rng.uniform(0, 10))))
    return make_network(n_nodes, arcs)


class TestBkMaxflow:
    def test_single_arc(self):
        net = make_network(2, [(0, 1, 7.0)])
        state = bk_maxflow(net)
        assert state.flow_value == pytest.approx(7.0)
        assert state.arc_residuals()[0] == pytest.approx(0.0)

    def test_diamond(self):
        # s->a 3, s->b 2, a->b 1, a->t 2, b->t 3: max flow 5
        net = make_network(4, [(0, 2, 3), (0, 3, 2), (2, 3, 1), (2, 1, 2), (3, 1, 3)])
        state = bk_maxflow(net)
        assert state.flow_value == pytest.approx(5.0)
        in_source = min_cut_partition(net, state)
        # both s-arcs saturate, so the minimal source side is just s
        assert in_source.tolist() == [True, False, False, False]

    def test_disconnected_sink(self):
        net = make_network(3, [(0, 2, 4.0)])
        state = bk_maxflow(net)
        assert state.flow_value == 0.0
        in_source = min_cut_partition(net, state)
        assert in_source[0] and in_source[2] and not in_source[1]

    def test_rejects_negative_capacity(self):
        net = make_network(2, [(0, 1, -1.0)])
        with pytest.raises(ValueError):
            bk_maxflow(net)

    def test_flow_equals_cut_of_partition(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            net = random_network(rng)
            state = bk_maxflow(net)
            in_source = min_cut_partition(net, state)
            assert in_source[0] and not in_source[1]
            assert cut_capacity(net, in_source) == pytest.approx(state.flow_value, abs=1e-9)

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(60):
            net = random_network(rng)
            state = bk_maxflow(net)
            ref_value, _ = reference_mincut(net)
            assert state.flow_value == pytest.approx(ref_value, abs=1e-9)

    def test_deterministic(self):
        rng = np.random.default_rng(31)
        net = random_network(rng)
        a = bk_maxflow(net)
        b = bk_maxflow(net)
        assert a.flow_value == b.flow_value
        assert np.array_equal(a.residuals, b.residuals)


class TestReferenceOracle:
    def test_exhaustive_matches_edmonds_karp(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            net = random_network(rng, max_nonterminals=5)
            exhaustive, _ = reference_mincut(net, exhaustive_limit=20)
            ek, _ = reference_mincut(net, exhaustive_limit=0)
            assert exhaustive == pytest.approx(ek, abs=1e-9)

    def test_diamond_value(self):
        net = make_network(4, [(0, 2, 3), (0, 3, 2), (2, 3, 1), (2, 1, 2), (3, 1, 3)])
        value, source_set = reference_mincut(net)
        assert value == pytest.approx(5.0)
        assert 0 in source_set and 1 not in source_set


def template_network(grey_fn, m=3, k=5, delta=1):
    data = np.fromfunction(
        lambda x, y, z: grey_fn(x, y, z), (20, 20, 20), dtype=float
    )
    volume = Volume(data=data, spacing=(1, 1, 1))
    seed = (9.5, 9.5, 9.5)
    template = build_cube_template(seed, edge_mm=14, m=m, k=k)
    stats = seed_stats(volume, seed, 1)
    return build_network(template, volume, stats, delta), template


class TestOnTemplateNetworks:
    def test_no_infinite_arc_crosses_cut(self):
        net, _ = template_network(lambda x, y, z: np.where(
            np.maximum(np.maximum(np.abs(x - 9.5), np.abs(y - 9.5)), np.abs(z - 9.5)) < 4,
            120.0, 30.0,
        ))
        state = bk_maxflow(net)
        in_source = min_cut_partition(net, state)
        crossing = in_source[net.tails] & ~in_source[net.heads]
        assert not np.any(net.caps[crossing] == net.inf_value)

    def test_flow_matches_edmonds_karp_on_template(self):
        net, _ = template_network(
            lambda x, y, z: 30.0 + 90.0 * np.exp(-((x - 9.5) ** 2 + (y - 9.5) ** 2
                                                   + (z - 9.5) ** 2) / 20.0)
        )
        state = bk_maxflow(net)
        ref_value, _ = reference_mincut(net, exhaustive_limit=0)
        assert state.flow_value == pytest.approx(ref_value, rel=1e-9, abs=1e-9)
