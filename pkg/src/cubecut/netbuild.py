"""Translate a template, volume, and seed statistics into the two-terminal flow network."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .template import Template
from .volume import SeedStats, Volume, sample_trilinear

S_NODE = 0
T_NODE = 1
SEED_NODE = 2


def node_id(r: int, i: int, k: int) -> int:
    """Network node id of template node (ray r, layer i); layer 1 is shared."""
    if i == 1:
        return SEED_NODE
    return 3 + r * (k - 1) + (i - 2)


@dataclass(frozen=True)
class FlowNetwork:
    """Directed capacitated two-terminal graph (s = node 0, t = node 1).

    Infinite capacities are finalized to ``inf_value`` = 1 + sum of all
    finite capacities, so any cut severing such an arc is strictly worse
    than every finite cut.
    """

    n_nodes: int
    tails: np.ndarray  # (a,) int
    heads: np.ndarray  # (a,) int
    caps: np.ndarray  # (a,) float, finite
    inf_value: float
    n_rays: int | None = None
    k: int | None = None

    @property
    def n_arcs(self) -> int:
        return self.tails.shape[0]


def w_coeff(i: int, k: int) -> float:
    """Loading coefficient: linear decay from 1 at the seed to 0 at the ray end."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if not (1 <= i <= k):
        raise ValueError("layer index out of range")
    return 1.0 - (i - 1) / (k - 1)


def ray_olink_caps(
    greys: np.ndarray, stats: SeedStats, k: int, loading: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """O-link capacities for one ray from its sampled greys (length k, seed first).

    Returns (s_caps, t_caps) for layers 1..k with np.inf marking the symbolic
    infinite capacity; the seed gets (inf, 0) and the last layer (0, inf).
    Interval membership is inclusive at both bounds.
    """
    greys = np.asarray(greys, dtype=np.float64)
    if greys.shape != (k,):
        raise ValueError("expected one grey per layer")
    s_caps = np.zeros(k)
    t_caps = np.zeros(k)
    s_caps[0] = np.inf
    for i in range(2, k + 1):
        g_i = greys[i - 1]
        g_prev = greys[i - 2]
        if i == k:
            s_caps[i - 1] = 0.0
            t_caps[i - 1] = np.inf
            continue
        diff = abs(abs(stats.g_avg - g_i) - abs(stats.g_avg - g_prev))
        if stats.g_min <= g_i <= stats.g_max or abs(stats.g_avg - g_i) <= abs(stats.g_avg - g_prev):
            s_caps[i - 1] = (w_coeff(i, k) if loading else 1.0) * diff
        else:
            t_caps[i - 1] = diff
    return s_caps, t_caps


def weight_olinks(
    template: Template, volume: Volume, stats: SeedStats
) -> tuple[np.ndarray, np.ndarray]:
    """Per-node (s_cap, t_cap) arrays of shape (n, k), np.inf for infinite.

    Column 0 is the shared seed node, identical across rays; greys come from
    trilinear sampling at the node positions (the seed grey is shared).
    """
    pos = template.node_positions()  # (n, k, 3)
    greys = sample_trilinear(volume, pos.reshape(-1, 3)).reshape(template.n, template.k)
    greys[:, 0] = sample_trilinear(volume, template.seed)
    s_caps = np.empty((template.n, template.k))
    t_caps = np.empty((template.n, template.k))
    for r in range(template.n):
        s_caps[r], t_caps[r] = ray_olink_caps(greys[r], stats, template.k)
    return s_caps, t_caps


def add_zedges(template: Template) -> list[tuple[int, int]]:
    """Infinite arcs from each node to its predecessor on the same ray."""
    k = template.k
    arcs = []
    for r in range(template.n):
        for i in range(2, k + 1):
            arcs.append((node_id(r, i, k), node_id(r, i - 1, k)))
    return arcs


def add_xyedges(template: Template, delta: int) -> list[tuple[int, int]]:
    """Infinite arcs implementing the smoothness constraint between adjacent rays.

    For every ordered neighbor pair (r, r') and layer i, an arc from node
    (r, i) to node (r', max(i - delta, 1)); seed self-loops are dropped.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    k = template.k
    arcs = []
    for a, b in template.neighbors:
        for r, rp in ((int(a), int(b)), (int(b), int(a))):
            for i in range(1, k + 1):
                j = max(i - delta, 1)
                u = node_id(r, i, k)
                v = node_id(rp, j, k)
                if u == v:
                    continue
                arcs.append((u, v))
    return arcs


def build_network(template: Template, volume: Volume, stats: SeedStats, delta: int) -> FlowNetwork:
    """Union of o-links, z-edges, and xy-edges with finalized infinite capacities.

    Arc ordering is deterministic: the seed's o-links, then per ray (major)
    and layer (minor) the s- and t-link of each node, then z-edges, then
    xy-edges; identical inputs yield identical networks.
    """
    n, k = template.n, template.k
    s_caps, t_caps = weight_olinks(template, volume, stats)
    tails: list[int] = []
    heads: list[int] = []
    caps: list[float] = []

    def olink(node: int, s_cap: float, t_cap: float):
        tails.append(S_NODE)
        heads.append(node)
        caps.append(s_cap)
        tails.append(node)
        heads.append(T_NODE)
        caps.append(t_cap)

    olink(SEED_NODE, s_caps[0, 0], t_caps[0, 0])
    for r in range(n):
        for i in range(2, k + 1):
            olink(node_id(r, i, k), s_caps[r, i - 1], t_caps[r, i - 1])
    for u, v in add_zedges(template):
        tails.append(u)
        heads.append(v)
        caps.append(np.inf)
    for u, v in add_xyedges(template, delta):
        tails.append(u)
        heads.append(v)
        caps.append(np.inf)

    caps_arr = np.asarray(caps, dtype=np.float64)
    finite = caps_arr[np.isfinite(caps_arr)]
    if np.any(finite < 0) or np.any(np.isnan(caps_arr)):
        raise ValueError("capacities must be non-negative")
    inf_value = 1.0 + float(finite.sum())
    caps_arr[~np.isfinite(caps_arr)] = inf_value
    return FlowNetwork(
        n_nodes=n * (k - 1) + 1 + 2,
        tails=np.asarray(tails, dtype=np.int64),
        heads=np.asarray(heads, dtype=np.int64),
        caps=caps_arr,
        inf_value=inf_value,
        n_rays=n,
        k=k,
    )


def write_arc_list(network: FlowNetwork, path) -> None:
    """Debug dump: one ``from to capacity`` line per arc, INF spelled out."""
    with open(path, "w") as f:
        for u, v, c in zip(network.tails, network.heads, network.caps):
            label = "INF" if c == network.inf_value else repr(float(c))
            f.write(f"{u} {v} {label}\n")
