"""Max-flow/min-cut solving on two-terminal networks, plus independent test oracles."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ._bk import bk_maxflow_kernel, source_reachable_kernel
from .netbuild import FlowNetwork

# Residuals below this are treated as zero when testing reachability, to
# avoid flicker from float rounding.
RESIDUAL_EPS = 1e-12


@dataclass(frozen=True)
class FlowState:
    """Result of a max-flow run: per-arc residual capacities and the flow value.

    ``residuals`` is interleaved with the arcs' reverse siblings:
    index 2a is network arc a, index 2a+1 its reverse.
    """

    residuals: np.ndarray
    flow_value: float
    _adj_start: np.ndarray
    _adj_arcs: np.ndarray
    _arc_head: np.ndarray

    def arc_residuals(self) -> np.ndarray:
        """Residual capacity of each network arc (forward direction)."""
        return self.residuals[0::2]


def _paired_arcs(network: FlowNetwork):
    a = network.n_arcs
    arc_head = np.empty(2 * a, dtype=np.int64)
    arc_tail = np.empty(2 * a, dtype=np.int64)
    arc_head[0::2] = network.heads
    arc_head[1::2] = network.tails
    arc_tail[0::2] = network.tails
    arc_tail[1::2] = network.heads
    res = np.zeros(2 * a, dtype=np.float64)
    res[0::2] = network.caps
    # CSR adjacency over arc tails.
    order = np.argsort(arc_tail, kind="stable")
    counts = np.bincount(arc_tail, minlength=network.n_nodes)
    adj_start = np.zeros(network.n_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=adj_start[1:])
    return adj_start, order.astype(np.int64), arc_head, res


def bk_maxflow(network: FlowNetwork) -> FlowState:
    """Boykov-Kolmogorov tree-growth max-flow; deterministic for a fixed arc order."""
    if np.any(network.caps < 0) or np.any(np.isnan(network.caps)):
        raise ValueError("capacities must be non-negative")
    adj_start, adj_arcs, arc_head, res = _paired_arcs(network)
    flow = bk_maxflow_kernel(network.n_nodes, adj_start, adj_arcs, arc_head, res, RESIDUAL_EPS)
    return FlowState(
        residuals=res,
        flow_value=float(flow),
        _adj_start=adj_start,
        _adj_arcs=adj_arcs,
        _arc_head=arc_head,
    )


def min_cut_partition(network: FlowNetwork, state: FlowState) -> np.ndarray:
    """Source side of the minimum cut as a boolean array over node ids.

    S is s plus every node reachable from s through strictly positive
    residual arcs (the minimal source set among tied minimum cuts).
    """
    seen = source_reachable_kernel(
        network.n_nodes, state._adj_start, state._adj_arcs, state._arc_head,
        state.residuals, RESIDUAL_EPS,
    )
    return seen.astype(bool)


def cut_capacity(network: FlowNetwork, in_source: np.ndarray) -> float:
    """Total capacity of arcs crossing from the source side to the sink side."""
    crossing = in_source[network.tails] & ~in_source[network.heads]
    return float(network.caps[crossing].sum())


def reference_mincut(network: FlowNetwork, exhaustive_limit: int = 20) -> tuple[float, set[int]]:
    """Independent min-cut oracle, kept free of the BK code path.

    Exhaustively enumerates all source-side subsets when the network has at
    most ``exhaustive_limit`` non-terminal nodes; otherwise falls back to a
    plain shortest-augmenting-path (Edmonds-Karp) max-flow.
    """
    nonterminals = list(range(2, network.n_nodes))
    if len(nonterminals) <= exhaustive_limit:
        best_value = None
        best_set = None
        for bits in range(1 << len(nonterminals)):
            in_source = np.zeros(network.n_nodes, dtype=bool)
            in_source[0] = True
            for idx, node in enumerate(nonterminals):
                if bits >> idx & 1:
                    in_source[node] = True
            value = cut_capacity(network, in_source)
            if best_value is None or value < best_value - 1e-15:
                best_value = value
                best_set = {int(v) for v in np.nonzero(in_source)[0]}
        return best_value, best_set
    return _edmonds_karp(network)


def _edmonds_karp(network: FlowNetwork) -> tuple[float, set[int]]:
    residual: dict[int, dict[int, float]] = {u: {} for u in range(network.n_nodes)}
    for u, v, c in zip(network.tails, network.heads, network.caps):
        u, v = int(u), int(v)
        residual[u][v] = residual[u].get(v, 0.0) + float(c)
        residual[v].setdefault(u, 0.0)
    flow = 0.0
    while True:
        prev = {0: None}
        queue = deque([0])
        while queue and 1 not in prev:
            u = queue.popleft()
            for v, c in residual[u].items():
                if c > RESIDUAL_EPS and v not in prev:
                    prev[v] = u
                    queue.append(v)
        if 1 not in prev:
            break
        path = []
        v = 1
        while prev[v] is not None:
            path.append((prev[v], v))
            v = prev[v]
        bottleneck = min(residual[u][v] for u, v in path)
        for u, v in path:
            residual[u][v] -= bottleneck
            residual[v][u] += bottleneck
        flow += bottleneck
    reachable = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v, c in residual[u].items():
            if c > RESIDUAL_EPS and v not in reachable:
                reachable.add(v)
                queue.append(v)
    return flow, reachable
