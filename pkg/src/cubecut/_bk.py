"""Numba kernels for the Boykov-Kolmogorov max-flow solver.

Arcs are stored in sibling pairs: arc 2e is a forward arc, arc 2e+1 its
reverse (arc index a's sibling is a ^ 1). ``res`` holds per-arc residual
capacities and is mutated in place.
"""

import numpy as np
from numba import njit

TREE_FREE = 0
TREE_S = 1
TREE_T = 2

PARENT_ROOT = -1  # node is a tree root (s or t)
PARENT_NONE = -2  # free node or orphan


@njit(cache=True, inline="always")
def _fifo_push(buf, head, tail, val):
    n = buf.shape[0]
    if (tail + 1) % n == head:  # full: grow by doubling
        nb = np.empty(2 * n, np.int64)
        cnt = (tail - head) % n
        for idx in range(cnt):
            nb[idx] = buf[(head + idx) % n]
        buf = nb
        head = 0
        tail = cnt
    buf[tail] = val
    tail = (tail + 1) % buf.shape[0]
    return buf, head, tail


@njit(cache=True)
def _origin_valid(parent, arc_head, tree_kind, node):
    x = node
    while True:
        p = parent[x]
        if p == PARENT_ROOT:
            return True
        if p == PARENT_NONE:
            return False
        x = arc_head[p ^ 1] if tree_kind == TREE_S else arc_head[p]


@njit(cache=True)
def bk_maxflow_kernel(n_nodes, adj_start, adj_arcs, arc_head, res, eps):
    s = 0
    t = 1
    tree = np.zeros(n_nodes, np.uint8)
    parent = np.full(n_nodes, PARENT_NONE, np.int64)
    in_active = np.zeros(n_nodes, np.uint8)

    active = np.empty(max(16, n_nodes), np.int64)
    a_head = 0
    a_tail = 0
    orphans = np.empty(16, np.int64)
    o_head = 0
    o_tail = 0

    tree[s] = TREE_S
    tree[t] = TREE_T
    parent[s] = PARENT_ROOT
    parent[t] = PARENT_ROOT
    in_active[s] = 1
    in_active[t] = 1
    active, a_head, a_tail = _fifo_push(active, a_head, a_tail, s)
    active, a_head, a_tail = _fifo_push(active, a_head, a_tail, t)

    flow = 0.0
    while True:
        # --- grow ---
        connect = -1
        while a_head != a_tail:
            u = active[a_head]
            if in_active[u] == 0:
                a_head = (a_head + 1) % active.shape[0]
                continue
            tu = tree[u]
            found = -1
            for ii in range(adj_start[u], adj_start[u + 1]):
                a = adj_arcs[ii]
                if tu == TREE_S:
                    if res[a] <= eps:
                        continue
                    v = arc_head[a]
                    if tree[v] == TREE_FREE:
                        tree[v] = TREE_S
                        parent[v] = a
                        if in_active[v] == 0:
                            in_active[v] = 1
                            active, a_head, a_tail = _fifo_push(active, a_head, a_tail, v)
                    elif tree[v] == TREE_T:
                        found = a
                        break
                else:
                    ra = a ^ 1
                    if res[ra] <= eps:
                        continue
                    v = arc_head[a]
                    if tree[v] == TREE_FREE:
                        tree[v] = TREE_T
                        parent[v] = ra
                        if in_active[v] == 0:
                            in_active[v] = 1
                            active, a_head, a_tail = _fifo_push(active, a_head, a_tail, v)
                    elif tree[v] == TREE_S:
                        found = ra
                        break
            if found >= 0:
                connect = found  # u stays active
                break
            in_active[u] = 0
            a_head = (a_head + 1) % active.shape[0]
        if connect < 0:
            break

        # --- augment along s -> ... -> tail(connect) -> head(connect) -> ... -> t ---
        bottleneck = res[connect]
        x = arc_head[connect ^ 1]
        while parent[x] != PARENT_ROOT:
            pa = parent[x]
            if res[pa] < bottleneck:
                bottleneck = res[pa]
            x = arc_head[pa ^ 1]
        x = arc_head[connect]
        while parent[x] != PARENT_ROOT:
            pa = parent[x]
            if res[pa] < bottleneck:
                bottleneck = res[pa]
            x = arc_head[pa]
        flow += bottleneck
        res[connect] -= bottleneck
        res[connect ^ 1] += bottleneck

        x = arc_head[connect ^ 1]
        while parent[x] != PARENT_ROOT:
            pa = parent[x]
            res[pa] -= bottleneck
            res[pa ^ 1] += bottleneck
            nxt = arc_head[pa ^ 1]
            if res[pa] <= eps:
                parent[x] = PARENT_NONE
                orphans, o_head, o_tail = _fifo_push(orphans, o_head, o_tail, x)
            x = nxt
        x = arc_head[connect]
        while parent[x] != PARENT_ROOT:
            pa = parent[x]
            res[pa] -= bottleneck
            res[pa ^ 1] += bottleneck
            nxt = arc_head[pa]
            if res[pa] <= eps:
                parent[x] = PARENT_NONE
                orphans, o_head, o_tail = _fifo_push(orphans, o_head, o_tail, x)
            x = nxt

        # --- adopt ---
        while o_head != o_tail:
            o = orphans[o_head]
            o_head = (o_head + 1) % orphans.shape[0]
            to = tree[o]
            new_parent = -1
            for ii in range(adj_start[o], adj_start[o + 1]):
                a = adj_arcs[ii]
                q = arc_head[a]
                if tree[q] != to:
                    continue
                cand = a ^ 1 if to == TREE_S else a  # arc q->o (S) / o->q (T)
                if res[cand] <= eps:
                    continue
                if _origin_valid(parent, arc_head, to, q):
                    new_parent = cand
                    break
            if new_parent >= 0:
                parent[o] = new_parent
                continue
            for ii in range(adj_start[o], adj_start[o + 1]):
                a = adj_arcs[ii]
                q = arc_head[a]
                if tree[q] != to:
                    continue
                cand = a ^ 1 if to == TREE_S else a
                if res[cand] > eps and in_active[q] == 0:
                    in_active[q] = 1
                    active, a_head, a_tail = _fifo_push(active, a_head, a_tail, q)
                pq = parent[q]
                if pq >= 0:
                    pnode = arc_head[pq ^ 1] if to == TREE_S else arc_head[pq]
                    if pnode == o:
                        parent[q] = PARENT_NONE
                        orphans, o_head, o_tail = _fifo_push(orphans, o_head, o_tail, q)
            tree[o] = TREE_FREE
            in_active[o] = 0

    return flow


@njit(cache=True)
def source_reachable_kernel(n_nodes, adj_start, adj_arcs, arc_head, res, eps):
    seen = np.zeros(n_nodes, np.uint8)
    stack = np.empty(n_nodes, np.int64)
    seen[0] = 1
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        u = stack[top]
        for ii in range(adj_start[u], adj_start[u + 1]):
            a = adj_arcs[ii]
            if res[a] <= eps:
                continue
            v = arc_head[a]
            if seen[v] == 0:
                seen[v] = 1
                stack[top] = v
                top += 1
    return seen
