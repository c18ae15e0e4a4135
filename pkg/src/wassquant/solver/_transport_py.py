"""Pure NumPy/Python transportation simplex kernel.

Reference implementation of the compiled kernel in ``_transport_cy.pyx``;
both run the identical algorithm (northwest-corner start, Dantzig pricing
with a Bland fallback after degenerate streaks, spanning-tree basis) so
they produce the same pivots and the same plans.
"""

from __future__ import annotations

import numpy as np

RC_TOL = 1e-11
DEGENERATE_STREAK = 50


class TransportError(RuntimeError):
    pass


def _northwest_arcs(a, b):
    k, l = a.shape[0], b.shape[0]
    ra = a.astype(float).copy()
    rb = b.astype(float).copy()
    arcs = []
    i = j = 0
    while not (i == k - 1 and j == l - 1):
        q = min(ra[i], rb[j])
        arcs.append((i, j, q))
        ra[i] -= q
        rb[j] -= q
        if i < k - 1 and (ra[i] <= 1e-15 or j == l - 1):
            i += 1
        else:
            j += 1
    arcs.append((i, j, min(ra[i], rb[j])))
    return arcs


def transportation_kernel(a, b, cost, max_iter=0):
    """Minimize sum(cost * plan) over plans with marginals (a, b).

    Returns (plan, objective, iterations). Inputs must be balanced.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    k, l = cost.shape
    n = k + l
    if max_iter <= 0:
        max_iter = 200 * n + 20_000

    parent = np.full(n, -1, dtype=np.int64)
    pflow = np.zeros(n)
    adj = [[] for _ in range(n)]
    for i, j, q in _northwest_arcs(a, b):
        adj[i].append((k + j, q))
        adj[k + j].append((i, q))
    # Root the staircase tree at row node 0.
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    order = []
    while stack:
        x = stack.pop()
        order.append(x)
        for y, q in adj[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                pflow[y] = q
                stack.append(y)
    if not seen.all():
        raise TransportError("initial basis is not a spanning tree")

    u = np.zeros(k)
    v = np.zeros(l)
    head = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    bfs = np.empty(n, dtype=np.int64)
    degen = 0
    bland = False

    for it in range(1, max_iter + 1):
        # Duals from the tree: u[i] + v[j] = cost[i, j] on every basic arc.
        head.fill(-1)
        for x in range(n):
            p = parent[x]
            if p >= 0:
                nxt[x] = head[p]
                head[p] = x
        bfs[0] = 0
        u[0] = 0.0
        m = 1
        pos = 0
        while pos < m:
            x = bfs[pos]
            pos += 1
            c = head[x]
            while c >= 0:
                if x < k:
                    v[c - k] = cost[x, c - k] - u[x]
                else:
                    u[c] = cost[c, x - k] - v[x - k]
                bfs[m] = c
                m += 1
                c = nxt[c]

        red = cost - u[:, None] - v[None, :]
        if bland:
            flat = np.argmax(red.ravel() < -RC_TOL)
            if red.ravel()[flat] >= -RC_TOL:
                break
            ei, ej = divmod(int(flat), l)
        else:
            flat = int(np.argmin(red.ravel()))
            if red.ravel()[flat] >= -RC_TOL:
                break
            ei, ej = divmod(flat, l)

        # Cycle: entering arc closes the unique tree path between ei and k+ej.
        pa, qa = ei, k + ej
        apath = [pa]
        while parent[apath[-1]] >= 0:
            apath.append(parent[apath[-1]])
        on_a = {x: d for d, x in enumerate(apath)}
        bpath = [qa]
        while bpath[-1] not in on_a:
            bpath.append(parent[bpath[-1]])
        lca = bpath[-1]
        apath = apath[: on_a[lca] + 1]

        # Walking the cycle pa -> qa -> ... -> lca -> ... -> pa, arcs at even
        # positions gain theta and odd positions lose it (the bipartite cycle
        # alternates rows and columns, position 0 being the entering arc).
        # Each tree arc is identified by its child endpoint.
        cyc = []  # (child node, cycle position)
        pos = 1
        for t in range(len(bpath) - 1):
            cyc.append((bpath[t], pos))
            pos += 1
        for s in range(len(apath) - 2, -1, -1):
            cyc.append((apath[s], pos))
            pos += 1
        minus = [x for x, p in cyc if p % 2 == 1]
        if not minus:
            raise TransportError("cycle without leaving candidates")
        flows = [pflow[x] for x in minus]
        theta = min(flows)
        # Deterministic leaving rule: last minimal arc along the cycle.
        leave = minus[len(flows) - 1 - flows[::-1].index(theta)]

        for x, p in cyc:
            if p % 2 == 1:
                pflow[x] = max(pflow[x] - theta, 0.0)
            else:
                pflow[x] += theta

        # Re-root the detached component at the entering endpoint inside it.
        sub_root = pa if leave in apath else qa
        attach = qa if sub_root == pa else pa
        path = [sub_root]
        while path[-1] != leave:
            path.append(parent[path[-1]])
        old_flows = [pflow[x] for x in path]
        for idx in range(len(path) - 1, 0, -1):
            parent[path[idx]] = path[idx - 1]
            pflow[path[idx]] = old_flows[idx - 1]
        parent[sub_root] = attach
        pflow[sub_root] = theta

        if theta <= 1e-13:
            degen += 1
            if degen >= DEGENERATE_STREAK:
                bland = True
        else:
            degen = 0
            bland = False
    else:
        raise TransportError("transportation simplex iteration limit exceeded")

    plan = np.zeros((k, l))
    for x in range(n):
        p = parent[x]
        if p < 0:
            continue
        if x < k:
            plan[x, p - k] = pflow[x]
        else:
            plan[p, x - k] = pflow[x]
    return plan, float(np.sum(cost * plan)), it
