"""Independent oracles used to pin expected values in the test suite.

Each oracle takes a route disjoint from the implementation it checks:
rational-arithmetic vertex enumeration for the simplex solver, successive
shortest paths on integers for transportation, exhaustive enumeration for
the MILPs and for box-simplex vertices, mpmath bisection for the binomial
tail inversions.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from itertools import combinations, product

import numpy as np


def rational_solve(a_rows, rhs):
    """Exact solve of a square Fraction system; None if singular."""
    m = len(rhs)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(a_rows)]
    for col in range(m):
        piv = None
        for r in range(col, m):
            if aug[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        pval = aug[col][col]
        aug[col] = [v / pval for v in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [aug[r][m] for r in range(m)]


def lp_enumeration_oracle(c, a, b, lo, hi):
    """Exact optimum of max c.x s.t. a x = b, lo <= x <= hi (Fractions).

    Enumerates every basis and every at-bound pattern of the nonbasic
    variables; `hi[j] = None` means unbounded above. Returns the best
    objective as a Fraction, or None if infeasible.
    """
    m = len(b)
    n = len(c)
    best = None
    for basis in combinations(range(n), m):
        cols = [[a[i][j] for j in basis] for i in range(m)]
        nonbasic = [j for j in range(n) if j not in basis]
        opts = []
        for j in nonbasic:
            vals = [lo[j]]
            if hi[j] is not None and hi[j] != lo[j]:
                vals.append(hi[j])
            opts.append(vals)
        singular = False
        for pattern in product(*opts):
            rhs = [
                b[i] - sum(a[i][j] * pattern[t] for t, j in enumerate(nonbasic))
                for i in range(m)
            ]
            xb = rational_solve(cols, rhs)
            if xb is None:
                singular = True
                break
            ok = True
            for t, j in enumerate(basis):
                if xb[t] < lo[j] or (hi[j] is not None and xb[t] > hi[j]):
                    ok = False
                    break
            if not ok:
                continue
            x = [Fraction(0)] * n
            for t, j in enumerate(nonbasic):
                x[j] = pattern[t]
            for t, j in enumerate(basis):
                x[j] = xb[t]
            val = sum(c[j] * x[j] for j in range(n))
            if best is None or val > best:
                best = val
        if singular:
            continue
    return best


def min_cost_flow_ssp(supply, demand, cost):
    """Exact min-cost transportation via successive shortest paths.

    Integer supplies/demands, nonnegative float costs. Dijkstra with
    potentials on the dense bipartite graph. Returns the optimal cost.
    """
    supply = [int(s) for s in supply]
    demand = [int(d) for d in demand]
    assert sum(supply) == sum(demand)
    k, l = len(supply), len(demand)
    flow = [[0] * l for _ in range(k)]
    rem_s = supply[:]
    rem_d = demand[:]
    pot_u = [0.0] * k
    pot_v = [0.0] * l
    total = 0.0
    while sum(rem_s) > 0:
        # Dijkstra from the set of sources with remaining supply.
        du = [np.inf] * k
        dv = [np.inf] * l
        for i in range(k):
            if rem_s[i] > 0:
                du[i] = 0.0
        heap = [(0.0, 0, i) for i in range(k) if rem_s[i] > 0]
        par_v = [-1] * l
        par_u = [-1] * k
        done_u = [False] * k
        done_v = [False] * l
        while heap:
            dist, side, node = heapq.heappop(heap)
            if side == 0:
                if done_u[node] or dist > du[node]:
                    continue
                done_u[node] = True
                for j in range(l):
                    w = cost[node][j] - pot_u[node] - pot_v[j]
                    if du[node] + w < dv[j] - 1e-15:
                        dv[j] = du[node] + w
                        par_v[j] = node
                        heapq.heappush(heap, (dv[j], 1, j))
            else:
                if done_v[node] or dist > dv[node]:
                    continue
                done_v[node] = True
                for i in range(k):
                    if flow[i][node] > 0:
                        w = -(cost[i][node] - pot_u[i] - pot_v[node])
                        if dv[node] + w < du[i] - 1e-15:
                            du[i] = dv[node] + w
                            par_u[i] = node
                            heapq.heappush(heap, (du[i], 0, i))
        # pick the reachable sink with remaining demand at minimal distance
        best_j = -1
        for j in range(l):
            if rem_d[j] > 0 and dv[j] < np.inf:
                if best_j < 0 or dv[j] < dv[best_j]:
                    best_j = j
        assert best_j >= 0, "disconnected transportation instance"
        # trace path back, find bottleneck
        path = []
        j = best_j
        while True:
            i = par_v[j]
            path.append((i, j, +1))
            if par_u[i] == -1 and rem_s[i] > 0 and du[i] == 0.0:
                break
            j2 = par_u[i]
            path.append((i, j2, -1))
            j = j2
        bottleneck = min(rem_s[path[-1][0]], rem_d[best_j])
        for i, j, s in path:
            if s < 0:
                bottleneck = min(bottleneck, flow[i][j])
        for i, j, s in path:
            flow[i][j] += s * bottleneck
        rem_s[path[-1][0]] -= bottleneck
        rem_d[best_j] -= bottleneck
        # Johnson potentials capped at the augmenting distance keep all
        # residual reduced costs nonnegative for the next round.
        dist_cap = dv[best_j]
        for i in range(k):
            if du[i] < np.inf:
                pot_u[i] += min(du[i], dist_cap)
        for j in range(l):
            if dv[j] < np.inf:
                pot_v[j] += min(dv[j], dist_cap)
        total = sum(
            cost[i][j] * flow[i][j] for i in range(k) for j in range(l)
        )
    return total


def enumerate_box_simplex_vertices(lower, upper, tol=1e-11):
    """All vertices of {v : sum v = 1, lower <= v <= upper}.

    Vertices have at most one coordinate strictly between its bounds.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    m = lower.shape[0]
    verts = []
    for pattern in product((0, 1), repeat=m):
        v = np.where(pattern, upper, lower)
        if abs(v.sum() - 1.0) <= tol:
            verts.append(v.copy())
    for f in range(m):
        others = [i for i in range(m) if i != f]
        for pattern in product((0, 1), repeat=m - 1):
            v = np.empty(m)
            v[others] = np.where(pattern, upper[others], lower[others])
            v[f] = 1.0 - v[others].sum()
            if lower[f] - tol <= v[f] <= upper[f] + tol:
                verts.append(v)
    uniq = []
    for v in verts:
        if not any(np.abs(v - w).max() <= 1e-9 for w in uniq):
            uniq.append(v)
    return uniq
