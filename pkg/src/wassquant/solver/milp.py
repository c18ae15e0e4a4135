"""Best-first branch and bound over LPs with binary variables."""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import LinearProgram, SolveReport, SolverError, _independent_rows, solve_lp

PRUNE_EPS = 1e-9
INT_TOL = 1e-7
MAX_BINARIES = 64
DEFAULT_NODE_LIMIT = 10**6


class NodeLimitExceeded(SolverError):
    """Branch-and-bound hit its node limit before proving optimality."""

    def __init__(self, report: SolveReport):
        super().__init__("node limit exceeded")
        self.report = report


@dataclass
class MilpModel:
    """An LP plus a set of variable indices restricted to {0, 1}."""

    base: LinearProgram
    binary_indices: list[int] = field(default_factory=list)

    def __post_init__(self):
        n = self.base.n_vars
        idx = list(dict.fromkeys(int(i) for i in self.binary_indices))
        for i in idx:
            if not 0 <= i < n:
                raise SolverError(f"binary index {i} out of range")
            if self.base.lower[i] < -1e-12 or self.base.upper[i] > 1 + 1e-12:
                raise SolverError("binary variables need bounds within [0, 1]")
        self.binary_indices = idx


def _most_fractional(x, binaries):
    vals = x[binaries]
    frac = np.abs(vals - np.round(vals))
    j = int(np.argmax(frac))
    return binaries[j], float(frac[j])


def solve_max_milp(
    model: MilpModel,
    node_limit: int = DEFAULT_NODE_LIMIT,
    timeout_s: float | None = None,
) -> SolveReport:
    """Exact maximum over binary assignments of the LP optimum.

    Best-bound node selection with most-fractional branching; a node is
    pruned when its relaxation bound is at least PRUNE_EPS below the
    incumbent. Raises NodeLimitExceeded (carrying the best incumbent)
    when the node budget or timeout runs out.
    """
    t0 = time.perf_counter()
    if model.base.sense != "max":
        raise SolverError("solve_max_milp expects a maximization model")
    if len(model.binary_indices) > MAX_BINARIES:
        raise SolverError(
            f"{len(model.binary_indices)} binaries exceed the {MAX_BINARIES} guard"
        )
    keep = _independent_rows(model.base.a_eq, model.base.b_eq)
    if keep is None:
        return SolveReport(status="infeasible", wall_time=time.perf_counter() - t0)
    base = LinearProgram(
        objective=model.base.objective,
        sense="max",
        a_eq=model.base.a_eq[keep],
        b_eq=model.base.b_eq[keep],
        lower=model.base.lower,
        upper=model.base.upper,
    )
    binaries = model.binary_indices

    def relax(lo, hi):
        lp = LinearProgram(
            objective=base.objective, sense="max",
            a_eq=base.a_eq, b_eq=base.b_eq, lower=lo, upper=hi,
        )
        return solve_lp(lp, presolve=False)

    root = relax(base.lower, base.upper)
    if root.status in ("infeasible", "unbounded"):
        root.wall_time = time.perf_counter() - t0
        return root

    nodes = 1
    best_x = None
    best_val = -np.inf
    counter = 0
    heap = []

    def consider(rep):
        nonlocal best_x, best_val
        if rep.status != "optimal":
            return False
        vals = rep.x[binaries] if binaries else np.zeros(0)
        if np.all(np.abs(vals - np.round(vals)) <= INT_TOL):
            if rep.objective > best_val:
                best_val = rep.objective
                best_x = rep.x.copy()
            return True
        return False

    if not consider(root):
        heapq.heappush(heap, (-root.objective, counter, base.lower, base.upper, root))

    while heap:
        neg_bound, _, lo, hi, rep = heapq.heappop(heap)
        if -neg_bound <= best_val - PRUNE_EPS:
            continue
        j, _ = _most_fractional(rep.x, binaries)
        for fixed in (0.0, 1.0):
            if timeout_s is not None and time.perf_counter() - t0 > timeout_s:
                raise NodeLimitExceeded(
                    SolveReport(
                        status="node_limit", objective=best_val if best_x is not None else None,
                        x=best_x, nodes=nodes, wall_time=time.perf_counter() - t0,
                    )
                )
            if nodes >= node_limit:
                raise NodeLimitExceeded(
                    SolveReport(
                        status="node_limit", objective=best_val if best_x is not None else None,
                        x=best_x, nodes=nodes, wall_time=time.perf_counter() - t0,
                    )
                )
            lo2 = lo.copy()
            hi2 = hi.copy()
            lo2[j] = hi2[j] = fixed
            child = relax(lo2, hi2)
            nodes += 1
            if child.status != "optimal":
                continue
            if child.objective <= best_val - PRUNE_EPS:
                continue
            if not consider(child):
                counter += 1
                heapq.heappush(
                    heap, (-child.objective, counter, lo2, hi2, child)
                )

    if best_x is None:
        return SolveReport(status="infeasible", nodes=nodes, wall_time=time.perf_counter() - t0)
    return SolveReport(
        status="optimal",
        objective=float(best_val),
        x=best_x,
        nodes=nodes,
        wall_time=time.perf_counter() - t0,
    )
