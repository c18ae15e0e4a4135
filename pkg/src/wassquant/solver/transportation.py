"""Balanced transportation problems on dense cost matrices.

The pivoting kernel exists twice: a Cython extension built at install
time and a pure NumPy/Python fallback. The import below picks the
compiled one when present; set WASSQUANT_PURE_PYTHON=1 to force the
fallback (used by the benchmark and for debugging).
"""

from __future__ import annotations

import os
import time

import numpy as np

from ._transport_py import TransportError, transportation_kernel as _kernel_py
from .lp import SolveReport, SolverError

if os.environ.get("WASSQUANT_PURE_PYTHON") == "1":
    _kernel = _kernel_py
    KERNEL = "python"
else:
    try:
        from ._transport_cy import transportation_kernel as _kernel_cy

        _kernel = _kernel_cy
        KERNEL = "compiled"
    except ImportError:
        _kernel = _kernel_py
        KERNEL = "python"

BALANCE_TOL = 1e-9


def solve_transportation(supply, demand, cost) -> SolveReport:
    """Minimum-cost plan between nonnegative marginals with equal mass.

    Returns a report whose `plan` has row sums `supply` and column sums
    `demand` (residual <= 1e-9) and minimal total cost.
    """
    t0 = time.perf_counter()
    supply = np.asarray(supply, dtype=float).ravel()
    demand = np.asarray(demand, dtype=float).ravel()
    cost = np.asarray(cost, dtype=float)
    if cost.shape != (supply.shape[0], demand.shape[0]):
        raise SolverError(
            f"cost shape {cost.shape} does not match marginals "
            f"({supply.shape[0]}, {demand.shape[0]})"
        )
    if np.any(supply < 0) or np.any(demand < 0):
        raise SolverError("marginals must be nonnegative")
    if abs(supply.sum() - demand.sum()) > BALANCE_TOL:
        raise SolverError(
            f"unbalanced marginals: {supply.sum()} vs {demand.sum()}"
        )
    if supply.sum() <= 0:
        plan = np.zeros_like(cost)
        return SolveReport(
            status="optimal", objective=0.0, x=plan.ravel(), plan=plan,
            wall_time=time.perf_counter() - t0,
        )
    try:
        plan, objective, iterations = _kernel(supply, demand, cost)
    except TransportError as exc:
        raise SolverError(str(exc)) from exc
    return SolveReport(
        status="optimal",
        objective=float(objective),
        x=plan.ravel(),
        plan=plan,
        iterations=int(iterations),
        wall_time=time.perf_counter() - t0,
    )


def max_gain_flow(gains, row_caps, col_caps) -> tuple[float, np.ndarray]:
    """Maximize sum(gains * f) with f >= 0, row sums <= row_caps, col sums <= col_caps.

    Solved as a balanced transportation problem with slack row/column.
    Entries with nonpositive gain are never shipped.
    """
    gains = np.asarray(gains, dtype=float)
    u = np.asarray(row_caps, dtype=float).ravel()
    v = np.asarray(col_caps, dtype=float).ravel()
    k, l = gains.shape
    if u.shape[0] != k or v.shape[0] != l:
        raise SolverError("cap shapes do not match the gain matrix")
    total_u = u.sum()
    total_v = v.sum()
    if total_u <= 0 or total_v <= 0:
        return 0.0, np.zeros_like(gains)
    # Slack column absorbs unused supply, slack row unused demand.
    supply = np.concatenate([u, [total_v]])
    demand = np.concatenate([v, [total_u]])
    cost = np.zeros((k + 1, l + 1))
    cost[:k, :l] = -np.maximum(gains, 0.0)
    rep = solve_transportation(supply, demand, cost)
    flow = rep.plan[:k, :l].copy()
    flow[gains <= 0] = 0.0
    return float(np.sum(gains * flow)), flow
