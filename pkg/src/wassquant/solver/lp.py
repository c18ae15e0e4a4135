"""Dense primal simplex for equality-constrained LPs with variable bounds.

Variables live in boxes [lo, hi] with lo >= 0 (hi may be infinite);
nonbasic variables sit at either bound. Two phases with artificial
variables; Dantzig pricing with a sticky switch to Bland's rule after a
run of degenerate pivots. Redundant equality rows are removed by
rank-revealing elimination before the simplex starts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

RC_TOL = 1e-9
PIVOT_TOL = 1e-10
FEAS_TOL = 1e-8
DEGENERATE_STREAK = 40
REFRESH_EVERY = 200


class SolverError(RuntimeError):
    """Raised for malformed models or solver breakdowns."""


@dataclass
class LinearProgram:
    """max/min c.x  s.t.  A x = b,  lo <= x <= hi  (lo >= 0)."""

    objective: np.ndarray
    sense: str = "max"
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        n = c.shape[0]
        if self.sense not in ("max", "min"):
            raise SolverError(f"sense must be 'max' or 'min', got {self.sense!r}")
        if self.a_eq is None:
            a = np.zeros((0, n))
            b = np.zeros(0)
        else:
            a = np.atleast_2d(np.asarray(self.a_eq, dtype=float))
            b = np.asarray(self.b_eq, dtype=float).ravel()
        if a.shape != (b.shape[0], n):
            raise SolverError(
                f"constraint shapes inconsistent: A {a.shape}, b {b.shape}, n={n}"
            )
        lo = np.zeros(n) if self.lower is None else np.asarray(self.lower, float).ravel()
        hi = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, float).ravel()
        if lo.shape != (n,) or hi.shape != (n,):
            raise SolverError("bounds must match the number of variables")
        if np.any(lo < 0):
            raise SolverError("lower bounds must be >= 0")
        if np.any(lo > hi + 1e-15):
            raise SolverError("need lo <= hi for every variable")
        self.objective, self.a_eq, self.b_eq = c, a, b
        self.lower, self.upper = lo, np.maximum(hi, lo)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]


@dataclass
class SolveReport:
    status: str  # optimal | infeasible | unbounded | node_limit
    objective: float | None = None
    x: np.ndarray | None = None
    nodes: int = 0
    wall_time: float = 0.0
    iterations: int = 0
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    kept_rows: np.ndarray | None = None
    plan: np.ndarray | None = None


def _independent_rows(a: np.ndarray, b: np.ndarray):
    """Indices of a maximal independent row subset; None if inconsistent."""
    m, n = a.shape
    if m == 0:
        return np.zeros(0, dtype=int)
    work = np.hstack([a, b[:, None]]).astype(float)
    used = np.zeros(m, dtype=bool)
    pivots = []
    for col in range(n):
        cand = np.where(~used)[0]
        if cand.size == 0:
            break
        r = cand[np.argmax(np.abs(work[cand, col]))]
        piv = work[r, col]
        if abs(piv) < PIVOT_TOL:
            continue
        used[r] = True
        pivots.append(r)
        rest = np.where(~used)[0]
        if rest.size:
            work[rest] -= np.outer(work[rest, col] / piv, work[r])
    scale = 1.0 + np.abs(b).max(initial=0.0)
    for r in np.where(~used)[0]:
        if abs(work[r, -1]) > FEAS_TOL * scale:
            return None
    return np.array(sorted(pivots), dtype=int)


class _Simplex:
    """Revised simplex state over columns of `a` with bounds [lo, hi]."""

    def __init__(self, a, b, lo, hi):
        self.a = a
        self.b = b
        self.lo = lo
        self.hi = hi
        self.m = a.shape[0]
        self.n = a.shape[1]
        self.at_upper = np.zeros(self.n, dtype=bool)
        self.basis = None
        self.binv = None
        self.xb = None
        self.iterations = 0

    def nonbasic_values(self) -> np.ndarray:
        x = np.where(self.at_upper, self.hi, self.lo)
        return x

    def refresh(self):
        bmat = self.a[:, self.basis]
        try:
            self.binv = np.linalg.inv(bmat)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular basis encountered") from exc
        x = self.nonbasic_values()
        x[self.basis] = 0.0
        self.xb = self.binv @ (self.b - self.a @ x)

    def solution(self) -> np.ndarray:
        x = self.nonbasic_values()
        x[self.basis] = self.xb
        return x

    def run(self, c: np.ndarray, max_iter: int) -> str:
        """Maximize c.x from the current basis. Returns 'optimal'/'unbounded'."""
        m, n = self.m, self.n
        basic_mask = np.zeros(n, dtype=bool)
        basic_mask[self.basis] = True
        fixed = self.hi - self.lo <= 1e-15
        degen_streak = 0
        bland = False
        for _ in range(max_iter):
            self.iterations += 1
            if self.iterations % REFRESH_EVERY == 0:
                self.refresh()
            y = c[self.basis] @ self.binv
            rc = c - y @ self.a
            viol = np.where(self.at_upper, -rc, rc)
            viol[basic_mask] = -np.inf
            viol[fixed & ~basic_mask] = -np.inf
            if bland:
                cand = np.where(viol > RC_TOL)[0]
                if cand.size == 0:
                    return "optimal"
                j = int(cand[0])
            else:
                j = int(np.argmax(viol))
                if viol[j] <= RC_TOL:
                    return "optimal"
            s = -1.0 if self.at_upper[j] else 1.0
            d = self.binv @ self.a[:, j]
            diz = s * d
            ratios = np.full(m, np.inf)
            dec = diz > PIVOT_TOL
            inc = diz < -PIVOT_TOL
            if np.any(dec):
                ratios[dec] = (self.xb[dec] - self.lo[self.basis[dec]]) / diz[dec]
            if np.any(inc):
                ratios[inc] = (self.xb[inc] - self.hi[self.basis[inc]]) / diz[inc]
            np.maximum(ratios, 0.0, out=ratios)
            t_flip = self.hi[j] - self.lo[j]
            t_row = ratios.min() if m else np.inf
            if not np.isfinite(t_row) and not np.isfinite(t_flip):
                return "unbounded"
            if t_flip <= t_row:
                # Bound-to-bound flip, basis unchanged.
                self.xb -= diz * t_flip
                self.at_upper[j] = ~self.at_upper[j]
                degen_streak = 0
                bland = False
                continue
            near = np.where(ratios <= t_row + 1e-12)[0]
            if bland:
                r = int(near[np.argmin(self.basis[near])])
            else:
                r = int(near[np.argmax(np.abs(d[near]))])
            t = max(ratios[r], 0.0)
            leaving = self.basis[r]
            self.xb -= diz * t
            self.xb[r] = (self.lo[j] + t) if s > 0 else (self.hi[j] - t)
            self.at_upper[leaving] = diz[r] < 0
            basic_mask[leaving] = False
            basic_mask[j] = True
            self.basis[r] = j
            # Product-form update of the basis inverse.
            piv = d[r]
            if abs(piv) < PIVOT_TOL:
                raise SolverError("numerically singular pivot")
            row = self.binv[r] / piv
            self.binv -= np.outer(d, row)
            self.binv[r] = row
            if t <= 1e-11:
                degen_streak += 1
                if degen_streak >= DEGENERATE_STREAK:
                    bland = True
            else:
                degen_streak = 0
                bland = False
        raise SolverError("simplex iteration limit exceeded")


def solve_lp(lp: LinearProgram, presolve: bool = True) -> SolveReport:
    """Solve an LP exactly (to tolerance); detects infeasible/unbounded.

    `presolve=False` skips the redundant-row elimination; only use it when
    the rows are independent by construction (e.g. each has its own slack).
    """
    t0 = time.perf_counter()
    sign = 1.0 if lp.sense == "max" else -1.0
    c = sign * lp.objective
    if presolve:
        keep = _independent_rows(lp.a_eq, lp.b_eq)
        if keep is None:
            return SolveReport(status="infeasible", wall_time=time.perf_counter() - t0)
    else:
        keep = np.arange(lp.a_eq.shape[0])
    a = lp.a_eq[keep]
    b = lp.b_eq[keep]
    lo, hi = lp.lower.copy(), lp.upper.copy()
    m, n = a.shape

    if m == 0:
        x = np.where(c > 0, hi, lo)
        if np.any((c > RC_TOL) & ~np.isfinite(hi)):
            return SolveReport(status="unbounded", wall_time=time.perf_counter() - t0)
        obj = float(c @ x)
        return SolveReport(
            status="optimal",
            objective=sign * obj,
            x=x,
            wall_time=time.perf_counter() - t0,
            duals=np.zeros(0),
            reduced_costs=sign * c,
            kept_rows=keep,
        )

    # Phase 1: artificial columns with unit coefficients matching the residual sign.
    x0 = lo.copy()
    resid = b - a @ x0
    sgn = np.where(resid >= 0, 1.0, -1.0)
    a1 = np.hstack([a, np.diag(sgn)])
    lo1 = np.concatenate([lo, np.zeros(m)])
    hi1 = np.concatenate([hi, np.full(m, np.inf)])
    sx = _Simplex(a1, b, lo1, hi1)
    sx.basis = np.arange(n, n + m)
    sx.binv = np.diag(sgn)
    sx.xb = np.abs(resid)
    c1 = np.concatenate([np.zeros(n), -np.ones(m)])
    max_iter = 200 * (m + n) + 20_000
    status = sx.run(c1, max_iter)
    if status != "optimal":
        raise SolverError("phase-1 simplex reported unbounded")
    infeas = float(-(c1[sx.basis] @ sx.xb))
    if infeas > FEAS_TOL:
        return SolveReport(status="infeasible", wall_time=time.perf_counter() - t0)

    # Drive leftover artificials (basic at zero) out of the basis.
    for r in range(m):
        if sx.basis[r] >= n:
            row = sx.binv[r] @ a
            js = np.where(np.abs(row) > 1e-9)[0]
            js = js[~np.isin(js, sx.basis)]
            if js.size == 0:
                raise SolverError("could not remove artificial from basis")
            j = int(js[0])
            d = sx.binv @ a1[:, j]
            piv = d[r]
            leaving = sx.basis[r]
            sx.basis[r] = j
            # Degenerate swap: x does not move, so the new basic value is
            # the entering variable's current bound value.
            sx.xb[r] = sx.hi[j] if sx.at_upper[j] else sx.lo[j]
            rowv = sx.binv[r] / piv
            sx.binv -= np.outer(d, rowv)
            sx.binv[r] = rowv
            sx.at_upper[leaving] = False
    # Freeze artificial columns at zero so they can never re-enter.
    sx.hi[n:] = 0.0
    sx.lo[n:] = 0.0

    c2 = np.concatenate([c, np.zeros(m)])
    status = sx.run(c2, max_iter)
    wall = time.perf_counter() - t0
    if status == "unbounded":
        return SolveReport(status="unbounded", wall_time=wall, iterations=sx.iterations)

    sx.refresh()
    x = sx.solution()[:n]
    np.clip(x, lo, hi, out=x)
    resid = np.abs(a @ x - b).max(initial=0.0)
    if resid > FEAS_TOL * (1.0 + np.abs(b).max(initial=0.0)):
        raise SolverError(f"optimal basis violates feasibility: residual {resid:.2e}")
    y = c2[sx.basis] @ sx.binv
    rc = c - y @ a
    return SolveReport(
        status="optimal",
        objective=float(sign * (c @ x)),
        x=x,
        wall_time=wall,
        iterations=sx.iterations,
        duals=sign * y,
        reduced_costs=sign * rc,
        kept_rows=keep,
    )
