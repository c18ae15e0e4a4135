"""Certified Wasserstein bounds for clusterized empirical distributions.

Four routes with different cost/tightness trade-offs:

* `epsilon_theorem1`  -- worst case over all distributions consistent with
  the probability box; exact optimum of a MILP with one indicator per
  region. Solved either through the literal big-M encoding (small M) or
  through an equivalent exporter/importer reformulation whose search tree
  branches only on regions the relaxation uses on both sides.
* `xi_prop2`          -- vertex detour: a transport term between two known
  discrete distributions plus a relaxation with at most one indicator.
* `analytic_bound`    -- closed form from the interval widths.
* `fournier_baseline` -- distribution-agnostic concentration baseline.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .intervals import ProbabilityBox
from .solver import (
    LinearProgram,
    MilpModel,
    NodeLimitExceeded,
    SolveReport,
    SolverError,
    max_gain_flow,
    solve_lp,
    solve_max_milp,
)
from .transport import wasserstein
from .types import Config, DiscreteDistribution, pairwise_distances

FEAS_TOL = 1e-9
GAIN_TOL = 1e-14
SPLIT_PRUNE_EPS = 1e-9


@dataclass(frozen=True)
class BoundProblem:
    """Worst-case transport instance: costs, empirical weights, probability box."""

    cost: np.ndarray
    pi: np.ndarray
    box: ProbabilityBox
    rho: float
    support: np.ndarray | None = None

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=float)
        pi = np.asarray(self.pi, dtype=float).ravel()
        m = pi.shape[0]
        if cost.shape != (m, m):
            raise ValueError(f"cost must be {m} x {m}, got {cost.shape}")
        if np.any(cost < 0):
            raise ValueError("cost entries must be nonnegative")
        if self.box.size != m:
            raise ValueError("probability box size does not match pi")
        if not self.box.contains(pi, atol=1e-9):
            raise ValueError("pi must lie inside the probability box")
        if self.rho < 1:
            raise ValueError("rho must be >= 1")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "pi", pi)
        if self.support is not None:
            sup = np.atleast_2d(np.asarray(self.support, dtype=float))
            if sup.shape[0] != m:
                raise ValueError("support must provide one point per region")
            object.__setattr__(self, "support", sup)

    @property
    def size(self) -> int:
        return self.pi.shape[0]


@dataclass(frozen=True)
class VertexDecomposition:
    """A vertex of the box-constrained simplex split into bound-tight index sets."""

    v: np.ndarray
    lower_set: np.ndarray
    upper_set: np.ndarray
    free_index: int | None


@dataclass
class BoundResult:
    method: str
    value: float
    components: dict = field(default_factory=dict)
    report: SolveReport | None = None
    rho: float | None = None
    beta: float | None = None
    M: int | None = None
    N: int | None = None
    runtime_ms: float | None = None

    def to_json_record(self) -> dict:
        return {
            "method": self.method,
            "value": self.value,
            "rho": self.rho,
            "beta": self.beta,
            "M": self.M,
            "N": self.N,
            "components": {k: float(v) for k, v in self.components.items()},
            "nodes": self.report.nodes if self.report is not None else 0,
            "runtime_ms": self.runtime_ms,
        }


def check_box_feasible(box: ProbabilityBox) -> None:
    if box.lower.sum() > 1.0 + FEAS_TOL or box.upper.sum() < 1.0 - FEAS_TOL:
        raise ValueError(
            "infeasible probability box: need sum(lower) <= 1 <= sum(upper)"
        )


def closest_vertex(pi, box: ProbabilityBox, norm_order=2) -> VertexDecomposition:
    """Vertex of the box-simplex nearest to pi, by the ascending-gap sweep.

    Start at the lower bounds, sort coordinates by
    |pi - upper|^m - |pi - lower|^m ascending, and raise them to their
    upper bounds until the total reaches one; at most one coordinate ends
    strictly between its bounds. For m = inf the m = 1 key is used (any
    vertex is admissible; the key only steers tightness).
    """
    pi = np.asarray(pi, dtype=float).ravel()
    check_box_feasible(box)
    lo, up = box.lower, box.upper
    m = 1.0 if math.isinf(float(norm_order)) else float(norm_order)
    key = np.abs(pi - up) ** m - np.abs(pi - lo) ** m
    order = np.argsort(key, kind="stable")
    v = lo.copy()
    slack = 1.0 - float(lo.sum())
    upper_set = []
    free_index = None
    raised = np.zeros(pi.shape[0], dtype=bool)
    for idx in order:
        if slack <= 1e-15:
            break
        width = up[idx] - lo[idx]
        if width <= slack + 1e-15:
            v[idx] = up[idx]
            slack -= width
            raised[idx] = True
            upper_set.append(int(idx))
        else:
            v[idx] = lo[idx] + slack
            slack = 0.0
            free_index = int(idx)
            raised[idx] = True
            break
    if free_index is not None:
        v[free_index] = 1.0 - (v.sum() - v[free_index])
    lower_set = np.where(~raised)[0]
    return VertexDecomposition(
        v=v,
        lower_set=lower_set,
        upper_set=np.array(sorted(upper_set), dtype=int),
        free_index=free_index,
    )


def build_theorem1_milp(prob: BoundProblem) -> MilpModel:
    """Literal big-M encoding of the worst-case MILP.

    Variables: plan gamma (M*M), marginal omega (M), indicators z (M), and
    surpluses for the two diagonal inequalities per region. Big-M = 1 is
    valid because every mass lies in [0, 1].
    """
    m = prob.size
    n_gamma = m * m
    n = n_gamma + 4 * m
    iw = lambda i: n_gamma + i
    iz = lambda i: n_gamma + m + i
    is1 = lambda i: n_gamma + 2 * m + i
    is2 = lambda i: n_gamma + 3 * m + i

    rows = []
    rhs = []
    for i in range(m):  # row sums equal omega_i
        r = np.zeros(n)
        r[i * m : (i + 1) * m] = 1.0
        r[iw(i)] = -1.0
        rows.append(r)
        rhs.append(0.0)
    for j in range(m):  # column sums equal pi_j
        r = np.zeros(n)
        r[np.arange(m) * m + j] = 1.0
        rows.append(r)
        rhs.append(prob.pi[j])
    for i in range(m):  # gamma_ii >= pi_i - z_i
        r = np.zeros(n)
        r[i * m + i] = 1.0
        r[iz(i)] = 1.0
        r[is1(i)] = -1.0
        rows.append(r)
        rhs.append(prob.pi[i])
    for i in range(m):  # gamma_ii >= omega_i - (1 - z_i)
        r = np.zeros(n)
        r[i * m + i] = 1.0
        r[iw(i)] = -1.0
        r[iz(i)] = -1.0
        r[is2(i)] = 1.0
        rows.append(r)
        rhs.append(-1.0)

    c = np.zeros(n)
    c[:n_gamma] = prob.cost.ravel()
    lower = np.zeros(n)
    upper = np.ones(n)
    lower[iw(0) : iw(0) + m] = prob.box.lower
    upper[iw(0) : iw(0) + m] = prob.box.upper
    upper[is1(0) : is1(0) + m] = np.inf
    upper[is2(0) : is2(0) + m] = np.inf
    lp = LinearProgram(
        objective=c, sense="max",
        a_eq=np.array(rows), b_eq=np.array(rhs), lower=lower, upper=upper,
    )
    return MilpModel(base=lp, binary_indices=[iz(i) for i in range(m)])


def _role_relaxation(gain, u_caps, v_caps, free_mask):
    """Bound LP: nonnegative flows with row/column caps and, for undecided
    regions, the budget row v_i * out_i + u_i * in_i <= u_i * v_i."""
    m = gain.shape[0]
    active = (
        (u_caps[:, None] > 0)
        & (v_caps[None, :] > 0)
        & (gain > GAIN_TOL)
        & ~np.eye(m, dtype=bool)
    )
    pairs = np.argwhere(active)
    nf = pairs.shape[0]
    if nf == 0:
        return 0.0, np.zeros(m), np.zeros(m)
    pi_, pj_ = pairs[:, 0], pairs[:, 1]
    urows = np.unique(pi_)
    vcols = np.unique(pj_)
    brows = [
        i for i in np.where(free_mask)[0]
        if u_caps[i] > 0 and v_caps[i] > 0 and np.any(pi_ == i) and np.any(pj_ == i)
    ]
    n_rows = urows.size + vcols.size + len(brows)
    n = nf + n_rows
    a = np.zeros((n_rows, n))
    rhs = np.zeros(n_rows)
    r = 0
    for i in urows:
        a[r, :nf][pi_ == i] = 1.0
        a[r, nf + r] = 1.0
        rhs[r] = u_caps[i]
        r += 1
    for j in vcols:
        a[r, :nf][pj_ == j] = 1.0
        a[r, nf + r] = 1.0
        rhs[r] = v_caps[j]
        r += 1
    for i in brows:
        a[r, :nf][pi_ == i] = v_caps[i]
        a[r, :nf][pj_ == i] = u_caps[i]
        a[r, nf + r] = 1.0
        rhs[r] = u_caps[i] * v_caps[i]
        r += 1
    c = np.zeros(n)
    c[:nf] = gain[pi_, pj_]
    lp = LinearProgram(objective=c, sense="max", a_eq=a, b_eq=rhs)
    rep = solve_lp(lp, presolve=False)
    if rep.status != "optimal":
        raise SolverError(f"role relaxation LP returned {rep.status}")
    f = rep.x[:nf]
    out_flow = np.zeros(m)
    in_flow = np.zeros(m)
    np.add.at(out_flow, pi_, f)
    np.add.at(in_flow, pj_, f)
    return float(rep.objective), out_flow, in_flow


def _epsilon_split(prob: BoundProblem, node_limit: int, timeout_s):
    """Exact worst-case optimum via the exporter/importer reformulation.

    Any feasible plan makes each region either an exporter (true mass above
    the empirical weight; its column is pure diagonal) or an importer (the
    reverse), so the MILP equals a base diagonal term plus a max-gain flow
    from exporters to importers. Branching is only needed where the budget
    relaxation uses a region on both sides.
    """
    t0 = time.perf_counter()
    cost = prob.cost
    diag = np.diag(cost)
    base = float(diag @ prob.pi)
    gain = cost - diag[None, :]
    u_full = np.maximum(prob.box.upper - prob.pi, 0.0)
    v_full = np.maximum(prob.pi - prob.box.lower, 0.0)
    m = prob.size

    def caps(roles):
        u = np.where(roles == 2, 0.0, u_full)
        v = np.where(roles == 1, 0.0, v_full)
        return u, v

    def incumbent_for(roles, out_flow, in_flow):
        rounded = roles.copy()
        free = rounded == 0
        rounded[free & (out_flow >= in_flow)] = 1
        rounded[free & (out_flow < in_flow)] = 2
        u, v = caps(rounded)
        val, _ = max_gain_flow(gain, u, v)
        return val

    nodes = 0
    best = -np.inf

    def make_node(roles):
        nonlocal nodes, best
        nodes += 1
        u, v = caps(roles)
        bound, out_flow, in_flow = _role_relaxation(gain, u, v, roles == 0)
        feas = incumbent_for(roles, out_flow, in_flow)
        best = max(best, feas)
        conflict = np.minimum(out_flow, in_flow)
        conflict[roles != 0] = 0.0
        j = int(np.argmax(conflict))
        return bound, (j if conflict[j] > 1e-12 else -1)

    roles0 = np.zeros(m, dtype=np.int8)
    bound0, branch0 = make_node(roles0)
    heap = []
    tie = 0
    if branch0 >= 0 and bound0 > best + SPLIT_PRUNE_EPS:
        heapq.heappush(heap, (-bound0, tie, roles0, branch0))
    else:
        best = max(best, bound0) if branch0 < 0 else best

    while heap:
        neg_bound, _, roles, j = heapq.heappop(heap)
        if -neg_bound <= best + SPLIT_PRUNE_EPS:
            continue
        for role in (1, 2):
            if nodes >= node_limit:
                raise NodeLimitExceeded(
                    SolveReport(status="node_limit", objective=base + best,
                                nodes=nodes, wall_time=time.perf_counter() - t0)
                )
            if timeout_s is not None and time.perf_counter() - t0 > timeout_s:
                raise NodeLimitExceeded(
                    SolveReport(status="node_limit", objective=base + best,
                                nodes=nodes, wall_time=time.perf_counter() - t0)
                )
            child = roles.copy()
            child[j] = role
            bound, branch = make_node(child)
            if branch < 0:
                best = max(best, bound)
            elif bound > best + SPLIT_PRUNE_EPS:
                tie += 1
                heapq.heappush(heap, (-bound, tie, child, branch))

    value = base + max(best, 0.0)
    rep = SolveReport(
        status="optimal", objective=value, nodes=nodes,
        wall_time=time.perf_counter() - t0,
    )
    return value, rep


def epsilon_theorem1(
    prob: BoundProblem,
    engine: str = "auto",
    node_limit: int = 10**6,
    timeout_s: float | None = None,
) -> BoundResult:
    """Certified epsilon: rho-th root of the worst-case MILP optimum.

    engine="bigm" uses the literal one-indicator-per-region encoding (only
    for M <= 64); "split"/"auto" uses the equivalent exporter/importer
    reformulation, which scales past that guard. Node-limit and timeout
    failures raise NodeLimitExceeded; there is no silent fallback.
    """
    t0 = time.perf_counter()
    check_box_feasible(prob.box)
    if engine == "auto":
        engine = "split"
    if engine == "bigm":
        model = build_theorem1_milp(prob)
        rep = solve_max_milp(model, node_limit=node_limit, timeout_s=timeout_s)
        if rep.status != "optimal":
            raise SolverError(f"theorem-1 MILP returned {rep.status}")
        opt = float(rep.objective)
    elif engine == "split":
        opt, rep = _epsilon_split(prob, node_limit, timeout_s)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    value = max(opt, 0.0) ** (1.0 / prob.rho)
    return BoundResult(
        method="theorem1",
        value=value,
        components={"epsilon_pow": opt},
        report=rep,
        rho=prob.rho,
        M=prob.size,
        runtime_ms=1e3 * (time.perf_counter() - t0),
    )


def _xi_direct_lp(prob: BoundProblem, vd: VertexDecomposition, free_as_lower: bool):
    """One fixed-assignment LP of the single-indicator problem, literally."""
    m = prob.size
    n_gamma = m * m
    n = n_gamma + m
    iw = lambda i: n_gamma + i
    rows, rhs, slacks = [], [], []

    def add_row(r, b, slack=False):
        rows.append(r)
        rhs.append(b)
        slacks.append(slack)

    for i in range(m):
        r = np.zeros(n)
        r[i * m : (i + 1) * m] = 1.0
        r[iw(i)] = -1.0
        add_row(r, 0.0)
    for j in range(m):
        r = np.zeros(n)
        r[np.arange(m) * m + j] = 1.0
        add_row(r, vd.v[j])
    lower_like = list(vd.lower_set) + ([vd.free_index] if free_as_lower and vd.free_index is not None else [])
    upper_like = list(vd.upper_set) + ([vd.free_index] if not free_as_lower and vd.free_index is not None else [])
    for i in lower_like:  # gamma_ii >= v_i
        r = np.zeros(n)
        r[i * m + i] = 1.0
        add_row(r, vd.v[i], slack=True)
    for j in upper_like:  # gamma_jj >= omega_j
        r = np.zeros(n)
        r[j * m + j] = 1.0
        r[iw(j)] = -1.0
        add_row(r, 0.0, slack=True)

    n_slack = sum(slacks)
    a = np.zeros((len(rows), n + n_slack))
    s = 0
    for r_i, (row, is_slack) in enumerate(zip(rows, slacks)):
        a[r_i, :n] = row
        if is_slack:
            a[r_i, n + s] = -1.0
            s += 1
    c = np.zeros(n + n_slack)
    c[:n_gamma] = prob.cost.ravel()
    lower = np.zeros(n + n_slack)
    upper = np.concatenate([np.ones(n_gamma), prob.box.upper, np.full(n_slack, np.inf)])
    lower[n_gamma : n_gamma + m] = prob.box.lower
    lp = LinearProgram(objective=c, sense="max", a_eq=a, b_eq=np.array(rhs),
                       lower=lower, upper=upper)
    rep = solve_lp(lp)
    return rep


def _xi_reduced(prob: BoundProblem, vd: VertexDecomposition):
    """Same optimum as the direct LPs via capped exporter-to-importer flows."""
    cost = prob.cost
    diag = np.diag(cost)
    base = float(diag @ vd.v)
    gain = cost - diag[None, :]
    width = prob.box.upper - prob.box.lower
    m = prob.size

    def branch_value(f_role):
        # lower-set regions export, upper-set regions import.
        u = np.zeros(m)
        v = np.zeros(m)
        u[vd.lower_set] = width[vd.lower_set]
        v[vd.upper_set] = width[vd.upper_set]
        if vd.free_index is not None:
            fi = vd.free_index
            if f_role == "export":
                u[fi] = prob.box.upper[fi] - vd.v[fi]
            else:
                v[fi] = vd.v[fi] - prob.box.lower[fi]
        val, _ = max_gain_flow(gain, u, v)
        return val

    if vd.free_index is None:
        flow = branch_value("none")
        branches = 1
    else:
        flow = max(branch_value("export"), branch_value("import"))
        branches = 2
    return base + flow, branches


def xi_prop2(prob: BoundProblem, cfg: Config, engine: str = "reduced") -> BoundResult:
    """Vertex-detour bound: transport term to the nearest vertex plus xi.

    The transport term is a true Wasserstein distance between two known
    discrete distributions on the region representatives, so it uses the
    exact point-to-point costs (the problem must carry `support`). The xi
    problem has a single undetermined indicator and is solved as the max
    of two fixed-assignment LPs.
    """
    t0 = time.perf_counter()
    check_box_feasible(prob.box)
    vd = closest_vertex(prob.pi, prob.box, cfg.norm_order)
    if np.allclose(vd.v, prob.pi, atol=1e-15):
        transport = 0.0
    else:
        if prob.support is None:
            raise ValueError(
                "the prop2 transport term needs the region representatives; "
                "construct BoundProblem with support="
            )
        p_v = DiscreteDistribution(prob.support, vd.v)
        p_hat = DiscreteDistribution(prob.support, prob.pi)
        transport = wasserstein(p_v, p_hat, cfg)

    if engine == "reduced":
        xi_pow, branches = _xi_reduced(prob, vd)
    elif engine == "direct":
        reps = [_xi_direct_lp(prob, vd, True)]
        if vd.free_index is not None:
            reps.append(_xi_direct_lp(prob, vd, False))
        for rep in reps:
            if rep.status != "optimal":
                raise SolverError(f"prop2 LP returned {rep.status}")
        xi_pow = max(rep.objective for rep in reps)
        branches = len(reps)
    else:
        raise ValueError(f"unknown engine {engine!r}")

    xi = max(xi_pow, 0.0) ** (1.0 / prob.rho)
    return BoundResult(
        method="prop2",
        value=transport + xi,
        components={"transport": transport, "xi": xi, "xi_pow": xi_pow,
                    "branches": branches},
        rho=prob.rho,
        M=prob.size,
        runtime_ms=1e3 * (time.perf_counter() - t0),
    )


def analytic_bound(prob: BoundProblem, diameter: float) -> BoundResult:
    """Closed-form certificate from interval widths and the support diameter."""
    eps1 = float(np.diag(prob.cost) @ prob.box.upper)
    eps2 = float(diameter**prob.rho * np.sum(prob.box.widths()))
    return BoundResult(
        method="analytic",
        value=(eps1 + eps2) ** (1.0 / prob.rho),
        components={"eps1": eps1, "eps2": eps2},
        rho=prob.rho,
        M=prob.size,
    )


def fournier_baseline(
    n: int, beta: float, cfg: Config, diameter: float, moment_constant: float
) -> BoundResult:
    """Concentration baseline: moment constant plus the deviation radius."""
    if n <= 0:
        raise ValueError(f"sample size must be positive, got {n}")
    if moment_constant < 0:
        raise ValueError("the moment constant must be nonnegative")
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    tau = diameter * (2.0 * math.log(1.0 / beta) / n) ** (1.0 / (2.0 * cfg.rho))
    return BoundResult(
        method="fournier",
        value=moment_constant + tau,
        components={"tau": tau, "moment_constant": moment_constant},
        rho=cfg.rho,
        beta=beta,
        N=n,
    )
