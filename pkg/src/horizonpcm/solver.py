"""LP and MILP solving with deterministic tie-breaking.

Two LP engines sit behind one contract: ``"highs"`` (dual simplex from
scipy's HiGHS bindings) and ``"simplex"`` (the in-package bounded simplex).
MILPs go either to HiGHS branch-and-cut (``mip_engine="highs"``) or to the
in-package best-first branch-and-bound (``mip_engine="bnb"``), which is
transparent but lacks cutting planes and is only practical for small
instances.  Tie-break policies act by presenting the columns and rows to the
engine in a policy-specific order, and by steering branching order in the
in-package search, so two policies can reach different optimal vertices of a
degenerate problem while agreeing on the optimal value.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .formulation import MilpProblem
from .simplex import BLAND, DANTZIG_LEXICO, simplex_solve

log = logging.getLogger(__name__)

LEX_FORWARD = "lex_forward"
LEX_REVERSE = "lex_reverse"
SEEDED_SHUFFLE = "seeded_shuffle"
TIE_BREAKS = (LEX_FORWARD, LEX_REVERSE, SEEDED_SHUFFLE)

OPTIMAL = "optimal_within_gap"
TIME_LIMIT = "time_limit_incumbent"
NO_INCUMBENT = "time_limit_no_incumbent"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

INT_TOL = 1e-6
FEAS_TOL = 1e-6


class OracleGuardError(ValueError):
    """Raised when exhaustive enumeration is asked to cover too many binaries."""


@dataclass(frozen=True)
class SolveSettings:
    rel_gap: float = 1e-4
    time_limit: float = 1000.0
    tie_break: str = LEX_FORWARD
    seed: int = 0
    pivot_rule: str = DANTZIG_LEXICO
    lp_engine: str = "highs"
    mip_engine: str = "highs"
    node_limit: int | None = None
    trace: bool = False

    def __post_init__(self):
        if not self.rel_gap > 0:
            raise ValueError("rel_gap must be positive")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"unknown tie_break {self.tie_break!r}")
        if self.pivot_rule not in (BLAND, DANTZIG_LEXICO):
            raise ValueError(f"unknown pivot_rule {self.pivot_rule!r}")
        if self.lp_engine not in ("highs", "simplex"):
            raise ValueError(f"unknown lp_engine {self.lp_engine!r}")
        if self.mip_engine not in ("highs", "bnb"):
            raise ValueError(f"unknown mip_engine {self.mip_engine!r}")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be at least 1")

    def as_dict(self) -> dict:
        return {"rel_gap": self.rel_gap, "time_limit": self.time_limit,
                "tie_break": self.tie_break, "seed": self.seed,
                "pivot_rule": self.pivot_rule, "lp_engine": self.lp_engine,
                "mip_engine": self.mip_engine, "node_limit": self.node_limit}


@dataclass
class SolveResult:
    status: str
    objective: float
    best_bound: float
    x: np.ndarray
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    gap: float = 0.0
    wall_time: float = field(default=0.0, compare=False)
    node_count: int = 0

    @property
    def has_solution(self) -> bool:
        return self.status in (OPTIMAL, TIME_LIMIT)


def policy_order(n: int, settings: SolveSettings, salt: int = 0) -> np.ndarray:
    """Positions visited first-to-last under the tie-break policy."""
    if settings.tie_break == LEX_FORWARD:
        return np.arange(n)
    if settings.tie_break == LEX_REVERSE:
        return np.arange(n)[::-1].copy()
    return np.random.default_rng([settings.seed, salt]).permutation(n)


# --------------------------------------------------------------------------
# LP
# --------------------------------------------------------------------------

def _highs(c, A, sense, rhs, lb, ub, time_limit):
    le, ge, eq = sense == "L", sense == "G", sense == "E"
    ub_rows = le | ge
    A_ub = A[ub_rows]
    sign = np.where(ge[ub_rows], -1.0, 1.0)
    A_ub = sp.diags(sign) @ A_ub
    b_ub = rhs[ub_rows] * sign
    kw = {}
    if ub_rows.any():
        kw.update(A_ub=A_ub, b_ub=b_ub)
    if eq.any():
        kw.update(A_eq=A[eq], b_eq=rhs[eq])
    bounds = np.column_stack([np.where(np.isfinite(lb), lb, -np.inf),
                              np.where(np.isfinite(ub), ub, np.inf)])
    res = linprog(c, bounds=bounds, method="highs-ds",
                  options={"time_limit": float(time_limit), "presolve": True}, **kw)
    m = len(rhs)
    duals = np.zeros(m)
    if res.status == 0:
        if ub_rows.any():
            duals[ub_rows] = res.ineqlin.marginals * sign
        if eq.any():
            duals[eq] = res.eqlin.marginals
        status = "optimal"
        x = res.x
    elif res.status == 2:
        status, x = "infeasible", np.full(len(c), np.nan)
    elif res.status == 3:
        status, x = "unbounded", np.full(len(c), np.nan)
    else:
        status, x = "time_limit", np.full(len(c), np.nan)
    return status, x, duals


def _lp_core(problem: MilpProblem, lb, ub, settings: SolveSettings, time_limit: float):
    """Solve the LP with columns and rows presented in policy order."""
    n, m = problem.n_cols, problem.n_rows
    cp = policy_order(n, settings, salt=1)
    rp = policy_order(m, settings, salt=2)
    A = problem.A[rp][:, cp]
    c, sense, rhs = problem.c[cp], problem.sense[rp], problem.rhs[rp]
    if settings.lp_engine == "simplex":
        out = simplex_solve(c, A, sense, rhs, lb[cp], ub[cp], rule=settings.pivot_rule)
        status, xp, yp = out.status, out.x, out.duals
        if status == "iteration_limit":
            status = "time_limit"
    else:
        status, xp, yp = _highs(c, A.tocsr(), sense, rhs, lb[cp], ub[cp], time_limit)
    x = np.empty(n)
    x[cp] = xp
    y = np.empty(m)
    y[rp] = yp
    return status, x, y


def solve_lp(problem: MilpProblem, settings: SolveSettings = SolveSettings(),
             lb: np.ndarray | None = None, ub: np.ndarray | None = None) -> SolveResult:
    """Solve the continuous relaxation (integrality ignored).

    Duals are reported per row as the change of the optimum per unit
    increase of the right-hand side.
    """
    t0 = time.perf_counter()
    lb = problem.lb if lb is None else lb
    ub = problem.ub if ub is None else ub
    status, x, y = _lp_core(problem, lb, ub, settings, settings.time_limit)
    wall = time.perf_counter() - t0
    if status == "optimal":
        rc = problem.c - problem.A.T @ y
        obj = float(problem.c @ x)
        return SolveResult(OPTIMAL, obj, obj, x, y, rc, 0.0, wall, 1)
    if status == "infeasible":
        return SolveResult(INFEASIBLE, np.inf, np.inf, x, None, None, np.inf, wall, 1)
    if status == "unbounded":
        return SolveResult(UNBOUNDED, -np.inf, -np.inf, x, None, None, np.inf, wall, 1)
    return SolveResult(NO_INCUMBENT, np.inf, -np.inf, x, None, None, np.inf, wall, 1)


# --------------------------------------------------------------------------
# MILP
# --------------------------------------------------------------------------

def _rel_gap(obj: float, bound: float) -> float:
    if not np.isfinite(obj):
        return np.inf
    return max(0.0, (obj - bound) / max(1.0, abs(obj)))


def _round_by_activity(problem: MilpProblem, x: np.ndarray, cols: np.ndarray,
                       rank: np.ndarray) -> np.ndarray:
    """Round binaries in ``cols`` towards the value that keeps inequality rows satisfied."""
    A = problem.A.tocsc()
    act = problem.A @ x
    ineq_le = problem.sense == "L"
    ineq_ge = problem.sense == "G"
    vals = x.copy()
    for j in cols[np.argsort(rank[cols], kind="stable")]:
        v = vals[j]
        if abs(v - round(v)) <= INT_TOL:
            vals[j] = round(v)
            continue
        rows = A.indices[A.indptr[j]:A.indptr[j + 1]]
        coef = A.data[A.indptr[j]:A.indptr[j + 1]]
        ok = {}
        for target in (0.0, 1.0):
            new = act[rows] + coef * (target - v)
            bad = (ineq_le[rows] & (new > problem.rhs[rows] + FEAS_TOL)) | \
                  (ineq_ge[rows] & (new < problem.rhs[rows] - FEAS_TOL))
            ok[target] = not bad.any()
        if ok[0.0] != ok[1.0]:
            target = 1.0 if ok[1.0] else 0.0
        elif ok[0.0]:
            target = float(v >= 0.5)
        else:
            # neither side fits the current point: commit and let the LP repair
            target = 1.0
        act[rows] += coef * (target - v)
        vals[j] = target
    return vals


def _rounding_heuristic(problem, x, lb, ub, settings, rank, deadline):
    """Fix-and-resolve rounding, one branching-priority level at a time."""
    lb, ub = lb.copy(), ub.copy()
    cur = x
    levels = sorted(set(problem.priority[problem.integrality].tolist()), reverse=True)
    for level in levels:
        cols = np.flatnonzero(problem.integrality & (problem.priority == level))
        vals = _round_by_activity(problem, cur, cols, rank)
        vals = np.clip(vals[cols], lb[cols], ub[cols])
        lb[cols] = vals
        ub[cols] = vals
        status, cur, _ = _lp_core(problem, lb, ub, settings,
                                  max(1e-3, deadline - time.perf_counter()))
        if status != "optimal":
            return None
        frac = np.abs(cur[problem.integrality] - np.round(cur[problem.integrality]))
        if frac.max(initial=0.0) <= INT_TOL:
            return cur
    return None


def _clean_integral(problem: MilpProblem, x: np.ndarray) -> np.ndarray:
    x = x.copy()
    x[problem.integrality] = np.round(x[problem.integrality])
    return x


@dataclass(order=True)
class _Node:
    bound: float
    neg_depth: int
    seq: int
    lb: np.ndarray = field(compare=False)
    ub: np.ndarray = field(compare=False)


def solve_milp(problem: MilpProblem, settings: SolveSettings = SolveSettings()) -> SolveResult:
    """Solve the MILP to ``settings.rel_gap`` with the configured engine."""
    if settings.mip_engine == "bnb" or not problem.integrality.any():
        return branch_and_bound(problem, settings)
    return _highs_milp(problem, settings)


def _highs_milp(problem: MilpProblem, settings: SolveSettings) -> SolveResult:
    t0 = time.perf_counter()
    n, m = problem.n_cols, problem.n_rows
    cp = policy_order(n, settings, salt=1)
    rp = policy_order(m, settings, salt=2)
    A = problem.A[rp][:, cp].tocsr()
    sense, rhs = problem.sense[rp], problem.rhs[rp]
    lo = np.where(sense == "L", -np.inf, rhs)
    hi = np.where(sense == "G", np.inf, rhs)
    opts = {"time_limit": float(settings.time_limit), "mip_rel_gap": settings.rel_gap,
            "disp": settings.trace}
    if settings.node_limit is not None:
        opts["node_limit"] = int(settings.node_limit)
    res = milp(problem.c[cp], integrality=problem.integrality[cp].astype(int),
               bounds=Bounds(problem.lb[cp], problem.ub[cp]),
               constraints=LinearConstraint(A, lo, hi), options=opts)
    wall = time.perf_counter() - t0
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    bound = getattr(res, "mip_dual_bound", None)
    if res.x is None:
        if res.status == 2:
            status = INFEASIBLE
        elif res.status == 3:
            return SolveResult(UNBOUNDED, -np.inf, -np.inf, np.full(n, np.nan), gap=np.inf,
                               wall_time=wall, node_count=nodes)
        else:
            status = NO_INCUMBENT
        return SolveResult(status, np.inf, -np.inf if bound is None else float(bound),
                           np.full(n, np.nan), gap=np.inf, wall_time=wall, node_count=nodes)
    x = np.empty(n)
    x[cp] = res.x
    x = _polish(problem, _clean_integral(problem, x), settings,
                settings.time_limit - (time.perf_counter() - t0))
    wall = time.perf_counter() - t0
    obj = float(problem.c @ x)
    bound = obj if bound is None or not np.isfinite(bound) else min(float(bound), obj)
    gap = _rel_gap(obj, bound)
    status = OPTIMAL if res.status == 0 or gap <= settings.rel_gap else TIME_LIMIT
    return SolveResult(status, obj, bound, x, gap=gap, wall_time=wall, node_count=nodes)


def _polish(problem: MilpProblem, x: np.ndarray, settings: SolveSettings,
            time_left: float) -> np.ndarray:
    """Re-solve the continuous part with binaries fixed at ``x``.

    Branch-and-cut incumbents satisfy equalities only to the MIP feasibility
    tolerance; the basic solution of the restricted LP is exact to rounding.
    """
    if time_left <= 0:
        return x
    lb, ub = problem.lb.copy(), problem.ub.copy()
    lb[problem.integrality] = x[problem.integrality]
    ub[problem.integrality] = x[problem.integrality]
    status, y, _ = _lp_core(problem, lb, ub, settings, time_left)
    if status != "optimal" or problem.c @ y > problem.c @ x + 1e-9 * max(1.0, abs(problem.c @ x)):
        return x
    return _clean_integral(problem, y)


def branch_and_bound(problem: MilpProblem, settings: SolveSettings = SolveSettings()) -> SolveResult:
    """Best-first branch-and-bound over the integer columns.

    Branching picks the highest-priority, most-fractional integer column,
    with ties resolved by the tie-break policy order.  Nodes with equal
    bounds are explored deepest first.  ``lex_forward`` explores the down
    branch first, ``lex_reverse`` the up branch first.
    """
    t0 = time.perf_counter()
    deadline = t0 + settings.time_limit
    n = problem.n_cols
    order = policy_order(n, settings, salt=3)
    rank = np.empty(n, dtype=int)
    rank[order] = np.arange(n)
    rng = np.random.default_rng([settings.seed, 4])

    incumbent, inc_obj = None, np.inf
    seq = itertools.count()
    heap: list[_Node] = [_Node(-np.inf, 0, next(seq), problem.lb.copy(), problem.ub.copy())]
    nodes = 0
    pruned_min = np.inf  # bounds of subtrees dropped because they were within the gap
    timed_out = False

    def open_bound():
        return min(heap[0].bound if heap else np.inf, pruned_min)

    while heap:
        if incumbent is not None and _rel_gap(inc_obj, open_bound()) <= settings.rel_gap:
            break
        if time.perf_counter() > deadline or (
                settings.node_limit is not None and nodes >= settings.node_limit):
            timed_out = True
            break
        node = heapq.heappop(heap)
        if incumbent is not None and _rel_gap(inc_obj, node.bound) <= settings.rel_gap:
            pruned_min = min(pruned_min, node.bound)
            continue
        status, x, _ = _lp_core(problem, node.lb, node.ub, settings,
                                max(1e-3, deadline - time.perf_counter()))
        nodes += 1
        if status == "unbounded" and nodes == 1:
            return SolveResult(UNBOUNDED, -np.inf, -np.inf, x, gap=np.inf,
                               wall_time=time.perf_counter() - t0, node_count=nodes)
        if status == "time_limit":
            timed_out = True
            heapq.heappush(heap, node)
            break
        if status != "optimal":
            continue
        obj = float(problem.c @ x)
        if settings.trace:
            log.info("node %d depth %d bound %.6f incumbent %.6f", nodes, -node.neg_depth,
                     obj, inc_obj)
        if incumbent is not None and _rel_gap(inc_obj, obj) <= settings.rel_gap:
            pruned_min = min(pruned_min, obj)
            continue
        frac = np.abs(x - np.round(x))
        frac[~problem.integrality] = 0.0
        if frac.max(initial=0.0) <= INT_TOL:
            if obj < inc_obj:
                incumbent, inc_obj = _clean_integral(problem, x), obj
            continue
        if nodes == 1 or (-node.neg_depth) % 8 == 0:
            h = _rounding_heuristic(problem, x, node.lb, node.ub, settings, rank, deadline)
            if h is not None:
                h_obj = float(problem.c @ h)
                if h_obj < inc_obj:
                    incumbent, inc_obj = _clean_integral(problem, h), h_obj
                if _rel_gap(inc_obj, obj) <= settings.rel_gap:
                    pruned_min = min(pruned_min, obj)
                    continue
        # branching column: top priority, most fractional, then policy order
        cand = np.flatnonzero(frac > INT_TOL)
        top = problem.priority[cand].max()
        cand = cand[problem.priority[cand] == top]
        closeness = np.abs(x[cand] - np.floor(x[cand]) - 0.5)
        best = cand[closeness <= closeness.min() + 1e-12]
        j = int(best[np.argmin(rank[best])])
        down_ub = node.ub.copy()
        down_ub[j] = np.floor(x[j])
        up_lb = node.lb.copy()
        up_lb[j] = np.ceil(x[j])
        children = [(node.lb, down_ub), (up_lb, node.ub)]
        if settings.tie_break == LEX_REVERSE or (
                settings.tie_break == SEEDED_SHUFFLE and rng.random() < 0.5):
            children.reverse()
        for clb, cub in children:
            heapq.heappush(heap, _Node(obj, node.neg_depth - 1, next(seq), clb, cub))

    wall = time.perf_counter() - t0
    if incumbent is None:
        status = NO_INCUMBENT if timed_out else INFEASIBLE
        return SolveResult(status, np.inf, open_bound(), np.full(n, np.nan), gap=np.inf,
                           wall_time=wall, node_count=nodes)
    best_bound = min(open_bound(), inc_obj)
    gap = _rel_gap(inc_obj, best_bound)
    status = OPTIMAL if gap <= settings.rel_gap else TIME_LIMIT
    return SolveResult(status, inc_obj, best_bound, incumbent, gap=gap, wall_time=wall,
                       node_count=nodes)


def enumerate_binaries_oracle(problem: MilpProblem, settings: SolveSettings = SolveSettings(),
                              max_binaries: int = 20) -> SolveResult:
    """Exhaustive search over all 0/1 assignments of the integer columns.

    Rows that involve integer columns only are checked directly, so an
    assignment violating one of them is discarded without an LP solve.
    Every other assignment is settled by solving the remaining LP.
    """
    if max_binaries > 20:
        raise OracleGuardError("max_binaries guard is capped at 20")
    idx = np.flatnonzero(problem.integrality)
    if idx.size > max_binaries:
        raise OracleGuardError(f"{idx.size} binaries exceed the guard of {max_binaries}")
    t0 = time.perf_counter()
    relaxed = problem.copy()
    relaxed.integrality[:] = False
    if idx.size == 0:
        return solve_lp(relaxed, settings)
    A = problem.A.tocsr()
    touches_cont = np.asarray(abs(A[:, np.flatnonzero(~problem.integrality)]).sum(axis=1)).ravel() > 0
    pure = np.flatnonzero(~touches_cont & (np.diff(A.indptr) > 0))
    A_pure = A[pure][:, idx].toarray()
    sense, rhs = problem.sense[pure], problem.rhs[pure]
    best = None
    count = 0
    for bits in itertools.product((0.0, 1.0), repeat=idx.size):
        b = np.array(bits)
        if np.any(b < problem.lb[idx]) or np.any(b > problem.ub[idx]):
            continue
        if pure.size:
            act = A_pure @ b
            if (np.any(act[sense == "L"] > rhs[sense == "L"] + FEAS_TOL)
                    or np.any(act[sense == "G"] < rhs[sense == "G"] - FEAS_TOL)
                    or np.any(np.abs(act[sense == "E"] - rhs[sense == "E"]) > FEAS_TOL)):
                continue
        lb, ub = problem.lb.copy(), problem.ub.copy()
        lb[idx] = b
        ub[idx] = b
        res = solve_lp(relaxed, settings, lb, ub)
        count += 1
        if res.status == UNBOUNDED:
            return res
        if res.status == OPTIMAL and (best is None or res.objective < best.objective):
            best = res
    wall = time.perf_counter() - t0
    if best is None:
        return SolveResult(INFEASIBLE, np.inf, np.inf, np.full(problem.n_cols, np.nan),
                           gap=np.inf, wall_time=wall, node_count=count)
    return SolveResult(OPTIMAL, best.objective, best.objective, best.x, gap=0.0,
                       wall_time=wall, node_count=count)
