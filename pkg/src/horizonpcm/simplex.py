"""Bounded-variable revised primal simplex (two phases, dense inverse).

Intended for small and medium LPs where a fully controlled pivoting sequence
matters more than speed.  Ties in both pricing and the ratio test are broken
by the lowest column index, so permuting the columns of a degenerate problem
changes which optimal vertex is returned.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BLAND = "bland"
DANTZIG_LEXICO = "dantzig_lexico"

_FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-9
_REFACTOR_EVERY = 64
_DEGENERATE_SWITCH = 40


@dataclass
class SimplexOutcome:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    x: np.ndarray
    objective: float
    duals: np.ndarray          # d objective / d rhs, one per row
    reduced_costs: np.ndarray  # one per structural column
    iterations: int
    basis: np.ndarray


class _Simplex:
    def __init__(self, A, b, lb, ub, rule, max_iter):
        self.A = A
        self.b = b
        self.lb = lb
        self.ub = ub
        self.m, self.N = A.shape
        self.rule = rule
        self.max_iter = max_iter
        self.iterations = 0

    # -- basis bookkeeping ------------------------------------------------
    def refactor(self):
        B = self.A[:, self.basis]
        self.Binv = np.linalg.inv(B)
        nonbasic = np.ones(self.N, dtype=bool)
        nonbasic[self.basis] = False
        r = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.Binv @ r

    def _entering(self, d, bland, opt_tol):
        nb = np.ones(self.N, dtype=bool)
        nb[self.basis] = False
        nb &= self.lb < self.ub
        can_inc = self.x < self.ub - _FEAS_TOL
        can_dec = self.x > self.lb + _FEAS_TOL
        inc = nb & (d < -opt_tol) & can_inc
        dec = nb & (d > opt_tol) & can_dec
        elig = inc | dec
        if not elig.any():
            return -1, 0
        if bland:
            q = int(np.flatnonzero(elig)[0])
        else:
            q = int(np.argmax(np.where(elig, np.abs(d), -1.0)))
        return q, (1 if inc[q] else -1)

    def _ratio(self, q, direction, alpha):
        a = alpha * direction
        xb = self.x[self.basis]
        lbb = self.lb[self.basis]
        ubb = self.ub[self.basis]
        t = np.full(self.m, np.inf)
        dec = (a > _PIVOT_TOL) & np.isfinite(lbb)
        inc = (a < -_PIVOT_TOL) & np.isfinite(ubb)
        t[dec] = (xb[dec] - lbb[dec]) / a[dec]
        t[inc] = (ubb[inc] - xb[inc]) / -a[inc]
        t = np.maximum(t, 0.0)
        span = self.ub[q] - self.lb[q]
        tmin = t.min(initial=np.inf)
        if np.isfinite(span) and span <= tmin:
            return span, -2, None
        if not np.isfinite(tmin):
            return np.inf, -1, None
        ties = np.flatnonzero(t <= tmin + 1e-12 * max(1.0, tmin))
        r = int(ties[np.argmin(self.basis[ties])])
        bound = lbb[r] if dec[r] else ubb[r]
        return tmin, r, bound

    def run(self, c):
        opt_tol = 1e-9 * max(1.0, float(np.abs(c).max(initial=0.0)))
        degenerate = 0
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                return "iteration_limit"
            y = c[self.basis] @ self.Binv
            d = c - y @ self.A
            bland = self.rule == BLAND or degenerate > _DEGENERATE_SWITCH
            q, direction = self._entering(d, bland, opt_tol)
            if q < 0:
                return "optimal"
            alpha = self.Binv @ self.A[:, q]
            theta, leave, leave_to = self._ratio(q, direction, alpha)
            if not np.isfinite(theta):
                return "unbounded"
            self.iterations += 1
            degenerate = degenerate + 1 if theta <= _FEAS_TOL else 0
            self.x[q] += direction * theta
            self.x[self.basis] -= direction * theta * alpha
            if leave == -2:
                # bound flip, basis unchanged
                self.x[q] = self.ub[q] if direction == 1 else self.lb[q]
                continue
            out = self.basis[leave]
            self.x[out] = leave_to
            piv = alpha[leave]
            row = self.Binv[leave] / piv
            self.Binv -= np.outer(alpha, row)
            self.Binv[leave] = row
            self.basis[leave] = q
            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0


def simplex_solve(c, A, sense, rhs, lb, ub, rule=DANTZIG_LEXICO, max_iter=50_000):
    """Minimise ``c @ x`` subject to row senses and column bounds.

    Returns row duals as the derivative of the optimum with respect to each
    right-hand side.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A.toarray() if hasattr(A, "toarray") else A, dtype=float)
    m, n = A.shape
    rhs = np.asarray(rhs, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if np.any(lb > ub + _FEAS_TOL):
        return SimplexOutcome("infeasible", np.full(n, np.nan), np.nan,
                              np.zeros(m), np.zeros(n), 0, np.zeros(0, dtype=int))

    s_lb = np.where(sense == "G", -np.inf, 0.0)
    s_ub = np.where(sense == "L", np.inf, 0.0)
    x0 = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    resid = rhs - A @ x0
    slack = np.clip(resid, s_lb, s_ub)
    art = resid - slack
    art_rows = np.flatnonzero(np.abs(art) > _FEAS_TOL)
    k = art_rows.size

    Aart = np.zeros((m, k))
    Aart[art_rows, np.arange(k)] = np.sign(art[art_rows])
    Afull = np.hstack([A, np.eye(m), Aart])
    N = n + m + k
    flb = np.concatenate([lb, s_lb, np.zeros(k)])
    fub = np.concatenate([ub, s_ub, np.full(k, np.inf)])
    x = np.concatenate([x0, slack, np.abs(art[art_rows])])
    basis = np.arange(n, n + m)
    basis[art_rows] = n + m + np.arange(k)

    sx = _Simplex(Afull, rhs, flb, fub, rule, max_iter)
    sx.x = x
    sx.basis = basis
    sx.refactor()

    if k:
        c1 = np.zeros(N)
        c1[n + m:] = 1.0
        status = sx.run(c1)
        if status == "iteration_limit":
            return _outcome(sx, status, c, n, m)
        if sx.x[n + m:].sum() > 1e-7 * max(1.0, np.abs(rhs).max(initial=0.0)):
            return _outcome(sx, "infeasible", c, n, m)
        sx.ub[n + m:] = 0.0
        sx.x[n + m:] = np.clip(sx.x[n + m:], 0.0, 0.0)
        _drive_out_artificials(sx, n + m)
        sx.refactor()

    c2 = np.concatenate([c, np.zeros(m + k)])
    status = sx.run(c2)
    return _outcome(sx, status, c, n, m)


def _drive_out_artificials(sx, first_art):
    for r in range(sx.m):
        if sx.basis[r] < first_art:
            continue
        row = sx.Binv[r] @ sx.A[:, :first_art]
        basic = np.zeros(first_art, dtype=bool)
        basic[sx.basis[sx.basis < first_art]] = True
        cand = np.flatnonzero((np.abs(row) > 1e-9) & ~basic)
        if cand.size == 0:
            continue  # redundant row
        q = cand[0]
        alpha = sx.Binv @ sx.A[:, q]
        piv = alpha[r]
        new_row = sx.Binv[r] / piv
        sx.Binv -= np.outer(alpha, new_row)
        sx.Binv[r] = new_row
        sx.basis[r] = q


def _outcome(sx, status, c, n, m):
    x = sx.x[:n].copy()
    if status != "optimal":
        return SimplexOutcome(status, x, np.nan, np.zeros(m), np.zeros(n),
                              sx.iterations, sx.basis.copy())
    cfull = np.zeros(sx.N)
    cfull[:n] = c
    y = cfull[sx.basis] @ sx.Binv
    d = c - y @ sx.A[:, :n]
    # clean values that sit on a bound up to round-off
    for arr, bnd in ((x, sx.lb[:n]), (x, sx.ub[:n])):
        near = np.isfinite(bnd) & (np.abs(arr - bnd) <= 1e-11 * np.maximum(1, np.abs(bnd)))
        arr[near] = bnd[near]
    return SimplexOutcome(status, x, float(c @ x), y, d, sx.iterations, sx.basis.copy())
