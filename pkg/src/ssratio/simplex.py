"""Exact rational simplex for LPs of the form

    minimize  c.x   subject to   a_i.x >= b_i  (i = 0..m-1),   x free.

The solver runs the primal revised simplex on the dual

    maximize  b.y   subject to   A^T y = c,   y >= 0,

which has one row per primal variable, so the basis stays small even when
there are thousands of primal constraints.  The basis inverse is kept
explicitly as sparse rows of ``gmpy2.mpq``; every feasibility and optimality
decision is an exact rational comparison.

Entropy LPs are heavily degenerate (the dual right-hand side ``c`` is almost
all zeros), so both primal phases run on a right-hand side perturbed by
small seeded positive rationals.  Reduced costs do not depend on the
right-hand side, so the final basis stays dual feasible once the
perturbation is removed, and dual simplex pivots repair any leftover primal
infeasibility.  The primal phases price with Devex.  A run of
``degenerate_limit`` degenerate pivots switches to Bland's least-index rule
until progress resumes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq


class SolverError(RuntimeError):
    """LP is infeasible or unbounded, or the solver hit its pivot limit."""


@dataclass
class SimplexResult:
    objective: Fraction
    x: list  # primal values, one per variable
    y: list  # dual multipliers, one per constraint row (all >= 0)
    iterations: int


def _frac(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def solve_inequality_lp(nvars: int, rows: list, rhs: list, cost: dict,
                        perturb: bool = True, seed: int = 1,
                        degenerate_limit: int = 50, max_iter: int = 1_000_000) -> SimplexResult:
    """Solve ``min cost.x`` s.t. ``rows[i].x >= rhs[i]``.

    ``rows`` are sparse dicts ``{var: int-or-rational}``; ``cost`` is a sparse
    dict over variables.  Raises :class:`SolverError` when the primal is
    infeasible (dual unbounded) or unbounded (dual infeasible).
    """
    m = len(rows)
    n = nvars
    c = [mpq(0)] * n
    for k, v in cost.items():
        c[k] = mpq(v)
    # dual row i reads sum_j cols[j][i] y_j = c_i; flip rows with c_i < 0 so
    # the all-artificial start is feasible
    sign = [(-1 if c[i] < 0 else 1) for i in range(n)]
    cols = [{k: mpq(v) * sign[k] for k, v in r.items() if v} for r in rows]
    b = [mpq(v) for v in rhs]
    rhs_dual = [c[i] * sign[i] for i in range(n)]

    work_rhs = rhs_dual
    if perturb:
        rng = random.Random(seed)
        work_rhs = [v + mpq(rng.randint(1 << 20, 1 << 21), 1 << 40) for v in rhs_dual]

    st = _Simplex(cols, m, n, work_rhs, degenerate_limit, max_iter)
    st.primal(cost=[mpq(0)] * m, art_cost=mpq(-1))
    if any(st.xb[i] != 0 for i in range(n) if st.basis[i] >= m):
        if not perturb:
            raise SolverError("primal LP is unbounded (dual system infeasible)")
        # the perturbed system may be infeasible while the original is not
        return solve_inequality_lp(nvars, rows, rhs, cost, perturb=False,
                                   degenerate_limit=degenerate_limit, max_iter=max_iter)
    st.drive_out_artificials()
    st.primal(cost=b, art_cost=None)
    if perturb:
        st.reset_rhs(rhs_dual)
        st.dual(cost=b)

    y = [mpq(0)] * m
    for i, j in enumerate(st.basis):
        if j < m:
            y[j] = st.xb[i]
        elif st.xb[i]:
            raise SolverError("artificial variable left at a nonzero level")
    # primal x_i = multiplier of dual row i, undoing the row sign flip
    x = [st.pi[i] * sign[i] for i in range(n)]
    obj = sum((b[j] * y[j] for j in range(m) if y[j]), mpq(0))
    return SimplexResult(_frac(obj), [_frac(v) for v in x], [_frac(v) for v in y], st.iterations)


class _Simplex:
    """Revised simplex state for ``max cost.y, A y = rhs, y >= 0``.

    Columns ``0..m-1`` are structural and ``m..m+n-1`` artificial.
    """

    def __init__(self, cols, m, n, rhs, degenerate_limit, max_iter):
        self.cols = cols
        self.m = m
        self.n = n
        self.basis = [m + i for i in range(n)]
        self.where = {m + i: i for i in range(n)}
        self.binv = [{i: mpq(1)} for i in range(n)]
        self.xb = list(rhs)
        self.pi = [mpq(0)] * n
        self.degenerate_limit = degenerate_limit
        self.max_iter = max_iter
        self.iterations = 0
        self.degenerate_pivots = 0
        self.bland_pivots = 0

    def _compute_pi(self, cost, art_cost):
        pi = [mpq(0)] * self.n
        for i, j in enumerate(self.basis):
            cj = (art_cost or 0) if j >= self.m else cost[j]
            if cj:
                for k, v in self.binv[i].items():
                    pi[k] += cj * v
        self.pi = pi

    def _ftran(self, col):
        alpha = {}
        for i, row in enumerate(self.binv):
            s = 0
            for k, v in col.items():
                w = row.get(k)
                if w is not None:
                    s += w * v
            if s:
                alpha[i] = s
        return alpha

    def _row_times_col(self, rho, j):
        s = 0
        for k, v in self.cols[j].items():
            w = rho.get(k)
            if w is not None:
                s += w * v
        return s

    def _reduced_cost(self, cost, j):
        d = cost[j]
        for k, v in self.cols[j].items():
            d -= self.pi[k] * v
        return d

    def _pivot(self, r, q, alpha, d_q):
        """Column q enters at row r; updates B^-1 and pi."""
        piv = alpha[r]
        row_r = {k: v / piv for k, v in self.binv[r].items()}
        self.binv[r] = row_r
        for i, a in alpha.items():
            if i == r:
                continue
            row = self.binv[i]
            for k, v in row_r.items():
                nv = row.get(k, 0) - a * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        del self.where[self.basis[r]]
        self.basis[r] = q
        self.where[q] = r
        if d_q:
            pi = self.pi
            for k, v in row_r.items():
                pi[k] += d_q * v

    def _tick(self):
        self.iterations += 1
        if self.iterations > self.max_iter:
            raise SolverError("pivot limit reached")

    def reset_rhs(self, rhs):
        """Recompute basic values as B^-1 rhs for a new right-hand side."""
        xb = []
        for row in self.binv:
            s = mpq(0)
            for k, v in row.items():
                if rhs[k]:
                    s += v * rhs[k]
            xb.append(s)
        self.xb = xb

    def primal(self, cost, art_cost):
        m = self.m
        self._compute_pi(cost, art_cost)
        weight = [mpq(1)] * m  # Devex reference weights
        degenerate_run = 0
        while True:
            self._tick()
            bland = degenerate_run >= self.degenerate_limit
            q, best, score = -1, 0, 0
            for j in range(m):
                if j in self.where:
                    continue
                d = self._reduced_cost(cost, j)
                if d > 0:
                    if bland:
                        q, best = j, d
                        break
                    sc = d * d / weight[j]
                    if sc > score:
                        q, best, score = j, d, sc
            if q < 0:
                return
            if bland:
                self.bland_pivots += 1
            alpha = self._ftran(self.cols[q])
            r, theta = -1, None
            for i, a in alpha.items():
                if a > 0:
                    t = self.xb[i] / a
                    if (theta is None or t < theta
                            or (t == theta and self.basis[i] < self.basis[r])):
                        r, theta = i, t
            if r < 0:
                raise SolverError("primal LP is infeasible (dual unbounded)")
            if theta:
                for i, a in alpha.items():
                    self.xb[i] -= theta * a
                degenerate_run = 0
            else:
                degenerate_run += 1
                self.degenerate_pivots += 1
            self.xb[r] = theta
            a_rq = alpha[r]
            rho = self.binv[r]
            w_q = weight[q]
            for j in range(m):
                if j in self.where:
                    continue
                a_rj = self._row_times_col(rho, j)
                if a_rj:
                    ratio = a_rj / a_rq
                    cand = ratio * ratio * w_q
                    if cand > weight[j]:
                        weight[j] = cand
            old = self.basis[r]
            self._pivot(r, q, alpha, best)
            if old < m:
                weight[old] = max(w_q / (a_rq * a_rq), mpq(1))

    def dual(self, cost):
        """Dual simplex from a dual feasible basis until x_B >= 0."""
        m = self.m
        self._compute_pi(cost, None)
        degenerate_run = 0
        while True:
            bland = degenerate_run >= self.degenerate_limit
            r = -1
            for i, v in enumerate(self.xb):
                if v < 0 and (r < 0 or (self.basis[i] < self.basis[r] if bland
                                        else v < self.xb[r])):
                    r = i
            if r < 0:
                return
            self._tick()
            rho = self.binv[r]
            q, ratio_q, d_q = -1, None, 0
            for j in range(m):
                if j in self.where:
                    continue
                a_rj = self._row_times_col(rho, j)
                if a_rj < 0:
                    d = self._reduced_cost(cost, j)
                    ratio = d / a_rj
                    if ratio_q is None or ratio < ratio_q:
                        q, ratio_q, d_q = j, ratio, d
            if q < 0:
                raise SolverError("primal LP is unbounded (dual system infeasible)")
            if ratio_q == 0:
                degenerate_run += 1
                self.degenerate_pivots += 1
            else:
                degenerate_run = 0
            alpha = self._ftran(self.cols[q])
            theta = self.xb[r] / alpha[r]
            for i, a in alpha.items():
                self.xb[i] -= theta * a
            self.xb[r] = theta
            self._pivot(r, q, alpha, d_q)

    def drive_out_artificials(self):
        """Pivot zero-level artificials out of the basis where possible.

        A row with no structural candidate is redundant; its artificial stays
        basic at level zero.
        """
        m = self.m
        for r in range(self.n):
            if self.basis[r] < m:
                continue
            row = self.binv[r]
            for j in range(m):
                if j not in self.where and self._row_times_col(row, j):
                    self._pivot(r, j, self._ftran(self.cols[j]), 0)
                    break
