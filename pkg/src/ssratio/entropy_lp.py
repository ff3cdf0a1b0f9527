"""Shannon-inequality LP lower bounds for graph access structures.

Variables are f(A) for every A in V + {s}, indexed by bitmask with the secret
on bit ``n``.  Constraints are the elemental Shannon inequalities plus the
access conditions at minimal qualified sets (edges) and maximal unqualified
sets (maximal independent sets), normalized by f({s}) = 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from .certificates import (
    EMPTY_ZERO, MONOTONICITY, QUALIFIED, SECRET_UNIT, SUBMODULARITY, UNQUALIFIED,
    Certificate, InequalityInstance, check,
)
from .expr import LinearExpr
from .graphs import LabeledGraph, GraphError, maximal_independent_set_masks
from .simplex import solve_inequality_lp, SolverError

MAX_LP_VERTICES = 10
WORST, AVERAGE = "worst", "average"


@dataclass(frozen=True)
class Constraint:
    """``sum coeffs[var] * f(var) (>= or =) rhs``.

    ``tag`` records where the row came from: ("empty",), ("secret",),
    ("mono", i), ("submod", i, j, K), ("qualified", mask),
    ("unqualified", mask) or ("bound", v).
    """
    coeffs: dict
    relation: str  # ">=" or "="
    rhs: Fraction
    tag: tuple


@dataclass
class EntropyLP:
    graph: LabeledGraph
    mode: str
    ground_size: int
    constraints: list
    objective: dict  # var -> coefficient; minimized
    secret_entropy: Fraction = Fraction(1)

    @property
    def secret_bit(self) -> int:
        return 1 << (self.ground_size - 1)

    @property
    def t_var(self) -> int | None:
        """Index of the auxiliary bound variable (worst mode only)."""
        return 1 << self.ground_size if self.mode == WORST else None

    @property
    def num_vars(self) -> int:
        return (1 << self.ground_size) + (1 if self.mode == WORST else 0)

    def count(self, kind: str) -> int:
        return sum(1 for c in self.constraints if c.tag[0] == kind)

    def var_name(self, var: int) -> str:
        return "t" if var == self.t_var else f"f_{var}"


@dataclass
class RationalSolution:
    objective_value: Fraction
    variable_values: dict  # var -> Fraction (t included in worst mode)
    dual_values: dict  # constraint index -> Fraction
    iterations: int = 0


class LPSizeError(GraphError):
    pass


def build_lp(g: LabeledGraph, mode: str = WORST, secret_entropy=1) -> EntropyLP:
    if mode not in (WORST, AVERAGE):
        raise ValueError(f"unknown mode {mode!r}")
    if g.n > MAX_LP_VERTICES:
        raise LPSizeError(f"LP limited to {MAX_LP_VERTICES} vertices (got {g.n}); "
                          "use the certificate method instead")
    if g.n == 0:
        raise GraphError("graph has no vertices")
    h = Fraction(secret_entropy)
    N = g.n + 1
    full = (1 << N) - 1
    s = 1 << g.n
    rows = []
    rows.append(Constraint({0: 1}, "=", Fraction(0), ("empty",)))
    rows.append(Constraint({s: 1}, "=", h, ("secret",)))
    for i in range(N):
        rows.append(Constraint({full: 1, full ^ (1 << i): -1}, ">=", Fraction(0), ("mono", i)))
    for i, j in combinations(range(N), 2):
        rest = [k for k in range(N) if k != i and k != j]
        bi, bj = 1 << i, 1 << j
        for sel in range(1 << len(rest)):
            K = 0
            for t, k in enumerate(rest):
                if sel >> t & 1:
                    K |= 1 << k
            coeffs = {K | bi: 1, K | bj: 1, K | bi | bj: -1, K: -1}
            rows.append(Constraint(coeffs, ">=", Fraction(0), ("submod", i, j, K)))
    for u, v in g.sorted_edges():
        e = (1 << u) | (1 << v)
        rows.append(Constraint({e | s: 1, e: -1}, "=", Fraction(0), ("qualified", e)))
    for m in maximal_independent_set_masks(g):
        rows.append(Constraint({m | s: 1, m: -1}, "=", h, ("unqualified", m)))
    if mode == WORST:
        t = 1 << N
        for v in range(g.n):
            rows.append(Constraint({t: 1, 1 << v: -1}, ">=", Fraction(0), ("bound", v)))
        objective = {t: Fraction(1)}
    else:
        objective = {1 << v: Fraction(1, g.n) for v in range(g.n)}
    return EntropyLP(g, mode, N, rows, objective, h)


def _substitute(coeffs: dict, subs: dict):
    """Rewrite a row through variable substitutions; returns (coeffs, shift).

    ``subs[var] = (expr_dict, const)`` means var = expr + const.
    """
    out: dict = {}
    shift = Fraction(0)
    for var, c in coeffs.items():
        if var in subs:
            expr, const = subs[var]
            shift += c * const
            for w, a in expr.items():
                out[w] = out.get(w, 0) + c * a
        else:
            out[var] = out.get(var, 0) + c
    return {k: v for k, v in out.items() if v}, shift


def automorphism_generators(g: LabeledGraph, limit: int = 64) -> list[tuple]:
    """Up to ``limit`` non-identity automorphisms of g, as vertex tuples.

    Any subset of the automorphism group is fine here: orbits are taken
    under the subgroup it generates.
    """
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges)
    ident = tuple(range(g.n))
    out = []
    for iso in GraphMatcher(G, G).isomorphisms_iter():
        perm = tuple(iso[v] for v in range(g.n))
        if perm != ident:
            out.append(perm)
            if len(out) >= limit:
                break
    return out


def _var_orbits(lp: EntropyLP, gens: list) -> list[int]:
    """Map every LP variable to the smallest index in its orbit."""
    nv = lp.num_vars
    parent = list(range(nv))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    nsub = 1 << lp.ground_size
    n = lp.graph.n
    for perm in gens:
        # image of each mask, built from images of its lower bits
        img = [0] * nsub
        for mask in range(1, nsub):
            low = mask & -mask
            b = low.bit_length() - 1
            img[mask] = img[mask ^ low] | (1 << (perm[b] if b < n else b))
        for mask in range(nsub):
            ra, rb = find(mask), find(img[mask])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return [find(v) for v in range(nv)]


def _eliminating_var(coeffs: dict):
    cands = [v for v, a in coeffs.items() if abs(a) == 1]
    return max(cands) if cands else None


def solve(lp: EntropyLP, use_symmetry: bool = True) -> RationalSolution:
    """Exact optimum, with primal values and constraint multipliers.

    The LP is first folded onto orbits of the graph's automorphisms (an
    optimal solution can always be averaged into an invariant one).  Equality
    rows are then eliminated by substitution, the remaining inequalities go
    to the exact simplex, and duplicate rows are merged.  The result is mapped
    back to the full LP, where primal feasibility, dual feasibility,
    stationarity and zero duality gap are all re-checked exactly.
    """
    cons = lp.constraints
    orb = _var_orbits(lp, automorphism_generators(lp.graph) if use_symmetry else [])

    def fold(coeffs):
        out: dict = {}
        for v, a in coeffs.items():
            r = orb[v]
            out[r] = out.get(r, 0) + a
        return {k: v for k, v in out.items() if v}

    subs: dict = {}
    seen_eq = set()
    for idx, c in enumerate(cons):
        if c.relation != "=":
            continue
        coeffs, shift = _substitute(fold(c.coeffs), subs)
        rhs = c.rhs - shift
        if not coeffs:
            if rhs != 0:
                raise SolverError(f"equality {c.tag} is inconsistent")
            continue
        key = (tuple(sorted(coeffs.items())), rhs)
        if key in seen_eq:
            continue
        seen_eq.add(key)
        var = _eliminating_var(coeffs)
        if var is None:
            raise SolverError(f"cannot eliminate equality {c.tag}")
        a = coeffs.pop(var)
        expr = {w: -Fraction(b) / a for w, b in coeffs.items()}
        const = rhs / a
        for k, (e, k0) in list(subs.items()):
            if var in e:
                e2, sh = _substitute(e, {var: (expr, const)})
                subs[k] = (e2, k0 + sh)
        subs[var] = (expr, const)

    reps = sorted(set(orb))
    free_vars = [v for v in reps if v not in subs]
    col = {v: k for k, v in enumerate(free_vars)}
    groups: dict = {}
    for idx, c in enumerate(cons):
        if c.relation == "=":
            continue
        coeffs, shift = _substitute(fold(c.coeffs), subs)
        rhs = c.rhs - shift
        if not coeffs:
            if rhs > 0:
                raise SolverError(f"constraint {c.tag} infeasible after presolve")
            continue
        key = (tuple(sorted(coeffs.items())), rhs)
        groups.setdefault(key, []).append(idx)
    keys = list(groups)
    red_rows = [{col[v]: a for v, a in k[0]} for k in keys]
    red_rhs = [k[1] for k in keys]
    obj_coeffs, obj_shift = _substitute(fold(lp.objective), subs)
    red_cost = {col[v]: a for v, a in obj_coeffs.items()}

    res = solve_inequality_lp(len(free_vars), red_rows, red_rhs, red_cost)

    rep_val = {v: res.x[k] for v, k in col.items()}

    def value_of(v):
        if v in rep_val:
            return rep_val[v]
        expr, const = subs[v]
        return const + sum((a * rep_val[w] for w, a in expr.items()), Fraction(0))

    values = {v: value_of(orb[v]) for v in range(lp.num_vars)}
    objective = sum((Fraction(a) * values[v] for v, a in lp.objective.items()), Fraction(0))
    if objective != res.objective + obj_shift:
        raise SolverError("objective mismatch after unfolding")

    duals = {idx: Fraction(0) for idx in range(len(cons))}
    for k, key in enumerate(keys):
        if res.y[k]:
            share = res.y[k] / len(groups[key])
            for idx in groups[key]:
                duals[idx] = share
    # stationarity in the full space determines the equality multipliers
    resid = {v: Fraction(a) for v, a in lp.objective.items()}
    for idx, c in enumerate(cons):
        if c.relation != "=" and duals[idx]:
            for v, a in c.coeffs.items():
                resid[v] = resid.get(v, 0) - duals[idx] * a
    eqs = [idx for idx, c in enumerate(cons) if c.relation == "="]
    for idx in reversed(eqs):
        c = cons[idx]
        var = _eliminating_var(c.coeffs)
        z = resid.get(var, Fraction(0)) / c.coeffs[var]
        duals[idx] = z
        if z:
            for v, a in c.coeffs.items():
                resid[v] = resid.get(v, 0) - z * a
    if any(resid.values()):
        raise SolverError("dual multipliers do not reproduce the objective")
    dual_obj = sum((duals[i] * cons[i].rhs for i in duals if duals[i]), Fraction(0))
    if dual_obj != objective:
        raise SolverError(f"duality gap: primal {objective} vs dual {dual_obj}")
    for idx, c in enumerate(cons):
        lhs = sum((a * values[v] for v, a in c.coeffs.items()), Fraction(0))
        if (c.relation == "=" and lhs != c.rhs) or (c.relation == ">=" and lhs < c.rhs):
            raise SolverError(f"primal solution violates {c.tag}")
    return RationalSolution(objective, values, duals, res.iterations)


def shannon_bound(g: LabeledGraph, mode: str = WORST) -> Fraction:
    return solve(build_lp(g, mode)).objective_value


def _tag_instance(tag: tuple, n: int, y: Fraction):
    """Certificate instance for an LP row with multiplier y (sign applied)."""
    kind = tag[0]
    sign = 1 if y > 0 else -1
    full = (1 << (n + 1)) - 1
    if kind == "empty":
        return InequalityInstance(EMPTY_ZERO, (), sign)
    if kind == "secret":
        return InequalityInstance(SECRET_UNIT, (), sign)
    if kind == "mono":
        return InequalityInstance(MONOTONICITY, (full ^ (1 << tag[1]), full))
    if kind == "submod":
        _, i, j, K = tag
        return InequalityInstance(SUBMODULARITY, (K | 1 << i, K | 1 << j))
    if kind == "qualified":
        return InequalityInstance(QUALIFIED, (tag[1],), sign)
    if kind == "unqualified":
        return InequalityInstance(UNQUALIFIED, (tag[1],), sign)
    raise ValueError(f"no certificate instance for row {tag}")


def extract_dual_certificate(lp: EntropyLP, sol: RationalSolution) -> Certificate:
    """Re-express the LP optimum as a checkable certificate.

    The multipliers on the rows ``t >= f(v)`` become the target weights, so
    the certificate reads ``sum_v w_v f(v) >= optimum`` with the weights
    summing to one (worst case) or all equal to 1/n (average case).
    """
    if lp.secret_entropy != 1:
        raise ValueError("certificates assume f(s) = 1")
    cons = lp.constraints
    steps = []
    target: dict = {}
    for idx, y in sorted(sol.dual_values.items()):
        if not y:
            continue
        c = cons[idx]
        if c.relation == ">=" and y < 0:
            raise SolverError(f"negative multiplier on inequality {c.tag}")
        if c.tag[0] == "bound":
            target[1 << c.tag[1]] = target.get(1 << c.tag[1], 0) + y
            continue
        steps.append((_tag_instance(c.tag, lp.graph.n, y), abs(y)))
    if lp.mode == AVERAGE:
        target = dict(lp.objective)
    dual_obj = sum((y * cons[i].rhs for i, y in sol.dual_values.items() if y), Fraction(0))
    if dual_obj != sol.objective_value:
        raise SolverError(f"duality gap: {dual_obj} vs {sol.objective_value}")
    cert = Certificate(lp.graph, steps, LinearExpr(target), sol.objective_value,
                       extended=True, name=f"lp dual ({lp.mode})")
    verdict = check(cert)
    if not verdict:
        raise SolverError(f"dual certificate does not check: {verdict}")
    return cert


# -- output ------------------------------------------------------------------

def lp_text(lp: EntropyLP) -> str:
    """The LP in a CPLEX-like text format, variables named f_<bitmask>."""
    def term_str(coeffs):
        parts = []
        for v, a in sorted(coeffs.items()):
            a = Fraction(a)
            sign = "-" if a < 0 else "+"
            mag = abs(a)
            coef = "" if mag == 1 else f"{mag} "
            parts.append(f"{sign} {coef}{lp.var_name(v)}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else s
    lines = ["Minimize", f" obj: {term_str(lp.objective)}", "Subject To"]
    for k, c in enumerate(lp.constraints):
        lines.append(f" c{k}: {term_str(c.coeffs)} {c.relation} {c.rhs}")
    lines.append("Bounds")
    for v in range(lp.num_vars):
        lines.append(f" {lp.var_name(v)} free")
    lines.append("End")
    return "\n".join(lines) + "\n"


def solution_to_dict(lp: EntropyLP, sol: RationalSolution) -> dict:
    return {
        "mode": lp.mode,
        "objective": str(sol.objective_value),
        "values": {lp.var_name(v): str(x) for v, x in sorted(sol.variable_values.items())},
        "duals": {str(i): str(y) for i, y in sorted(sol.dual_values.items()) if y},
    }


def dumps_solution(lp: EntropyLP, sol: RationalSolution) -> str:
    return json.dumps(solution_to_dict(lp, sol), indent=1, sort_keys=True) + "\n"
