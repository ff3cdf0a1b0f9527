"""Linear certificates for entropy lower bounds, with an exact checker.

A certificate is a list of inequality instances, each valid for every
normalized entropy function f of a perfect scheme on the host graph, with
nonnegative weights.  It proves ``target >= bound`` when the weighted sum of
the instances has exactly the target's f-part and a constant at least
``bound``.

Set parameters are bitmasks over the host vertex ids.  Certificates marked
``extended`` range over V + {s}, the secret being bit ``n``; they are what LP
duals produce, and they use the access-structure axioms QUALIFIED,
UNQUALIFIED and SECRET_UNIT in place of the strong inequalities.

The constructive builders follow the cube-with-pendants induction:
Lemma-1-style certificates bound sum_{v in C_d} f(v) - [[X_d, B_d, A_d]],
Lemma-2-style ones bound the bracket itself, and their sum bounds the total
entropy on the cube.  X_d is the chessboard class holding the even cube
vertices and the pendants of odd ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .expr import LinearExpr
from .graphs import (
    CubeStarView, LabeledGraph, StructureError, bits, build_cube_star,
    canonical_view, graph_from_dict, graph_to_dict, induced_cube_star_views,
    is_independent_mask, to_mask, _require_cube_star, _require_delta,
)

EMPTY_ZERO = "EMPTY_ZERO"
POSITIVITY = "POSITIVITY"
MONOTONICITY = "MONOTONICITY"
SUBMODULARITY = "SUBMODULARITY"
STRONG_MONOTONICITY = "STRONG_MONOTONICITY"
STRONG_SUBMODULARITY = "STRONG_SUBMODULARITY"
QUALIFIED = "QUALIFIED"
UNQUALIFIED = "UNQUALIFIED"
SECRET_UNIT = "SECRET_UNIT"

ARITY = {
    EMPTY_ZERO: 0, POSITIVITY: 1, MONOTONICITY: 2, SUBMODULARITY: 2,
    STRONG_MONOTONICITY: 2, STRONG_SUBMODULARITY: 2,
    QUALIFIED: 1, UNQUALIFIED: 1, SECRET_UNIT: 0,
}
# equalities, usable in either direction
TWO_SIDED = frozenset({EMPTY_ZERO, QUALIFIED, UNQUALIFIED, SECRET_UNIT})
EXTENDED_ONLY = frozenset({QUALIFIED, UNQUALIFIED, SECRET_UNIT})

MAX_BUILD_DIM = 12


class InvalidInstance(ValueError):
    """An inequality instance whose side conditions fail in the host graph."""


@dataclass(frozen=True)
class InequalityInstance:
    kind: str
    sets: tuple = ()
    sign: int = 1

    def __post_init__(self):
        if self.kind not in ARITY:
            raise InvalidInstance(f"unknown kind {self.kind!r}")
        if len(self.sets) != ARITY[self.kind]:
            raise InvalidInstance(f"{self.kind} takes {ARITY[self.kind]} sets, got {len(self.sets)}")
        if self.sign not in (1, -1):
            raise InvalidInstance("sign must be +1 or -1")
        if self.sign == -1 and self.kind not in TWO_SIDED:
            raise InvalidInstance(f"{self.kind} is one-sided; sign -1 not allowed")

    def __str__(self):
        args = ", ".join(f"{m:#x}" for m in self.sets)
        s = "-" if self.sign < 0 else ""
        return f"{s}{self.kind}({args})"


def submod(a: int, b: int) -> InequalityInstance:
    return InequalityInstance(SUBMODULARITY, (a, b))


def strong_submod(a: int, b: int) -> InequalityInstance:
    return InequalityInstance(STRONG_SUBMODULARITY, (a, b))


def strong_mono(a: int, b: int) -> InequalityInstance:
    return InequalityInstance(STRONG_MONOTONICITY, (a, b))


def empty_zero(sign: int = 1) -> InequalityInstance:
    return InequalityInstance(EMPTY_ZERO, (), sign)


def side_condition_error(inst: InequalityInstance, g: LabeledGraph,
                         extended: bool = False) -> str | None:
    """Reason the instance is not valid on g, or None when it is."""
    secret = 1 << g.n
    universe = g.full_mask | (secret if extended else 0)
    for m in inst.sets:
        if m < 0 or m & ~universe:
            return f"{inst}: set {m:#x} is not a subset of the ground set"
    if inst.kind in EXTENDED_ONLY and not extended:
        return f"{inst}: {inst.kind} needs the extended ground set"
    k = inst.kind
    if k == MONOTONICITY:
        a, b = inst.sets
        if a & ~b:
            return f"{inst}: first set is not contained in the second"
    elif k == STRONG_MONOTONICITY:
        a, b = inst.sets
        if (a | b) & secret:
            return f"{inst}: strong inequalities take participant sets only"
        if a & ~b:
            return f"{inst}: first set is not contained in the second"
        if not is_independent_mask(g, a):
            return f"{inst}: smaller set {a:#x} is not independent"
        if is_independent_mask(g, b):
            return f"{inst}: larger set {b:#x} is independent"
    elif k == STRONG_SUBMODULARITY:
        a, b = inst.sets
        if (a | b) & secret:
            return f"{inst}: strong inequalities take participant sets only"
        if is_independent_mask(g, a):
            return f"{inst}: first set {a:#x} is independent"
        if is_independent_mask(g, b):
            return f"{inst}: second set {b:#x} is independent"
        if not is_independent_mask(g, a & b):
            return f"{inst}: intersection {a & b:#x} is not independent"
    elif k in (QUALIFIED, UNQUALIFIED):
        (a,) = inst.sets
        if a & secret:
            return f"{inst}: set must not contain the secret"
        if k == QUALIFIED and is_independent_mask(g, a):
            return f"{inst}: set {a:#x} is independent"
        if k == UNQUALIFIED and not is_independent_mask(g, a):
            return f"{inst}: set {a:#x} is not independent"
    return None


def check_instance(inst: InequalityInstance, g: LabeledGraph, extended: bool = False) -> None:
    reason = side_condition_error(inst, g, extended)
    if reason:
        raise InvalidInstance(reason)


def instance_expr(inst: InequalityInstance, g: LabeledGraph,
                  extended: bool = False) -> tuple[LinearExpr, Fraction]:
    """``(lhs, c)`` such that the instance states ``lhs >= c``.

    Side conditions are checked first; a violation raises InvalidInstance.
    """
    check_instance(inst, g, extended)
    k = inst.kind
    s = inst.sign
    const = Fraction(0)
    if k == EMPTY_ZERO:
        e = LinearExpr.of((0, s))
    elif k == POSITIVITY:
        e = LinearExpr.of((inst.sets[0], 1))
    elif k in (MONOTONICITY, STRONG_MONOTONICITY):
        a, b = inst.sets
        e = LinearExpr.of((b, 1), (a, -1))
        if k == STRONG_MONOTONICITY:
            const = Fraction(1)
    elif k in (SUBMODULARITY, STRONG_SUBMODULARITY):
        a, b = inst.sets
        e = LinearExpr.of((a, 1), (b, 1), (a | b, -1), (a & b, -1))
        if k == STRONG_SUBMODULARITY:
            const = Fraction(1)
    elif k in (QUALIFIED, UNQUALIFIED):
        (a,) = inst.sets
        e = LinearExpr.of((a | (1 << g.n), s), (a, -s))
        if k == UNQUALIFIED:
            const = Fraction(s)
    else:  # SECRET_UNIT
        e = LinearExpr.of((1 << g.n, s))
        const = Fraction(s)
    return e, const


def bracket(X, B, A) -> LinearExpr:
    """[[X, B, A]] = sum_{b in B} f(X + b) - sum_{a in A} f(X - a).

    Sets are bitmasks or iterables of vertex ids; A must lie inside X.
    """
    X, B, A = (m if isinstance(m, int) else to_mask(m) for m in (X, B, A))
    if A & ~X:
        raise ValueError("bracket needs A to be a subset of X")
    pairs = [(X | (1 << b), 1) for b in bits(B)]
    pairs += [(X & ~(1 << a), -1) for a in bits(A)]
    return LinearExpr.of(*pairs)


# -- certificates ------------------------------------------------------------

@dataclass
class Certificate:
    graph: LabeledGraph
    steps: list  # (InequalityInstance, Fraction) pairs
    target: LinearExpr  # f-part; the claim is target >= bound
    bound: Fraction
    extended: bool = False
    name: str = ""

    def __len__(self):
        return len(self.steps)


@dataclass
class Verdict:
    valid: bool
    reason: str | None = None
    step: int | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.valid

    def __str__(self):
        if self.valid:
            return "valid"
        where = f" (step {self.step})" if self.step is not None else ""
        return f"invalid{where}: {self.reason}"


def combine(cert: Certificate) -> tuple[LinearExpr, Fraction]:
    """Weighted sum of the step inequalities, without any checks."""
    acc: dict = {}
    const = Fraction(0)
    g, ext = cert.graph, cert.extended
    for inst, coeff in cert.steps:
        e, c = instance_expr(inst, g, ext)
        e.add_to(acc, coeff)
        const += coeff * c
    return LinearExpr(acc), const


def check(cert: Certificate) -> Verdict:
    """Exact verdict on a certificate; diagnostics name the first problem."""
    g, ext = cert.graph, cert.extended
    acc: dict = {}
    const = Fraction(0)
    for i, (inst, coeff) in enumerate(cert.steps):
        try:
            coeff = Fraction(coeff)
        except (TypeError, ValueError):
            return Verdict(False, f"coefficient {coeff!r} is not rational", i)
        if coeff < 0:
            return Verdict(False, f"negative coefficient {coeff} on {inst}", i)
        reason = side_condition_error(inst, g, ext)
        if reason:
            return Verdict(False, f"side condition: {reason}", i)
        e, c = instance_expr(inst, g, ext)
        e.add_to(acc, coeff)
        const += coeff * c
    target = cert.target.terms
    for mask in sorted(set(acc) | set(target)):
        got, want = acc.get(mask, Fraction(0)), target.get(mask, Fraction(0))
        if got != want:
            return Verdict(False, f"coefficient mismatch on f[{mask:#x}]: steps give {got}, "
                                  f"target has {want}",
                           details={"mask": mask, "steps": got, "target": want})
    if const < cert.bound:
        return Verdict(False, f"constant {const} is below the target bound {cert.bound}",
                       details={"constant": const})
    return Verdict(True, details={"constant": const, "steps": len(cert.steps)})


def implied_bound(cert: Certificate) -> Fraction:
    """Lower bound on the weighted mean of singleton entropies.

    The target must be a nonnegative combination of singletons; a mean
    with these weights is at most the maximum, and for the all-ones target
    over every vertex it is the average itself.
    """
    total = Fraction(0)
    for mask, c in cert.target.terms.items():
        if mask & (mask - 1) or mask >> cert.graph.n or c < 0:
            raise ValueError("target is not a nonnegative combination of singletons")
        total += c
    if not total:
        raise ValueError("empty target")
    return cert.bound / total


def covers_all_vertices_uniformly(cert: Certificate) -> bool:
    t = cert.target.terms
    vals = {t.get(1 << v) for v in range(cert.graph.n)}
    return len(t) == cert.graph.n and len(vals) == 1 and None not in vals


# -- cube-with-pendants builders ----------------------------------------------

def _parity(c: int) -> int:
    return bin(c).count("1") & 1


def _x_mask(view: CubeStarView, base: int, k: int) -> int:
    """X for the subcube of coordinates base .. base + 2^k - 1."""
    m = 0
    for c in range(base, base + (1 << k)):
        m |= 1 << (view.cube[c] if _parity(c) == 0 else view.pendant[c])
    return m


def _subcube_masks(view: CubeStarView, base: int, k: int) -> tuple[int, int, int]:
    """(X, B, A) masks of the subcube: B odd and A even cube vertices."""
    X = _x_mask(view, base, k)
    A = B = 0
    for c in range(base, base + (1 << k)):
        if _parity(c):
            B |= 1 << view.cube[c]
        else:
            A |= 1 << view.cube[c]
    return X, B, A


def _view_for(d, g, view):
    if view is None:
        if g is None:
            g = build_cube_star(d)
        view = canonical_view(g)
    elif g is None:
        raise StructureError("a view needs its host graph")
    if view.d != d:
        raise StructureError(f"view has dimension {view.d}, expected {d}")
    if not 1 <= d <= MAX_BUILD_DIM:
        raise StructureError(f"builders support 1 <= d <= {MAX_BUILD_DIM}")
    return g, view


def _add(steps, g, inst, coeff=1):
    check_instance(inst, g)
    steps.append((inst, Fraction(coeff)))


def _lemma1_base(g, view, base, steps):
    c0, c1 = base, base + 1
    a, b = (c0, c1) if _parity(c0) == 0 else (c1, c0)
    A, B, x = 1 << view.cube[a], 1 << view.cube[b], 1 << view.pendant[b]
    # f(a) + f(b) + f(x) - f(abx) >= 1; the qualified pair ab, bx meets in b
    _add(steps, g, strong_submod(A | B, B | x))
    _add(steps, g, submod(A, B))
    _add(steps, g, submod(B, x))
    _add(steps, g, empty_zero())
    _add(steps, g, empty_zero())


def lemma1_blocks(g: LabeledGraph, view: CubeStarView, base: int, k: int) -> list:
    """Steps joining the two k-subcubes at ``base`` along coordinate bit k.

    One block of four instances per matching edge (b, a') with b odd in
    either half; the blocks sum to
    [[X, B, A]] + [[X', B', A']] - [[X_{k+1}, B_{k+1}, A_{k+1}]] >= 2^k.
    """
    steps: list = []
    half = 1 << k
    X = _x_mask(view, base, k)
    Xp = _x_mask(view, base + half, k)
    for own_base, own_X, other_X in ((base, X, Xp), (base + half, Xp, X)):
        for c in range(own_base, own_base + half):
            if not _parity(c):
                continue
            b = 1 << view.cube[c]
            ap = 1 << view.cube[c ^ half]  # matched partner in the other half
            a = 1 << view.cube[c ^ 1]  # a neighbour of b in its own half
            both = own_X | other_X
            _add(steps, g, submod(b | own_X, both & ~ap))
            _add(steps, g, strong_submod(b | other_X, (a | b | other_X) & ~ap))
            _add(steps, g, submod(other_X, (b | other_X) & ~ap))
            _add(steps, g, submod(a | b | other_X, (b | both) & ~ap))
    return steps


def _lemma1_steps(g, view, base, k, steps):
    if k == 1:
        _lemma1_base(g, view, base, steps)
        return
    _lemma1_steps(g, view, base, k - 1, steps)
    _lemma1_steps(g, view, base + (1 << (k - 1)), k - 1, steps)
    steps.extend(lemma1_blocks(g, view, base, k - 1))


def _cube_sum(view: CubeStarView) -> LinearExpr:
    return LinearExpr.of(*((1 << v, 1) for v in view.cube))


def build_lemma1(d: int, g: LabeledGraph | None = None,
                 view: CubeStarView | None = None) -> Certificate:
    """sum_{v in C_d} f(v) - [[X_d, B_d, A_d]] >= d * 2^(d-1)."""
    g, view = _view_for(d, g, view)
    steps: list = []
    _lemma1_steps(g, view, 0, d, steps)
    X, B, A = _subcube_masks(view, 0, d)
    target = _cube_sum(view) - bracket(X, B, A)
    return Certificate(g, steps, target, Fraction(d * (1 << (d - 1))), name=f"lemma1(d={d})")


def build_lemma2(d: int, g: LabeledGraph | None = None,
                 view: CubeStarView | None = None) -> Certificate:
    """[[X_d, B_d, A_d]] >= 2^d, one block per bit-0 matching pair (a, b)."""
    g, view = _view_for(d, g, view)
    X, B, A = _subcube_masks(view, 0, d)
    steps: list = []
    for c in range(1 << d):
        if _parity(c):
            continue
        a = 1 << view.cube[c]
        b = 1 << view.cube[c ^ 1]
        y = 1 << view.pendant[c]
        _add(steps, g, strong_mono(X, b | X))
        _add(steps, g, strong_mono((y | X) & ~a, y | X))
        _add(steps, g, submod((y | X) & ~a, X))
    return Certificate(g, steps, bracket(X, B, A), Fraction(1 << d), name=f"lemma2(d={d})")


def build_lemma3(d: int, g: LabeledGraph | None = None,
                 view: CubeStarView | None = None) -> Certificate:
    """sum_{v in C_d} f(v) >= (d + 2) * 2^(d-1)."""
    g, view = _view_for(d, g, view)
    l1 = build_lemma1(d, g, view)
    l2 = build_lemma2(d, g, view)
    return Certificate(g, l1.steps + l2.steps, l1.target + l2.target,
                       l1.bound + l2.bound, name=f"lemma3(d={d})")


def build_theorem_worst(d: int, g: LabeledGraph | None = None) -> tuple[Certificate, Fraction]:
    """Lemma 3 on C*_d; the largest cube share is at least the cube mean."""
    if g is None:
        g = build_cube_star(d)
    elif _require_cube_star(g) != d:
        raise StructureError(f"graph is not C*_{d}")
    cert = build_lemma3(d, g, canonical_view(g))
    cert.name = f"theorem_worst(d={d})"
    return cert, implied_bound(cert)


def build_theorem_average(d: int, D: LabeledGraph) -> tuple[Certificate, Fraction]:
    """Three Lemma 3 certificates, one per cube of D_d with its pendants."""
    if _require_delta(D) != d:
        raise StructureError(f"graph is not a D_{d}")
    steps: list = []
    target = LinearExpr()
    bound = Fraction(0)
    for view in induced_cube_star_views(D):
        c = build_lemma3(d, D, view)
        steps += c.steps
        target = target + c.target
        bound += c.bound
    cert = Certificate(D, steps, target, bound, name=f"theorem_average(d={d})")
    if not covers_all_vertices_uniformly(cert):
        raise StructureError("cube views do not cover the graph")
    return cert, implied_bound(cert)


def literal_base_case(g: LabeledGraph | None = None) -> Certificate:
    """Base case of the cube induction as first stated on C*_1.

    Uses strong submodularity on {a, b} and {a, x}, where {a, x} is
    independent.  That inequality is not valid for perfect schemes (see
    ``tests/test_certificates.py``), so the checker rejects this certificate.
    """
    if g is None:
        g = build_cube_star(1)
    view = canonical_view(g)
    if view.d != 1:
        raise StructureError("literal base case lives on C*_1")
    a, b, x = 1 << view.cube[0], 1 << view.cube[1], 1 << view.pendant[1]
    steps = [
        (submod(a, b), Fraction(1)),
        (submod(a, x), Fraction(1)),
        (strong_submod(a | b, a | x), Fraction(1)),
        (empty_zero(), Fraction(1)),
        (empty_zero(), Fraction(1)),
    ]
    target = LinearExpr.of((a, 1), (b, 1), (a | b | x, -1), (x, 1))
    return Certificate(g, steps, target, Fraction(1), name="lemma1 literal base case")


# -- JSON ----------------------------------------------------------------------

def certificate_to_dict(cert: Certificate, graph_ref=None) -> dict:
    """Masks are decimal integers, bit i standing for vertex id i.

    In extended certificates bit n stands for the secret.  ``graph_ref``
    replaces the inline graph by a file path.
    """
    steps = []
    for inst, coeff in cert.steps:
        item = {"kind": inst.kind, "sets": list(inst.sets), "coeff": str(Fraction(coeff))}
        if inst.sign != 1:
            item["sign"] = inst.sign
        steps.append(item)
    return {
        "graph": graph_ref if graph_ref is not None else graph_to_dict(cert.graph),
        "extended": cert.extended,
        "name": cert.name,
        "steps": steps,
        "target": {
            "terms": {str(m): str(c) for m, c in sorted(cert.target.terms.items())},
            "bound": str(cert.bound),
        },
    }


def certificate_from_dict(data: dict, graph: LabeledGraph | None = None) -> Certificate:
    if graph is None:
        ref = data["graph"]
        if isinstance(ref, str):
            from .graphs import read_graph
            graph = read_graph(ref)
        else:
            graph = graph_from_dict(ref)
    steps = [(InequalityInstance(s["kind"], tuple(int(m) for m in s["sets"]), int(s.get("sign", 1))),
              Fraction(s["coeff"])) for s in data["steps"]]
    t = data["target"]
    target = LinearExpr({int(m): Fraction(c) for m, c in t["terms"].items()})
    return Certificate(graph, steps, target, Fraction(t["bound"]),
                       bool(data.get("extended", False)), data.get("name", ""))


def dumps_certificate(cert: Certificate, graph_ref=None) -> str:
    return json.dumps(certificate_to_dict(cert, graph_ref), indent=1) + "\n"


def loads_certificate(text: str, graph: LabeledGraph | None = None) -> Certificate:
    return certificate_from_dict(json.loads(text), graph)


def evaluate_instances(insts: Iterable[InequalityInstance], g: LabeledGraph, f,
                       extended: bool = False) -> list:
    """Slack ``lhs - c`` of each instance under the set function f."""
    out = []
    for inst in insts:
        e, c = instance_expr(inst, g, extended)
        out.append(e.evaluate(f) - c)
    return out
