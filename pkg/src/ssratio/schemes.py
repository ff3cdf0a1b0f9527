"""Linear star-decomposition schemes over GF(q) and their exact verification.

Every vertex v of positive degree centres a star with fresh randomness r_v.
The centre holds r_v, and each leaf holds r_v + c_v, where
c_v = s_1 + x_v * s_2 is one evaluation of the secret (s_1, s_2) read as a
degree-1 polynomial.  A vertex therefore owns deg(v) + 1 rows.  An edge uv
learns c_u and c_v, which give back the secret when x_u != x_v.  An
independent set only ever sees r_v or r_v + c_v from each star, which is
uniform whatever the secret is.

Share entropies of a linear scheme with uniform inputs are GF(q) ranks in
q-ary units, so ratios are rank / 2.  ``exhaustive_entropies`` recomputes
them by brute force as an independent check.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import gmpy2
import numpy as np

from .graphs import LabeledGraph, bits, maximal_independent_set_masks, MAX_MIS_VERTICES

SECRET = "s"  # marks the secret in subsets passed to exhaustive_entropies
MAX_STATES = 10 ** 7
MAX_MODULUS = 1 << 31  # keeps products of residues inside int64


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2 or not gmpy2.is_prime(self.q):
            raise SchemeError(f"field modulus must be prime, got {self.q!r}")
        if self.q >= MAX_MODULUS:
            raise SchemeError(f"field modulus must be below 2^31, got {self.q}")


def next_prime_at_least(n: int) -> int:
    return 2 if n <= 2 else int(gmpy2.next_prime(n - 1))


@dataclass(frozen=True)
class StarCover:
    stars: tuple  # (centre, leaves) pairs
    evaluation_points: tuple  # one field element per star


@dataclass
class LinearScheme:
    field: PrimeField
    secret_dim: int
    randomness_dim: int
    matrix: np.ndarray  # rows x (secret_dim + randomness_dim), entries in [0, q)
    participant_index: dict  # vertex -> (start, stop) row range
    cover: StarCover | None = None

    def __post_init__(self):
        width = self.secret_dim + self.randomness_dim
        if self.matrix.ndim != 2 or self.matrix.shape[1] != width:
            raise SchemeError(f"rows must have length {width}")
        if self.matrix.size and not np.all(self.matrix.any(axis=1)):
            raise SchemeError("participant rows must be nonzero")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def participants(self) -> list:
        return sorted(self.participant_index)

    def rows_of(self, vertices: Iterable[int]) -> np.ndarray:
        idx: list = []
        for v in sorted(set(vertices)):
            if v not in self.participant_index:
                raise SchemeError(f"vertex {v} is not a participant")
            a, b = self.participant_index[v]
            idx.extend(range(a, b))
        return self.matrix[idx]


def _as_vertices(a) -> list:
    return bits(a) if isinstance(a, int) else list(a)


# -- linear algebra over GF(q) ----------------------------------------------

def _pivot_columns(m: np.ndarray, q: int) -> list:
    """Pivot columns of the row echelon form of m over GF(q), left to right."""
    m = np.array(m, dtype=np.int64) % q
    rows, cols = m.shape
    r = 0
    pivots = []
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        inv = pow(int(m[r, c]), -1, q)
        m[r] = m[r] * inv % q
        below = m[r + 1:, c]
        if below.any():
            m[r + 1:] = (m[r + 1:] - below[:, None] * m[r]) % q
        pivots.append(c)
        r += 1
    return pivots


def rank_mod_p(m: np.ndarray, q: int) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return len(_pivot_columns(m, q))


def _split_ranks(s: LinearScheme, vertices) -> tuple[int, int]:
    """(rank of the randomness columns, rank of all columns) for the rows."""
    rows = s.rows_of(vertices)
    if rows.shape[0] == 0:
        return 0, 0
    lam = s.secret_dim
    # randomness columns first, so the pivots that land there count rank(R)
    reordered = np.concatenate([rows[:, lam:], rows[:, :lam]], axis=1)
    piv = _pivot_columns(reordered, s.q)
    r_rank = sum(1 for c in piv if c < s.randomness_dim)
    return r_rank, len(piv)


def is_determining(s: LinearScheme, a) -> bool:
    r_rank, full = _split_ranks(s, _as_vertices(a))
    return full == r_rank + s.secret_dim


def is_independent_of_secret(s: LinearScheme, a) -> bool:
    r_rank, full = _split_ranks(s, _as_vertices(a))
    return full == r_rank


# -- construction --------------------------------------------------------------

def _evaluation_points(g: LabeledGraph, centres: list, q: int) -> list:
    """Star index when the field is big enough, else a greedy proper colouring.

    Only stars with adjacent centres need distinct points.
    """
    if q >= len(centres):
        return list(range(len(centres)))
    point: dict = {}
    for v in centres:
        used = {point[u] for u in g.neighbors(v) if u in point}
        x = next(c for c in range(q + 1) if c not in used)
        if x >= q:
            raise SchemeError(f"GF({q}) has too few elements to separate adjacent stars")
        point[v] = x
    return [point[v] for v in centres]


def build_star_scheme(g: LabeledGraph, q: int) -> LinearScheme:
    """All-stars scheme with secret dimension 2; isolated vertices get no rows."""
    fld = PrimeField(q)
    centres = [v for v in range(g.n) if g.degree(v) > 0]
    if not centres:
        raise SchemeError("graph has no edges")
    xs = _evaluation_points(g, centres, q)
    col = {v: 2 + k for k, v in enumerate(centres)}
    xpt = dict(zip(centres, xs))
    width = 2 + len(centres)
    rows = []
    index = {}
    for u in range(g.n):
        start = len(rows)
        if u in col:
            centre = [0] * width
            centre[col[u]] = 1
            rows.append(centre)
            for w in g.neighbors(u):
                leaf = [0] * width
                leaf[col[w]] = 1
                leaf[0] = 1
                leaf[1] = xpt[w] % q
                rows.append(leaf)
        index[u] = (start, len(rows))
    cover = StarCover(tuple((v, tuple(g.neighbors(v))) for v in centres), tuple(xs))
    mat = np.array(rows, dtype=np.int64).reshape(len(rows), width)
    return LinearScheme(fld, 2, len(centres), mat, index, cover)


# -- verification ----------------------------------------------------------------

@dataclass
class PerfectnessReport:
    perfect: bool
    edges_checked: int
    independent_sets_checked: int
    sampled: bool
    violations: list = field(default_factory=list)  # (kind, sorted vertex list)

    def to_dict(self) -> dict:
        return {
            "perfect": self.perfect,
            "edges_checked": self.edges_checked,
            "independent_sets_checked": self.independent_sets_checked,
            "sampled": self.sampled,
            "violations": [{"kind": k, "set": list(v)} for k, v in self.violations],
        }


def random_maximal_independent_set(g: LabeledGraph, rng: random.Random) -> int:
    order = list(range(g.n))
    rng.shuffle(order)
    m = 0
    for v in order:
        if not g.adj[v] & m:
            m |= 1 << v
    return m


def verify_perfect(s: LinearScheme, g: LabeledGraph, sample_budget: int = 10_000,
                   seed: int = 0) -> PerfectnessReport:
    """Edges must determine the secret, maximal independent sets must not
    depend on it.  Both properties are monotone, so these sets suffice.

    Graphs above the enumeration limit are checked on ``sample_budget``
    random greedy maximal independent sets instead, and the report is
    flagged as sampled.
    """
    violations = []
    for u, v in g.sorted_edges():
        if not is_determining(s, [u, v]):
            violations.append(("edge not determining", [u, v]))
    sampled = g.n > MAX_MIS_VERTICES
    if sampled:
        rng = random.Random(seed)
        masks = sorted({random_maximal_independent_set(g, rng) for _ in range(sample_budget)})
        checked = sample_budget
    else:
        masks = maximal_independent_set_masks(g)
        checked = len(masks)
    for m in masks:
        if not is_independent_of_secret(s, m):
            violations.append(("independent set not secret-independent", bits(m)))
    return PerfectnessReport(not violations, len(g.edges), checked, sampled, violations)


def information_ratios(s: LinearScheme) -> tuple[list, Fraction, Fraction]:
    """Per-participant rank / secret dimension, with their max and mean."""
    ratios = [Fraction(rank_mod_p(s.rows_of([v]), s.q), s.secret_dim) for v in s.participants]
    return ratios, max(ratios), sum(ratios, Fraction(0)) / len(ratios)


def exhaustive_entropies(s: LinearScheme, subsets: list) -> dict:
    """Brute-force Shannon entropies (q-ary units) of share tuples.

    Enumerates every (secret, randomness) vector with equal probability.
    Subsets are iterables of vertex ids, optionally containing ``SECRET``.
    Keys of the result are frozensets.  A distribution that is uniform on
    q^k values reports the exact integer k.
    """
    q = s.q
    lam = s.secret_dim
    width = lam + s.randomness_dim
    total = q ** width
    if total > MAX_STATES:
        raise SchemeError(f"{q}^{width} states exceed the enumeration limit {MAX_STATES}")
    secret_rows = np.eye(lam, width, dtype=np.int64)
    out = {}
    for sub in subsets:
        key = frozenset(sub)
        parts = [s.rows_of([v for v in key if v != SECRET])]
        if SECRET in key:
            parts.append(secret_rows)
        rows = np.concatenate(parts, axis=0)
        out[key] = _entropy_of_linear_map(rows, q, width, total)
    return out


def _entropy_of_linear_map(rows: np.ndarray, q: int, width: int, total: int):
    if rows.shape[0] == 0:
        return 0
    powers = q ** np.arange(width, dtype=np.int64)
    counts: dict = {}
    chunk = 1 << 20
    packed = rows.shape[0] * math.log2(q) < 62
    weights = q ** np.arange(rows.shape[0], dtype=np.int64) if packed else None
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        states = (idx[:, None] // powers) % q
        shares = states @ rows.T % q
        if packed:
            keys, cnt = np.unique(shares @ weights, return_counts=True)
            keys = keys.tolist()
        else:
            uniq, cnt = np.unique(shares, axis=0, return_counts=True)
            keys = [tuple(r) for r in uniq.tolist()]
        for k, c in zip(keys, cnt.tolist()):
            counts[k] = counts.get(k, 0) + c
    vals = list(counts.values())
    support = len(vals)
    k = round(math.log(support, q))
    if q ** k == support and all(c == vals[0] for c in vals):
        return k
    return -sum(c / total * math.log(c / total, q) for c in vals)


# -- output --------------------------------------------------------------------

def scheme_to_dict(s: LinearScheme) -> dict:
    return {
        "modulus": s.q,
        "secret_dim": s.secret_dim,
        "randomness_dim": s.randomness_dim,
        "rows": s.matrix.tolist(),
        "participants": {str(v): list(r) for v, r in sorted(s.participant_index.items())},
        "evaluation_points": list(s.cover.evaluation_points) if s.cover else None,
    }


def scheme_from_dict(data: dict) -> LinearScheme:
    width = data["secret_dim"] + data["randomness_dim"]
    mat = np.array(data["rows"], dtype=np.int64).reshape(len(data["rows"]), width)
    index = {int(v): tuple(r) for v, r in data["participants"].items()}
    return LinearScheme(PrimeField(int(data["modulus"])), data["secret_dim"],
                        data["randomness_dim"], mat, index)


def dumps_scheme(s: LinearScheme) -> str:
    return json.dumps(scheme_to_dict(s), indent=1) + "\n"


def scheme_report(s: LinearScheme, g: LabeledGraph, report: PerfectnessReport | None = None) -> dict:
    if report is None:
        report = verify_perfect(s, g)
    ratios, mx, avg = information_ratios(s)
    return {
        "modulus": s.q,
        "verification": report.to_dict(),
        "ratios": {str(v): str(r) for v, r in zip(s.participants, ratios)},
        "max_ratio": str(mx),
        "average_ratio": str(avg),
    }
