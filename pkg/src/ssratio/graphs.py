"""Labeled graphs for the hypercube families.

Three constructions are provided, all with stable vertex numbering:

* ``build_hypercube(d)``: vertex ``c`` is the cube vertex with integer
  coordinate ``c``.
* ``build_cube_star(d)``: cube vertices ``0 .. 2^d-1`` followed by pendants;
  pendant ``2^d + c`` hangs off cube vertex ``c``.
* ``build_delta(d, ...)``: three cube copies, copy ``i`` occupying ids
  ``i*2^d .. (i+1)*2^d - 1``, joined by 1-factors from the even-parity class
  of copy ``i`` to the odd-parity class of copy ``i+1 (mod 3)``.

Even-parity cube vertices form the ``A`` class, odd-parity ones the ``B``
class.  Vertex sets are passed around as Python ``int`` bitmasks internally.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

MAX_DIM = 16
MAX_MIS_VERTICES = 24


class GraphError(ValueError):
    """Bad parameter for a graph operation."""


class StructureError(ValueError):
    """Graph does not have the construction an operation expects."""


@dataclass(frozen=True)
class VertexLabel:
    kind: str  # "cube", "pendant" or "plain" (hand-entered graphs)
    copy: int | None = None
    coord: str | None = None


PLAIN = VertexLabel("plain")


def _norm_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class LabeledGraph:
    n: int
    edges: frozenset
    labels: tuple
    adj: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise GraphError("vertex count must be nonnegative")
        if len(self.labels) != self.n:
            raise GraphError(f"expected {self.n} labels, got {len(self.labels)}")
        adj = [0] * self.n
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u},{v}) out of range for n={self.n}")
            if u > v:
                raise GraphError(f"edge ({u},{v}) not normalized")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        object.__setattr__(self, "adj", tuple(adj))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, labels: Sequence | None = None) -> "LabeledGraph":
        es = set()
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            e = _norm_edge(int(u), int(v))
            if e in es:
                raise GraphError(f"duplicate edge {e}")
            es.add(e)
        if labels is None:
            labels = [PLAIN] * n
        return cls(n, frozenset(es), tuple(labels))

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def degrees(self) -> list[int]:
        return [a.bit_count() for a in self.adj]

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    def neighbors(self, v: int) -> list[int]:
        return bits(self.adj[v])

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def dimension(self) -> int | None:
        for lab in self.labels:
            if lab.coord is not None:
                return len(lab.coord)
        return None

    def family(self) -> str:
        """Infer which construction produced the labels ("file" if none)."""
        kinds = {lab.kind for lab in self.labels}
        if not self.labels or kinds - {"cube", "pendant"}:
            return "file"
        if "pendant" in kinds:
            return "cube_star"
        if all(lab.copy is not None for lab in self.labels):
            return "delta"
        return "hypercube"

    def induced(self, mask: int) -> set[tuple[int, int]]:
        return {e for e in self.edges if mask >> e[0] & 1 and mask >> e[1] & 1}


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def to_mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def _check_dim(d) -> int:
    if isinstance(d, bool) or not isinstance(d, int):
        raise GraphError(f"dimension must be an integer, got {d!r}")
    if not 1 <= d <= MAX_DIM:
        raise GraphError(f"dimension {d} outside 1..{MAX_DIM}")
    return d


def _coord(c: int, d: int) -> str:
    return format(c, f"0{d}b")


def _parity(c: int) -> int:
    return c.bit_count() & 1


def _cube_edges(d: int, offset: int = 0) -> list[tuple[int, int]]:
    return [(offset + c, offset + (c | 1 << k))
            for c in range(1 << d) for k in range(d) if not c >> k & 1]


def build_hypercube(d: int) -> LabeledGraph:
    _check_dim(d)
    labels = tuple(VertexLabel("cube", None, _coord(c, d)) for c in range(1 << d))
    return LabeledGraph(1 << d, frozenset(_cube_edges(d)), labels)


def build_cube_star(d: int) -> LabeledGraph:
    """Hypercube plus one pendant per cube vertex (the graph C*_d)."""
    _check_dim(d)
    size = 1 << d
    edges = _cube_edges(d) + [(c, size + c) for c in range(size)]
    labels = tuple([VertexLabel("cube", None, _coord(c, d)) for c in range(size)]
                   + [VertexLabel("pendant", None, _coord(c, d)) for c in range(size)])
    return LabeledGraph(2 * size, frozenset(edges), labels)


def parity_classes(d: int) -> tuple[list[int], list[int]]:
    """Sorted even- and odd-parity coordinates of the d-cube."""
    even = [c for c in range(1 << d) if not _parity(c)]
    odd = [c for c in range(1 << d) if _parity(c)]
    return even, odd


def delta_permutations(d: int, seed: int = 0) -> tuple[tuple[int, ...], ...]:
    """Three permutations of range(2^(d-1)); seed 0 gives identities."""
    half = 1 << (d - 1)
    if seed == 0:
        return tuple(tuple(range(half)) for _ in range(3))
    rng = random.Random(seed)
    perms = []
    for _ in range(3):
        p = list(range(half))
        rng.shuffle(p)
        perms.append(tuple(p))
    return tuple(perms)


def build_delta(d: int, matching_seed: int | Sequence[Sequence[int]] = 0) -> LabeledGraph:
    """A member of the family Delta_d.

    ``matching_seed`` is either an integer seed or three explicit permutations.
    Permutation ``i`` sends the k-th even coordinate of copy ``i`` to the
    ``perm[k]``-th odd coordinate of copy ``i+1 (mod 3)``.
    """
    _check_dim(d)
    half = 1 << (d - 1)
    if isinstance(matching_seed, int) and not isinstance(matching_seed, bool):
        perms = delta_permutations(d, matching_seed)
    else:
        perms = tuple(tuple(int(x) for x in p) for p in matching_seed)
        if len(perms) != 3:
            raise GraphError("need exactly three permutations")
        for p in perms:
            if sorted(p) != list(range(half)):
                raise GraphError(f"not a permutation of range({half}): {p}")
    size = 1 << d
    even, odd = parity_classes(d)
    edges = []
    for i in range(3):
        edges += _cube_edges(d, i * size)
        j = (i + 1) % 3
        for k, pk in enumerate(perms[i]):
            edges.append(_norm_edge(i * size + even[k], j * size + odd[pk]))
    labels = tuple(VertexLabel("cube", i, _coord(c, d)) for i in range(3) for c in range(size))
    return LabeledGraph(3 * size, frozenset(edges), labels)


def _require_cube_star(g: LabeledGraph) -> int:
    d = g.dimension()
    if g.family() != "cube_star" or d is None or g.n != 2 << d:
        raise StructureError("expected a C*_d graph from build_cube_star")
    if g.edges != build_cube_star(d).edges:
        raise StructureError("edge set differs from the canonical C*_d")
    return d


def _require_delta(g: LabeledGraph) -> int:
    d = g.dimension()
    if g.family() != "delta" or d is None or g.n != 3 << d:
        raise StructureError("expected a D_d graph from build_delta")
    size = 1 << d
    for v, lab in enumerate(g.labels):
        if lab.copy != v // size or int(lab.coord, 2) != v % size:
            raise StructureError(f"vertex {v} carries a non-canonical label")
    cube = {e for i in range(3) for e in _cube_edges(d, i * size)}
    if not cube <= g.edges:
        raise StructureError("cube copies are incomplete")
    for u, v in g.edges - cube:
        cu, cv = u // size, v // size
        au, av = u % size, v % size
        if (cv - cu) % 3 == 1:
            ok = not _parity(au) and _parity(av)
        elif (cu - cv) % 3 == 1:
            ok = not _parity(av) and _parity(au)
        else:
            ok = False
        if not ok:
            raise StructureError(f"edge ({u},{v}) is not an A(i)-B(i+1) matching edge")
    if any(deg != d + 1 for deg in g.degrees()):
        raise StructureError("matchings are not 1-factors")
    return d


@dataclass(frozen=True)
class ChessboardSplit:
    side_x: frozenset
    side_y: frozenset


def chessboard_split(g: LabeledGraph, scope: Iterable[int] | None = None) -> ChessboardSplit:
    """X/Y split of a C*_d, or A/B split of one cube copy of a D_d.

    For C*_d: X = even cube vertices plus the pendants of odd cube vertices.
    For a cube copy inside D_d: side_x is the even (A) class.
    """
    scope_set = set(range(g.n)) if scope is None else set(scope)
    fam = g.family()
    if fam == "cube_star":
        d = _require_cube_star(g)
        if scope_set != set(range(g.n)):
            raise StructureError("scope must be the whole C*_d vertex set")
        size = 1 << d
        xs = {c for c in range(size) if not _parity(c)} | {size + c for c in range(size) if _parity(c)}
        return ChessboardSplit(frozenset(xs), frozenset(scope_set - xs))
    if fam == "delta":
        d = _require_delta(g)
        size = 1 << d
        for i in range(3):
            if scope_set == set(range(i * size, (i + 1) * size)):
                xs = {v for v in scope_set if not _parity(v % size)}
                return ChessboardSplit(frozenset(xs), frozenset(scope_set - xs))
        raise StructureError("scope must be exactly one cube copy of D_d")
    if fam == "hypercube":
        d = g.dimension()
        if scope_set != set(range(g.n)):
            raise StructureError("scope must be the whole cube")
        xs = {c for c in range(1 << d) if not _parity(c)}
        return ChessboardSplit(frozenset(xs), frozenset(scope_set - xs))
    raise StructureError("graph has no construction labels")


@dataclass(frozen=True)
class Matching:
    pairs: frozenset  # normalized (u, v) pairs

    def validate(self, g: LabeledGraph) -> None:
        seen: set = set()
        for u, v in self.pairs:
            if (u, v) not in g.edges:
                raise StructureError(f"matching pair ({u},{v}) is not an edge")
            if u in seen or v in seen:
                raise StructureError(f"vertex of ({u},{v}) is matched twice")
            seen.update((u, v))


def pendant_matching(g: LabeledGraph) -> Matching:
    """Cube vertex to pendant 1-factor of a C*_d."""
    d = _require_cube_star(g)
    size = 1 << d
    return Matching(frozenset((c, size + c) for c in range(size)))


def cube_matching(g: LabeledGraph, k: int, copy: int = 0) -> Matching:
    """Perfect matching of one cube (copy) along coordinate bit k."""
    d = g.dimension()
    if d is None or not 0 <= k < d:
        raise GraphError(f"coordinate bit {k} out of range")
    off = copy << d
    return Matching(frozenset((off + c, off + (c | 1 << k)) for c in range(1 << d) if not c >> k & 1))


def delta_matchings(g: LabeledGraph) -> list[Matching]:
    """The three 1-factors A(i) -> B(i+1) of a D_d, indexed by i."""
    d = _require_delta(g)
    size = 1 << d
    out = [set(), set(), set()]
    for u, v in g.edges:
        cu, cv = u // size, v // size
        if cu != cv:
            i = cu if (cv - cu) % 3 == 1 else cv
            out[i].add((u, v))
    return [Matching(frozenset(p)) for p in out]


@dataclass(frozen=True)
class CubeStarView:
    """A copy of C*_d sitting inside a host graph.

    ``cube[c]`` / ``pendant[c]`` give host ids of the cube vertex with
    coordinate ``c`` and of its pendant.
    """
    d: int
    cube: tuple
    pendant: tuple

    @property
    def scope(self) -> frozenset:
        return frozenset(self.cube) | frozenset(self.pendant)

    def from_canonical(self) -> tuple:
        return tuple(self.cube) + tuple(self.pendant)

    def to_canonical(self) -> dict:
        return {h: k for k, h in enumerate(self.from_canonical())}


def canonical_view(g: LabeledGraph) -> CubeStarView:
    d = _require_cube_star(g)
    size = 1 << d
    return CubeStarView(d, tuple(range(size)), tuple(range(size, 2 * size)))


def induced_cube_star_views(g: LabeledGraph) -> list[CubeStarView]:
    """The three induced C*_d copies C(i) + B(i+1) + A(i+2) of a D_d."""
    if g.family() != "delta":
        raise StructureError("graph lacks D_d construction labels")
    d = _require_delta(g)
    size = 1 << d
    views = []
    for i in range(3):
        cube = tuple(i * size + c for c in range(size))
        pend = []
        for c in range(size):
            v = i * size + c
            # even vertices hang off B(i+1), odd ones off A(i-1)
            other = (i + 1) % 3 if not _parity(c) else (i - 1) % 3
            (u,) = [w for w in g.neighbors(v) if w // size == other]
            pend.append(u)
        views.append(CubeStarView(d, cube, tuple(pend)))
    return views


def is_independent_mask(g: LabeledGraph, mask: int) -> bool:
    m = mask
    while m:
        low = m & -m
        if g.adj[low.bit_length() - 1] & mask:
            return False
        m ^= low
    return True


def is_independent(g: LabeledGraph, a: Iterable[int] | int) -> bool:
    if isinstance(a, int):
        mask = a
        if mask < 0 or mask >> g.n:
            raise GraphError("vertex mask out of range")
    else:
        a = list(a)
        for v in a:
            if not 0 <= v < g.n:
                raise GraphError(f"vertex {v} out of range")
        mask = to_mask(a)
    return is_independent_mask(g, mask)


def maximal_independent_set_masks(g: LabeledGraph) -> list[int]:
    """Maximal independent sets as bitmasks (Bron-Kerbosch on the complement)."""
    if g.n > MAX_MIS_VERTICES:
        raise GraphError(f"maximal independent set enumeration limited to {MAX_MIS_VERTICES} vertices")
    full = g.full_mask
    non_nbr = [full & ~g.adj[v] & ~(1 << v) for v in range(g.n)]
    out = []

    def expand(r: int, p: int, x: int):
        if not p and not x:
            out.append(r)
            return
        px = p | x
        # pivot maximizing |P ∩ N(u)| in the complement graph
        u = max(bits(px), key=lambda w: (p & non_nbr[w]).bit_count())
        for v in bits(p & ~non_nbr[u]):
            expand(r | 1 << v, p & non_nbr[v], x & non_nbr[v])
            p &= ~(1 << v)
            x |= 1 << v

    expand(0, full, 0)
    return sorted(out, key=lambda m: bits(m))


def maximal_independent_sets(g: LabeledGraph) -> list[frozenset]:
    return [frozenset(bits(m)) for m in maximal_independent_set_masks(g)]


def brute_force_mis(g: LabeledGraph) -> list[int]:
    """Reference enumeration over all 2^n subsets; small graphs only."""
    ind = [m for m in range(1 << g.n) if is_independent_mask(g, m)]
    ind_set = set(ind)
    return sorted((m for m in ind
                   if not any((m | 1 << v) in ind_set for v in range(g.n) if not m >> v & 1)),
                  key=lambda m: bits(m))


def complete_graph(n: int) -> LabeledGraph:
    return LabeledGraph.from_edges(n, combinations(range(n), 2))


def path_graph(n: int) -> LabeledGraph:
    return LabeledGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> LabeledGraph:
    return LabeledGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


# -- JSON ------------------------------------------------------------------

def graph_to_dict(g: LabeledGraph) -> dict:
    return {
        "n": g.n,
        "edges": [list(e) for e in g.sorted_edges()],
        "labels": [{"kind": lab.kind, "copy": lab.copy, "coord": lab.coord} for lab in g.labels],
    }


def graph_from_dict(data: dict) -> LabeledGraph:
    n = int(data["n"])
    raw = data.get("labels")
    if raw is None:
        labels = [PLAIN] * n
    else:
        labels = [VertexLabel(r.get("kind", "plain"), r.get("copy"), r.get("coord")) for r in raw]
    return LabeledGraph.from_edges(n, [tuple(e) for e in data["edges"]], labels)


def dumps_graph(g: LabeledGraph) -> str:
    return json.dumps(graph_to_dict(g), sort_keys=True) + "\n"


def write_graph(g: LabeledGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_graph(g))


def read_graph(path) -> LabeledGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))
