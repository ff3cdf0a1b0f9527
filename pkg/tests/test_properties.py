from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np
from hypothesis import given, settings, strategies as st

from ssratio.entropy_lp import AVERAGE, WORST, build_lp, solve
from ssratio.expr import LinearExpr
from ssratio.graphs import LabeledGraph, brute_force_mis, maximal_independent_set_masks
from ssratio.schemes import (
    build_star_scheme, information_ratios, next_prime_at_least, rank_mod_p, verify_perfect,
)


@st.composite
def graphs(draw, min_n=2, max_n=6):
    n = draw(st.integers(min_n, max_n))
    pairs = list(combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, unique=True))
    return LabeledGraph.from_edges(n, chosen)


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=10))
def test_mis_enumeration(g):
    assert maximal_independent_set_masks(g) == brute_force_mis(g)


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=8))
def test_star_scheme_perfect_and_ratios(g):
    s = build_star_scheme(g, next_prime_at_least(g.n))
    assert verify_perfect(s, g).perfect
    ratios, _, _ = information_ratios(s)
    for v in range(g.n):
        want = Fraction(g.degree(v) + 1, 2) if g.degree(v) else 0
        assert ratios[v] == want


@settings(max_examples=15, deadline=None)
@given(graphs(max_n=5))
def test_lp_below_scheme(g):
    s = build_star_scheme(g, next_prime_at_least(g.n))
    _, mx, avg = information_ratios(s)
    worst = solve(build_lp(g, WORST)).objective_value
    average = solve(build_lp(g, AVERAGE)).objective_value
    assert average <= worst <= mx
    assert average <= avg
    assert worst >= 1


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(1, 6), st.sampled_from([2, 3, 5, 7]), st.integers(0, 10 ** 6))
def test_rank_is_submodular(rows, cols, q, seed):
    rng = np.random.default_rng(seed)
    m = rng.integers(0, q, size=(rows, cols))

    def r(mask):
        idx = [i for i in range(rows) if mask >> i & 1]
        return rank_mod_p(m[idx], q)

    for a in range(1 << rows):
        for b in range(1 << rows):
            assert r(a) + r(b) >= r(a | b) + r(a & b)
        assert r(a) <= bin(a).count("1")


terms = st.dictionaries(st.integers(0, 31), st.fractions(max_denominator=7), max_size=5)


@given(terms, terms, st.fractions(max_denominator=5))
def test_linear_expr_algebra(t1, t2, k):
    a, b = LinearExpr(t1), LinearExpr(t2)
    assert (a + b) - b == a
    assert (a + b).scale(k) == a.scale(k) + b.scale(k)
    assert all(v != 0 for v in (a + b).terms.values())
    f = {m: Fraction(m * m + 1, 3) for m in range(32)}
    assert (a - b).evaluate(f) == a.evaluate(f) - b.evaluate(f)
