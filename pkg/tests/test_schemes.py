from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from ssratio.graphs import (
    build_cube_star, build_delta, complete_graph, cycle_graph, path_graph, to_mask,
)
from ssratio.schemes import (
    SECRET, LinearScheme, PrimeField, SchemeError, build_star_scheme, dumps_scheme,
    exhaustive_entropies, information_ratios, is_determining, is_independent_of_secret,
    next_prime_at_least, rank_mod_p, scheme_from_dict, scheme_report, verify_perfect,
)


def test_prime_field():
    PrimeField(3)
    for bad in (1, 4, 9, 0, -7):
        with pytest.raises(SchemeError):
            PrimeField(bad)
    assert next_prime_at_least(8) == 11 and next_prime_at_least(11) == 11
    assert next_prime_at_least(1) == 2


def test_rank_mod_p():
    m = np.array([[1, 2], [2, 4]])
    assert rank_mod_p(m, 5) == 1
    assert rank_mod_p(np.array([[1, 1], [1, 2]]), 7) == 2
    assert rank_mod_p(np.array([[3, 0], [0, 3]]), 3) == 0
    assert rank_mod_p(np.zeros((0, 3), dtype=np.int64), 3) == 0


def test_k2_scheme():
    g = complete_graph(2)
    s = build_star_scheme(g, 3)
    assert s.secret_dim == 2
    assert [b - a for a, b in (s.participant_index[v] for v in range(2))] == [2, 2]
    ratios, mx, avg = information_ratios(s)
    assert mx == 1 and avg == 1


def test_p4_scheme_ratios():
    s = build_star_scheme(path_graph(4), 5)
    rows = [b - a for a, b in (s.participant_index[v] for v in range(4))]
    assert rows == [2, 3, 3, 2]
    ratios, mx, avg = information_ratios(s)
    assert ratios == [1, Fraction(3, 2), Fraction(3, 2), 1]
    assert mx == Fraction(3, 2) and avg == Fraction(5, 4)


def test_row_layout():
    s = build_star_scheme(path_graph(3), 5)
    # vertex 1 centres star 1 (column 3) and leaves stars 0 and 2
    a, b = s.participant_index[1]
    assert s.matrix[a:b].tolist() == [[0, 0, 0, 1, 0], [1, 0, 1, 0, 0], [1, 2, 0, 0, 1]]


def test_determining_examples():
    g = path_graph(4)
    s = build_star_scheme(g, 5)
    for u, v in g.sorted_edges():
        assert is_determining(s, [u, v])
        assert not is_independent_of_secret(s, [u, v])
    assert not is_determining(s, [])
    assert is_independent_of_secret(s, [])
    for v in range(4):
        assert not is_determining(s, [v])
    for m in ([0, 2], [1, 3], [0, 3]):
        assert is_independent_of_secret(s, m)
    assert is_determining(s, to_mask([0, 1]))


@pytest.mark.parametrize("g,q", [
    (complete_graph(2), 3), (path_graph(4), 5), (build_cube_star(2), 11),
    (build_cube_star(3), 17), (build_delta(1), 7), (build_delta(2, 3), 13),
])
def test_verify_perfect(g, q):
    s = build_star_scheme(g, q)
    rep = verify_perfect(s, g)
    assert rep.perfect and not rep.sampled
    assert rep.edges_checked == len(g.edges)


def test_p4_report_counts():
    g = build_cube_star(1)
    rep = verify_perfect(build_star_scheme(g, 5), g)
    assert rep.edges_checked == 3 and rep.independent_sets_checked == 3


def test_verify_perfect_sampled():
    g = build_cube_star(4)
    rep = verify_perfect(build_star_scheme(g, 37), g, sample_budget=500)
    assert rep.perfect and rep.sampled and rep.independent_sets_checked == 500


def test_corrupted_scheme_reports_edge():
    g = path_graph(4)
    s = build_star_scheme(g, 5)
    # drop the secret part of vertex 0's leaf row for star 1
    a, _ = s.participant_index[0]
    bad = s.matrix.copy()
    bad[a + 1, :2] = 0
    broken = LinearScheme(s.field, 2, s.randomness_dim, bad, s.participant_index)
    rep = verify_perfect(broken, g)
    assert not rep.perfect
    assert ("edge not determining", [0, 1]) in rep.violations


def test_small_field_uses_colouring():
    g = build_cube_star(1)
    s = build_star_scheme(g, 3)
    xs = dict(zip([c for c, _ in s.cover.stars], s.cover.evaluation_points))
    for u, v in g.edges:
        assert xs[u] != xs[v]
    assert verify_perfect(s, g).perfect
    with pytest.raises(SchemeError):
        build_star_scheme(complete_graph(4), 3)


def test_large_field_uses_star_index():
    s = build_star_scheme(path_graph(4), 5)
    assert s.cover.evaluation_points == (0, 1, 2, 3)


@pytest.mark.parametrize("d", range(1, 5))
def test_regular_ratios(d):
    g = build_delta(d, 1)
    ratios, mx, avg = information_ratios(build_star_scheme(g, next_prime_at_least(g.n)))
    assert all(r == Fraction(d + 2, 2) for r in ratios)


def test_delta3_average():
    g = build_delta(3, 2)
    assert information_ratios(build_star_scheme(g, 29))[2] == Fraction(5, 2)


@pytest.mark.parametrize("g", [complete_graph(2), path_graph(4)])
def test_entropies_match_rank(g):
    s = build_star_scheme(g, 3)
    subsets = [[v] for v in range(g.n)] + [list(e) for e in g.sorted_edges()]
    h = exhaustive_entropies(s, subsets)
    for sub in subsets:
        assert h[frozenset(sub)] == rank_mod_p(s.rows_of(sub), 3)


def test_entropy_examples():
    s = build_star_scheme(complete_graph(2), 3)
    h = exhaustive_entropies(s, [[0], [SECRET], [0, SECRET], []])
    assert h[frozenset([0])] == 2
    assert h[frozenset([SECRET])] == 2
    assert h[frozenset()] == 0
    s = build_star_scheme(path_graph(4), 3)
    assert exhaustive_entropies(s, [[1]])[frozenset([1])] == 3


def test_state_limit():
    s = build_star_scheme(build_cube_star(2), 11)
    with pytest.raises(SchemeError):
        exhaustive_entropies(s, [[0]])


def test_deterministic_matrices():
    g = build_delta(2, 4)
    a, b = build_star_scheme(g, 13), build_star_scheme(g, 13)
    assert np.array_equal(a.matrix, b.matrix) and a.participant_index == b.participant_index


def test_json():
    g = path_graph(4)
    s = build_star_scheme(g, 5)
    data = json.loads(dumps_scheme(s))
    assert data["modulus"] == 5 and data["secret_dim"] == 2
    back = scheme_from_dict(data)
    assert np.array_equal(back.matrix, s.matrix)
    rep = scheme_report(s, g)
    assert rep["max_ratio"] == "3/2" and rep["verification"]["perfect"]


def test_isolated_vertex_gets_no_rows():
    from ssratio.graphs import LabeledGraph
    g = LabeledGraph.from_edges(3, [(0, 1)])
    s = build_star_scheme(g, 3)
    assert s.participant_index[2][0] == s.participant_index[2][1]
    ratios, _, _ = information_ratios(s)
    assert ratios[2] == 0
    with pytest.raises(SchemeError):
        build_star_scheme(LabeledGraph.from_edges(2, []), 3)


def test_cycle_scheme_matches_bound():
    s = build_star_scheme(cycle_graph(5), 5)
    assert information_ratios(s)[1] == Fraction(3, 2)
    assert verify_perfect(s, cycle_graph(5)).perfect
