from __future__ import annotations

import json
import time
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import pytest

from ssratio.certificates import check, implied_bound
from ssratio.entropy_lp import (
    AVERAGE, WORST, LPSizeError, build_lp, dumps_solution, extract_dual_certificate,
    lp_text, shannon_bound, solve,
)
from ssratio.graphs import (
    LabeledGraph, build_cube_star, build_delta, complete_graph, cycle_graph, path_graph,
)

GRAPHS = {
    "K2": lambda: complete_graph(2),
    "P4": lambda: path_graph(4),
    "C4": lambda: cycle_graph(4),
    "Cs1": lambda: build_cube_star(1),
    "Cs2": lambda: build_cube_star(2),
    "D1": lambda: build_delta(1),
    "K3": lambda: complete_graph(3),
    "P5": lambda: path_graph(5),
}


@lru_cache(maxsize=None)
def solved(name: str, mode: str):
    lp = build_lp(GRAPHS[name](), mode)
    return lp, solve(lp)


def test_k2_lp_shape():
    lp = build_lp(complete_graph(2), WORST)
    assert lp.ground_size == 3 and 1 << lp.ground_size == 8
    assert lp.count("bound") == 2
    assert lp.objective == {lp.t_var: 1}


def test_p4_lp_shape():
    lp = build_lp(path_graph(4), WORST)
    assert 1 << lp.ground_size == 32


def test_cs2_lp_shape():
    lp = build_lp(build_cube_star(2), WORST)
    assert 1 << lp.ground_size == 512
    assert lp.count("mono") == 9
    assert lp.count("submod") == 36 * 128
    assert lp.count("qualified") == 8
    assert lp.count("empty") == lp.count("secret") == 1


def test_size_limit():
    with pytest.raises(LPSizeError):
        build_lp(path_graph(11), WORST)


@pytest.mark.parametrize("name,mode,value", [
    ("K2", WORST, Fraction(1)),
    ("K2", AVERAGE, Fraction(1)),
    ("P4", WORST, Fraction(3, 2)),
    ("Cs1", WORST, Fraction(3, 2)),
    ("Cs2", WORST, Fraction(2)),
    ("D1", AVERAGE, Fraction(3, 2)),
    ("C4", WORST, Fraction(1)),
])
def test_known_optima(name, mode, value):
    assert solved(name, mode)[1].objective_value == value


def test_p4_average_sandwich():
    v = solved("P4", AVERAGE)[1].objective_value
    assert 1 <= v <= Fraction(3, 2)


@pytest.mark.parametrize("name", ["K2", "P4", "C4", "K3", "P5", "D1", "Cs2"])
def test_worst_at_least_average(name):
    assert solved(name, WORST)[1].objective_value >= solved(name, AVERAGE)[1].objective_value


@pytest.mark.parametrize("name", ["K2", "P4", "D1", "Cs2"])
@pytest.mark.parametrize("mode", [WORST, AVERAGE])
def test_solution_is_exactly_optimal(name, mode):
    lp, sol = solved(name, mode)
    f = sol.variable_values
    for idx, c in enumerate(lp.constraints):
        lhs = sum(a * f[v] for v, a in c.coeffs.items())
        if c.relation == "=":
            assert lhs == c.rhs
        else:
            assert lhs >= c.rhs
            assert sol.dual_values[idx] >= 0
    dual_obj = sum(y * lp.constraints[i].rhs for i, y in sol.dual_values.items())
    assert dual_obj == sol.objective_value


def test_scaling():
    for g in (path_graph(4), build_delta(1)):
        for mode in (WORST, AVERAGE):
            one = solve(build_lp(g, mode)).objective_value
            two = solve(build_lp(g, mode, secret_entropy=2)).objective_value
            assert two == 2 * one


def test_symmetry_folding_does_not_change_optimum():
    for name in ("P4", "C4", "D1"):
        for mode in (WORST, AVERAGE):
            lp = build_lp(GRAPHS[name](), mode)
            assert solve(lp, use_symmetry=False).objective_value == solved(name, mode)[1].objective_value


def test_deterministic():
    lp = build_lp(path_graph(4), WORST)
    a, b = solve(lp), solve(lp)
    assert a.variable_values == b.variable_values and a.dual_values == b.dual_values


def test_edge_addition_can_lower_the_bound():
    # the 4-cycle is P4 plus one edge, yet its bound is smaller
    assert shannon_bound(path_graph(4)) == Fraction(3, 2)
    assert shannon_bound(cycle_graph(4)) == 1


def _all_graphs(n):
    pairs = list(combinations(range(n), 2))
    for sel in range(1 << len(pairs)):
        yield LabeledGraph.from_edges(n, [p for k, p in enumerate(pairs) if sel >> k & 1])


def _delete_vertex(g, v):
    keep = [u for u in range(g.n) if u != v]
    ren = {u: k for k, u in enumerate(keep)}
    return LabeledGraph.from_edges(g.n - 1, [(ren[a], ren[b]) for a, b in g.edges if v not in (a, b)])


def test_all_four_vertex_graphs():
    values = {}
    for g in _all_graphs(4):
        if not g.edges:
            continue
        values[g.edges] = solve(build_lp(g, WORST)).objective_value
    # every connected-or-not graph with an edge needs at least ratio 1
    assert all(v >= 1 for v in values.values())
    # induced subgraphs never need more than the whole graph
    for g in _all_graphs(4):
        if not g.edges:
            continue
        for v in range(4):
            h = _delete_vertex(g, v)
            if h.edges:
                assert shannon_bound(h) <= values[g.edges]
    # adding an edge can lower the bound; record that it happens
    drops = [(e, f) for e in values for f in values
             if e < f and len(f) == len(e) + 1 and values[f] < values[e]]
    assert drops


@pytest.mark.parametrize("name", ["K2", "P4", "Cs2", "D1"])
@pytest.mark.parametrize("mode", [WORST, AVERAGE])
def test_dual_certificate(name, mode):
    lp, sol = solved(name, mode)
    cert = extract_dual_certificate(lp, sol)
    assert cert.extended
    assert check(cert).valid
    assert implied_bound(cert) == sol.objective_value


def test_lp_text_and_json():
    lp, sol = solved("K2", WORST)
    text = lp_text(lp)
    assert text.startswith("Minimize") and " t free" in text and "f_7" in text
    data = json.loads(dumps_solution(lp, sol))
    assert data["objective"] == "1"
    assert all("/" in v or v.lstrip("-").isdigit() for v in data["values"].values())


def test_small_runtime():
    t = time.perf_counter()
    assert shannon_bound(build_cube_star(1), WORST) == Fraction(3, 2)
    assert time.perf_counter() - t < 1.0
