from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import graphs
from oracles import minmax_brute
from pmsched.errors import SizeLimitError
from pmsched.graph import build_graph, path, random_tree, star
from pmsched.priority import (
    assign_priorities,
    brute_force_optimal_priority,
    higher_priority_neighbors,
    minmax_objective,
    tree_priority,
    validate_priority,
)
from pmsched.regions import in_lambda_p, in_lambda_sp_oracle, prioritized_interference_degree

TENTH = F(1, 10)
CENTER_LOW = (9,) + tuple(range(1, 9))


def test_higher_priority_neighbors(star8):
    p = (1,) + (2,) * 8
    assert higher_priority_neighbors(star8, p, 0) == frozenset()
    assert higher_priority_neighbors(star8, p, 3) == {0}
    g = build_graph(3, [(0, 1), (1, 2)])
    # links 0 and 2 share a value but are not adjacent
    assert higher_priority_neighbors(g, (2, 1, 2), 0) == {1}
    assert higher_priority_neighbors(g, (2, 3, 2), 1) == {0, 2}


def test_assign_star_uses_two_levels(star8):
    p, trace = assign_priorities(star8, [TENTH] * 9)
    assert p == (8,) + (9,) * 8
    assert trace.removal_order == (1, 2, 3, 4, 5, 6, 7, 8, 0)
    assert trace.assigned == (9,) * 8 + (8,)
    assert len(set(p)) == 2


def test_assign_small_cases():
    assert assign_priorities(build_graph(1, []), [F(3, 10)])[0] == (1,)
    p, trace = assign_priorities(build_graph(2, [(0, 1)]), [F(2, 10), F(7, 10)])
    assert trace.scores[0] == F(9, 10)
    assert p == (2, 1)
    # zero rates: every score ties
    p, trace = assign_priorities(path(3), [0, 0, 0])
    validate_priority(path(3), p)


def test_minmax_objective(star8):
    rates = [TENTH] * 9
    p, _ = assign_priorities(star8, rates)
    assert minmax_objective(star8, p, rates) == F(1, 5)
    assert minmax_objective(star8, p, [0] * 9) == 0
    assert minmax_objective(star8, CENTER_LOW, rates) == F(9, 10)


def test_brute_force_examples(star8):
    assert brute_force_optimal_priority(star8, [TENTH] * 9)[1] == F(1, 5)
    assert brute_force_optimal_priority(build_graph(1, []), [F(3, 10)]) == ((1,), F(3, 10))
    p, value = brute_force_optimal_priority(build_graph(2, [(0, 1)]), [F(2, 10), F(7, 10)])
    assert value == F(9, 10) and p == (1, 2)
    with pytest.raises(SizeLimitError):
        brute_force_optimal_priority(path(10), [0] * 10)


def test_brute_force_float_rates():
    _, value = brute_force_optimal_priority(path(3), [0.25, 0.5, 0.25])
    assert value == pytest.approx(0.75)


@settings(max_examples=150, deadline=None)
@given(graphs(max_n=6), st.lists(st.integers(0, 12), min_size=6, max_size=6))
def test_assignment_solves_minmax(g, twelfths):
    rates = [F(t, 12) for t in twelfths[: g.n_links]]
    p, trace = assign_priorities(g, rates)
    validate_priority(g, p)
    assert sorted(trace.removal_order) == list(range(g.n_links))
    assert minmax_objective(g, p, rates) == minmax_brute(g, rates)
    assert brute_force_optimal_priority(g, rates)[1] == minmax_brute(g, rates)
    if in_lambda_sp_oracle(g, rates):
        assert in_lambda_p(g, p, rates)


@settings(max_examples=50, deadline=None)
@given(graphs(max_n=8), st.lists(st.integers(0, 20), min_size=8, max_size=8))
def test_assignment_structure(g, raw):
    rates = [F(x, 20) for x in raw[: g.n_links]]
    p, trace = assign_priorities(g, rates)
    assert (p, trace) == assign_priorities(g, rates)
    for i, j in g.edges:
        assert p[i] != p[j]
    # each link's higher-priority neighbors are exactly those removed after it
    position = {k: r for r, k in enumerate(trace.removal_order)}
    for i in g.links:
        later = {j for j in g.neighbors(i) if position[j] > position[i]}
        assert higher_priority_neighbors(g, p, i) == later
        assert trace.scores[position[i]] == rates[i] + sum(rates[j] for j in later)


def test_tree_priority(star8):
    p = tree_priority(star8)
    assert p[0] < min(p[1:])
    assert prioritized_interference_degree(star8, p).overall == 1
    assert tree_priority(build_graph(1, [])) == (1,)
    line = path(4)
    assert prioritized_interference_degree(line, tree_priority(line)).overall == 1
    with pytest.raises(ValueError):
        tree_priority(build_graph(3, [(0, 1), (1, 2), (0, 2)]))


@pytest.mark.parametrize("seed", range(10))
def test_tree_priority_one_parent(seed):
    t = random_tree(18, seed)
    p = tree_priority(t)
    validate_priority(t, p)
    assert all(len(higher_priority_neighbors(t, p, i)) <= 1 for i in t.links)


def test_tree_priority_forest():
    forest = build_graph(6, [(0, 1), (2, 3), (3, 4)])
    p = tree_priority(forest)
    assert prioritized_interference_degree(forest, p).overall == 1


def test_validate_priority(star8):
    with pytest.raises(ValueError):
        validate_priority(star8, (1,) * 9)
    with pytest.raises(ValueError):
        validate_priority(star8, (0,) + (2,) * 8)
    assert validate_priority(star(2), (1, 2, 2)) == (1, 2, 2)
