from __future__ import annotations

import pytest

from horoforge.graphdef import (
    DefiningGraph,
    GraphError,
    enumerate_cliques,
    max_clique_size,
    require_valid,
    validate_defining_graph,
)

from conftest import cycle_graph, theta_graph, wheel5_graph


def check(report, name):
    return next(c for c in report.checks if c.name == name)


def test_c5_satisfies_standing_assumptions(c5):
    assert validate_defining_graph(c5).ok


def test_complete_graph_fails_not_complete():
    k3 = DefiningGraph.from_edges("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    report = validate_defining_graph(k3)
    assert not check(report, "not complete").passed
    assert check(report, "no induced square").passed


def test_c4_fails_induced_square():
    report = validate_defining_graph(cycle_graph(4))
    item = check(report, "no induced square")
    assert not item.passed
    assert "4-cycle" in item.witness


def test_separating_clique_detected():
    # two triangles glued along an edge: the shared edge separates
    g = DefiningGraph.from_edges("abcd", [("a", "b"), ("a", "c"), ("b", "c"), ("b", "d"), ("c", "d")])
    report = validate_defining_graph(g)
    item = check(report, "no separating clique")
    assert not item.passed
    assert "separates" in item.witness
    with pytest.raises(GraphError):
        require_valid(g)


def test_disconnected_graph_fails():
    g = DefiningGraph.from_edges("abcd", [("a", "b"), ("c", "d")])
    report = validate_defining_graph(g)
    assert not check(report, "connected").passed
    # the empty clique separates it too
    assert not check(report, "no separating clique").passed


def test_theta_and_wheel_pass():
    assert validate_defining_graph(theta_graph()).ok
    assert validate_defining_graph(wheel5_graph()).ok


def test_max_clique_sizes(c5):
    assert max_clique_size(c5) == 2
    single_edge = DefiningGraph.from_edges("ab", [("a", "b")])
    assert max_clique_size(single_edge) == 2
    pendant = DefiningGraph.from_edges("abcd", [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")])
    assert max_clique_size(pendant) == 3
    assert max_clique_size(wheel5_graph()) == 3


def test_clique_enumeration_counts(c5):
    cliques = list(enumerate_cliques(c5))
    # empty + 5 vertices + 5 edges, triangle-free
    assert len(cliques) == 11
    assert () in cliques


def test_structural_errors():
    with pytest.raises(GraphError):
        DefiningGraph.from_edges("ab", [("a", "a")])
    with pytest.raises(GraphError):
        DefiningGraph.from_edges("ab", [("a", "z")])
    with pytest.raises(GraphError):
        DefiningGraph.from_edges("aa", [])


def test_star_masks(c5):
    a, b, c, d, e = range(5)
    assert c5.link_masks[a] == (1 << b) | (1 << e)
    assert c5.star_masks[a] == (1 << a) | (1 << b) | (1 << e)
    assert c5.star_lt_masks[c] == 1 << b
    assert c5.star_gt_masks[c] == 1 << d
