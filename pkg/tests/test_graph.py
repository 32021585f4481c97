from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperstab.errors import GraphValidationError, ParseError, PreconditionError
from hyperstab.graph import (Graph, RootedTree, complete_graph, densest_component, disjoint_union,
                             edge_count_between, format_graph, format_tree, load_graph, min_degree_peel,
                             parse_graph, parse_tree, path_graph, save_graph, star_graph)

from conftest import graphs, trees


def test_load_path(tmp_path):
    f = tmp_path / "p.el"
    f.write_text("3 2\n0 1\n1 2\n")
    g = load_graph(f)
    assert g.n == 3 and sorted(g.edges()) == [(0, 1), (1, 2)]


def test_single_vertex_and_comments():
    g = parse_graph("# header comment\n1 0\n")
    assert g.n == 1 and g.m == 0


@pytest.mark.parametrize("text", ["3 1\n0 0\n", "3 2\n0 1\n1 0\n"])
def test_self_loop_and_duplicate_rejected(text):
    with pytest.raises((GraphValidationError, ParseError)):
        parse_graph(text)


@pytest.mark.parametrize("text", ["", "3\n", "3 2\n0 1\n", "2 1\n0 5\n", "2 1\n0 x\n"])
def test_malformed_files(text):
    with pytest.raises(ParseError):
        parse_graph(text)


def test_tree_parse_errors():
    with pytest.raises(ParseError):
        parse_tree("3 0\n1 0\n")
    with pytest.raises(ParseError):
        parse_tree("3 0\n1 0\n1 2\n")
    with pytest.raises((ParseError, GraphValidationError)):
        parse_tree("3 0\n1 2\n2 1\n")


def test_peel_drops_pendant():
    g = complete_graph(4).union(Graph([3, 4], [(3, 4)]))
    h = min_degree_peel(g, Fraction(7, 5))
    assert h == complete_graph(4)
    assert h.min_degree() >= 2


def test_peel_keeps_k5():
    assert min_degree_peel(complete_graph(5), 2) == complete_graph(5)


def test_peel_precondition():
    with pytest.raises(PreconditionError):
        min_degree_peel(path_graph(4), 1)
    with pytest.raises(PreconditionError):
        min_degree_peel(Graph(range(3)), 0)


@given(graphs(min_n=2, max_n=10), st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=4))
def test_peel_properties(g, x):
    if g.m < x * g.n:
        return
    h = min_degree_peel(g, x)
    assert h.n > 0 and h.is_subgraph_of(g)
    assert h.m >= x * h.n
    # independent degree scan
    floor_x = x.numerator // x.denominator
    assert all(sum(1 for e in h.edges() if v in e) >= floor_x + 1 for v in h.vertices)


def test_densest_component():
    g = disjoint_union([complete_graph(4), complete_graph(2, offset=4)])
    assert densest_component(g) == complete_graph(4)
    assert densest_component(complete_graph(5)) == complete_graph(5)
    assert list(densest_component(Graph(range(3))).vertices) == [0]


def test_edge_count_between_examples():
    k3 = complete_graph(3)
    assert edge_count_between(k3, {0, 1, 2}, {0, 1, 2}) == 3
    assert edge_count_between(k3, {0}, {1, 2}) == 2


@given(graphs(max_n=9), st.data())
def test_edge_count_between_oracle(g, data):
    s = set(data.draw(st.lists(st.sampled_from(g.vertices), unique=True)))
    t = set(data.draw(st.lists(st.sampled_from(g.vertices), unique=True)))
    brute = {frozenset((u, v)) for u in s for v in t if u != v and g.has_edge(u, v)}
    assert edge_count_between(g, s, t) == len(brute)
    # handshake: twice the edges inside s equals the degree sum into s
    assert 2 * edge_count_between(g, s, s) == sum(len(g.adj(v) & s) for v in s)


@given(graphs(max_n=9))
def test_save_load_roundtrip(tmp_path_factory, g):
    path = tmp_path_factory.mktemp("rt") / "g.el"
    save_graph(g, path)
    assert load_graph(path) == g.relabeled()[0]
    assert parse_graph(format_graph(g)) == g.relabeled()[0]


@given(trees(max_n=15))
def test_tree_roundtrip(t):
    back = parse_tree(format_tree(t))
    assert back == t
    assert back.max_degree() == t.max_degree()


def test_rooted_tree_invariants():
    with pytest.raises(GraphValidationError):
        RootedTree(0, {1: 2, 2: 1})
    t = RootedTree.from_edges([(0, 1), (1, 2), (1, 3)], 0)
    assert t.max_degree() == 3 and len(t) == 4


def test_subgraph_keeps_labels():
    g = star_graph(4)
    h = g.subgraph([0, 3, 4])
    assert sorted(h.vertices) == [0, 3, 4] and h.m == 2
    r, labels = h.relabeled()
    assert list(r.vertices) == [0, 1, 2] and list(labels) == [0, 3, 4]
