from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperstab.embedding import Embedding, check_embedding, validate_embedding
from hyperstab.errors import (EmbedFailure, GraphValidationError, OverlapError, PreconditionError)
from hyperstab.graph import (Graph, RootedTree, complete_graph, cycle_graph, disjoint_union, path_tree,
                             random_graph, random_tree, star_graph, star_tree)
from hyperstab.oracle import trees_with_edges
from hyperstab.params import ParamHierarchy
from hyperstab.trees import (combine_embeddings, connector_tree, embed_cut_dense, embed_maximal_subtree,
                             embed_tree_of_pieces, expander_embed, external_vertices, greedy_embed,
                             greedy_precondition, split_tree)

from conftest import split_violations, trees


# -- greedy

@pytest.mark.parametrize("d", range(1, 8))
def test_greedy_all_trees_into_clique(d):
    for t in trees_with_edges(d):
        emb = greedy_embed(complete_graph(d + 1), t, 0)
        assert check_embedding(t, complete_graph(d + 1), emb.map, 0).ok


def test_greedy_precondition_star_host():
    with pytest.raises(PreconditionError):
        greedy_embed(star_graph(6), path_tree(4), 0)
    assert greedy_precondition(star_graph(6), path_tree(4), 0)


@given(trees(max_n=8), st.integers(0, 10**6))
@settings(max_examples=30)
def test_greedy_random_hosts(t, seed):
    rng = np.random.default_rng(seed)
    d = t.num_edges
    n = d + 4 + int(rng.integers(0, 6))
    g = random_graph(n, 0.9, rng)
    # top up to min degree d + 1
    extra = []
    for v in g.vertices:
        if g.degree(v) < d + 1:
            extra.extend((min(v, w), max(v, w)) for w in g.vertices if w != v and not g.has_edge(v, w))
    g = Graph(g.vertices, set(g.edges()) | set(extra))
    emb = greedy_embed(g, t, 0)
    assert check_embedding(t, g, emb.map, 0).ok


# -- splitting

def test_split_trivial():
    t = path_tree(6)
    res = split_tree(t, Fraction(1, 2), 2)
    assert res.q_subtree == t and res.components == []


def test_split_path_ten():
    t = path_tree(10)
    lam = Fraction(3, 10)
    res = split_tree(t, lam, 2)
    assert 4 <= len(res.q_subtree) <= 11
    assert len(res.components) <= 2 and all(len(c) - 1 <= 3 for c in res.components)
    assert split_violations(t, res, lam, 2) == []


def test_split_errors():
    with pytest.raises(PreconditionError):
        split_tree(star_tree(4), Fraction(1, 3), 3)
    with pytest.raises(PreconditionError):
        split_tree(path_tree(4), 1, 2)


@given(trees(max_n=40, max_degree=4), st.fractions(0, Fraction(9, 10), max_denominator=20))
def test_split_invariants(t, lam):
    delta = max(t.max_degree(), 1)
    res = split_tree(t, lam, delta)
    assert split_violations(t, res, lam, delta) == []


# -- external vertices

def test_external_whole_tree():
    t = path_tree(5)
    assert external_vertices(t, t) == []


def test_external_path_prefix():
    t = path_tree(4)
    ext = external_vertices(t, t.induced({0}))
    assert len(ext) == 1
    x, comp = ext[0]
    assert x == 0 and len(comp) - 1 == 3


@given(trees(min_n=2, max_n=20), st.data())
def test_external_bijection(t, data):
    # random rooted subtree: grow from the root
    keep = {t.root}
    for v in t.bfs_order()[1:]:
        if t.parent[v] in keep and data.draw(st.booleans()):
            keep.add(v)
    sub = t.induced(keep)
    ext = external_vertices(t, sub)
    rest = t.to_graph().to_networkx()
    rest.remove_nodes_from(keep)
    assert len(ext) <= nx.number_connected_components(rest) if rest.number_of_nodes() else ext == []
    covered = set()
    for x, comp in ext:
        cv = set(comp.vertices)
        assert cv & keep == {x}
        covered |= cv - {x}
    assert covered == set(t.vertices) - keep


# -- combining

def test_combine_no_parts():
    t = path_tree(3)
    base = Embedding(t, complete_graph(3), {0: 0, 1: 1, 2: 2})
    assert combine_embeddings(base, []) is base


def test_combine_halves_of_path():
    host = complete_graph(3).union(complete_graph(3, offset=2))
    t = path_tree(5)  # 0-1-2-3-4, anchor 2 is shared
    head = t.induced({0, 1, 2})
    tail = t.subtree_at(2)
    base = Embedding(head, host, {0: 0, 1: 1, 2: 2})
    part = Embedding(tail, host, {2: 2, 3: 3, 4: 4})
    emb = combine_embeddings(base, [part], host)
    assert validate_embedding(emb).ok and len(emb.map) == 5


def test_combine_overlap_error():
    host = complete_graph(5)
    t = path_tree(5)
    base = Embedding(t.induced({0, 1, 2}), host, {0: 0, 1: 1, 2: 2})
    part = Embedding(t.subtree_at(2), host, {2: 2, 3: 1, 4: 4})
    with pytest.raises(OverlapError):
        combine_embeddings(base, [part], host)


# -- connector trees

def test_connector_in_clique():
    g = complete_graph(12)
    ct = connector_tree(g, 0, {5, 6, 7, 8}, 3, 1)
    assert ct.height == 1 and set(ct.embedding.map[x] for x in ct.leaves()) <= {5, 6, 7, 8}


def test_connector_across_overlap():
    # two K_12 sharing six vertices; targets only in the far clique
    a = complete_graph(12)
    b = complete_graph(12, offset=6)
    g = a.union(b)
    u = set(range(12, 18))
    ct = connector_tree(g, 0, u, 2, Fraction(1, 4))
    assert ct.height >= 2
    assert all(ct.embedding.map[x] in u for x in ct.leaves())
    assert all(len(ct.tree.children(v)) in (0, 2) for v in ct.tree.vertices)
    assert validate_embedding(ct.embedding).ok


def test_connector_small_target():
    with pytest.raises(PreconditionError):
        connector_tree(complete_graph(6), 0, {1, 2}, 3, 1)


def test_maximal_subtree_lands_on_leaves():
    host = RootedTree(0, {1: 0, 2: 0, 3: 1, 4: 1, 5: 2, 6: 2})
    t = random_tree(12, np.random.default_rng(4), max_degree=3)
    t = RootedTree(t.root, {c: p for c, p in t.parent.items()})
    sub, mapping = embed_maximal_subtree(t, host)
    for x, _ in external_vertices(t, sub):
        assert not host.children(mapping[x])


# -- expander embedding

@pytest.mark.parametrize("d", range(2, 8))
def test_expander_clique(d):
    t = random_tree(d + 1, np.random.default_rng(d), max_degree=3)
    emb = expander_embed(complete_graph(4 * d), t, 3, strict=False)
    assert validate_embedding(emb).ok
    # at this order the 10-delta expansion test cannot pass, and the run says so
    assert any(n.startswith("expansion-precondition-failed") for n in emb.notes)


def test_expander_random_dense_seeds():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(2, 9))
        t = random_tree(k, rng, max_degree=3)
        g = random_graph(8 * k + 6, 0.9, rng)
        extra = {(min(v, w), max(v, w)) for v in g.vertices if g.degree(v) < 8 * k
                 for w in g.vertices if w != v}
        g = Graph(g.vertices, set(g.edges()) | extra)
        assert g.min_degree() >= 8 * k
        emb = expander_embed(g, t, 3, strict=False, seed=seed)
        assert validate_embedding(emb).ok


def test_expander_cycle_fails_precondition():
    with pytest.raises(PreconditionError):
        expander_embed(cycle_graph(40), star_tree(3), 3, strict=True)


def test_expander_stuck_reports_partial():
    with pytest.raises(EmbedFailure) as exc:
        expander_embed(disjoint_union([complete_graph(3), complete_graph(3, offset=3)]), path_tree(5), 2,
                       strict=False)
    assert exc.value.partial


# -- dense embedding

def test_cut_dense_clique():
    params = ParamHierarchy(d=6)
    g = complete_graph(20)
    t = random_tree(6, np.random.default_rng(2), max_degree=3)
    emb, log = embed_cut_dense(g, g, t, params)
    assert validate_embedding(emb).ok


def test_cut_dense_clique_with_halo():
    rng = np.random.default_rng(9)
    core = complete_graph(24)
    halo = [(v, int(rng.integers(0, 24))) for v in range(24, 34)]
    g = core.union(Graph(range(24, 34), [])).union(Graph(range(34), [(min(a, b), max(a, b)) for a, b in halo]))
    params = ParamHierarchy(d=8)
    t = random_tree(8, rng, max_degree=3)
    emb, _ = embed_cut_dense(g, core, t, params, seed=5)
    assert validate_embedding(emb).ok


def test_cut_dense_small_regular():
    params = ParamHierarchy(d=6)
    with pytest.raises(PreconditionError):
        embed_cut_dense(complete_graph(20), complete_graph(10), path_tree(6), params)


# -- tree of pieces

def test_pieces_single():
    params = ParamHierarchy(d=4)
    g = complete_graph(40)
    emb, _ = embed_tree_of_pieces([g], RootedTree(0, {}), {}, path_tree(4), params)
    assert validate_embedding(emb).ok


def test_pieces_chain_of_three_cliques():
    a = complete_graph(12)
    b = complete_graph(12, offset=11)
    c = complete_graph(12, offset=22)
    s_tree = RootedTree(0, {1: 0, 2: 1})
    conns = {(0, 1): 11, (1, 2): 22}
    t = path_tree(10)
    params = ParamHierarchy(d=10, delta_cap=2)
    emb, _ = embed_tree_of_pieces([a, b, c], s_tree, conns, t, params)
    assert validate_embedding(emb).ok
    img = set(emb.map.values())
    assert len(img) == 10


def test_pieces_bad_overlap():
    a = complete_graph(6)
    b = complete_graph(6, offset=4)
    with pytest.raises(GraphValidationError):
        embed_tree_of_pieces([a, b], RootedTree(0, {1: 0}), {(0, 1): 5}, path_tree(3), ParamHierarchy(d=3))
