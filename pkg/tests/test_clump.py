import dataclasses
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperstab.clump import (LARGE_M, MANY_OVERLAPS, SUBDIVISION_TREE, Clump, b_intersection_report,
                             clump_cut_dense_subgraph, clump_embed_trigger, derive_sets, init_clump, join_clumps,
                             trimmed_pieces)
from hyperstab.cutdense import exact_cut_density
from hyperstab.embedding import check_embedding
from hyperstab.errors import PreconditionError
from hyperstab.graph import Graph, RootedTree, complete_graph, cycle_graph, path_graph, path_tree
from hyperstab.params import ParamHierarchy, kappa_tower, overlap_threshold
from hyperstab.regular import MAXIMUM, RegularFamily, is_regular


def clique(vs):
    vs = sorted(vs)
    return Graph(vs, [(a, b) for i, a in enumerate(vs) for b in vs[i + 1:]])


def matching_size(g):
    return len(nx.max_weight_matching(g.to_networkx(), maxcardinality=True))


# -- init

def test_init_k9():
    params = ParamHierarchy(d=18, h=2)
    c = init_clump(complete_graph(9), params)
    assert params.r == 1 and c.k == 4 and c.c_core == complete_graph(9)
    assert all(is_regular(m, 1) for m in c.m_family.members)


def test_init_c12():
    g = cycle_graph(12)
    q = exact_cut_density(g).q_value
    params = ParamHierarchy(d=24, h=2, p=q)
    assert init_clump(g, params).k == 6


def test_init_rejects_sparse_piece():
    with pytest.raises(PreconditionError):
        init_clump(path_graph(9), ParamHierarchy(d=18, h=2))
    with pytest.raises(PreconditionError):
        init_clump(complete_graph(5), ParamHierarchy(d=18, h=2))


# -- derived sets

def test_derived_k9():
    c = init_clump(complete_graph(9), ParamHierarchy(d=18, h=2))
    s = derive_sets(c)
    assert set(s.m_union) <= s.b_graph.vertex_set()
    assert all(u in s.m_union or v in s.m_union for u, v in s.b_graph.edges())
    assert s.d_vertices == c.c_core.vertex_set() | s.b_graph.vertex_set()


def test_derived_threshold_drops_low_vertex():
    # K4 on 0..3, vertex 4 sees only 0, vertex 5 sees 0 and 1; M = {01}; threshold pm/2 = 3/2
    g = complete_graph(4).union(Graph([0, 4, 5, 1], [(0, 4), (0, 5), (1, 5)]))
    params = ParamHierarchy(d=12, h=2)
    fam = RegularFamily([Graph([0, 1], [(0, 1)])], [0], 1, MAXIMUM)
    c = Clump(g, (g,), fam, g, 1, params)
    s = derive_sets(c)
    assert 4 not in s.b_graph.vertex_set() and 5 in s.b_graph.vertex_set()
    assert 4 in s.d_vertices  # still in the core


# -- join

def test_join_no_growth_reuses_core():
    params = ParamHierarchy(d=6, h=2)  # m = 3
    a = init_clump(Graph([0, 1, 2], [(0, 1), (0, 2)]), params)
    b = init_clump(Graph([0, 3, 4], [(0, 3), (0, 4)]), params)
    j = join_clumps(a, b)
    assert j.k == 1 and j.c_core == a.c_core
    assert j.graph.m == 4 and len(j.h_family) == 2


def test_join_growth_rebuilds_core():
    params = ParamHierarchy(d=6, h=2)
    a = init_clump(clique([0, 1, 2]), params)
    b = init_clump(clique([2, 3, 4]), params)
    j = join_clumps(a, b)
    assert j.k == 2 and j.c_core.n == 5
    assert j.core_q == exact_cut_density(j.c_core).q_value


def test_join_two_k9():
    params = ParamHierarchy(d=18, h=2)
    a = init_clump(clique(range(9)), params)
    b = init_clump(clique(range(8, 17)), params)
    j = join_clumps(a, b)
    assert max(a.k, b.k) <= j.k <= a.k + b.k
    assert j.k == matching_size(j.graph)


def test_join_disjoint_rejected():
    params = ParamHierarchy(d=18, h=2)
    a = init_clump(clique(range(9)), params)
    b = init_clump(clique(range(9, 18)), params)
    with pytest.raises(PreconditionError):
        join_clumps(a, b)
    with pytest.raises(PreconditionError):
        join_clumps(a, a)


@st.composite
def clump_chains(draw):
    m = draw(st.integers(2, 6))
    count = draw(st.integers(2, 4))
    pieces = []
    nxt = m
    prev = list(range(m))
    pieces.append(clique(prev))
    for _ in range(count - 1):
        shared = draw(st.sampled_from(sorted(set().union(*(p.vertex_set() for p in pieces)))))
        vs = [shared] + list(range(nxt, nxt + m - 1))
        nxt += m - 1
        pieces.append(clique(vs))
    return m, pieces


@given(clump_chains())
@settings(max_examples=30)
def test_join_sandwich_and_cover(chain):
    m, pieces = chain
    params = ParamHierarchy(d=2 * m, h=2)
    clumps = [init_clump(p, params) for p in pieces]
    acc = clumps[0]
    for c in clumps[1:]:
        before = (acc.k, c.k)
        try:
            acc = join_clumps(acc, c)
        except PreconditionError:
            continue
        assert max(before) <= acc.k <= sum(before)
        s = derive_sets(acc)
        # removing M(K) removes every B-edge
        assert s.b_graph.remove_vertices(s.m_union).m == 0
        # r = 1: the family is a maximum matching of the joined pieces
        assert acc.k == matching_size(acc.graph)
        if acc.core_q is not None and acc.c_core.n <= 14:
            assert acc.core_q <= exact_cut_density(acc.c_core).q_value


def test_b_intersection_report_shape():
    c = init_clump(complete_graph(9), ParamHierarchy(d=18, h=2))
    rep = b_intersection_report(c)
    assert rep["in_regime"] is False and len(rep["pieces"]) == 1


# -- unions of cores

def test_union_single_clump():
    params = ParamHierarchy(d=18, h=2, mu=Fraction(1, 9))
    c = init_clump(complete_graph(9), params)
    union, q, rep = clump_cut_dense_subgraph([c], [{0}], [None], params)
    assert union == c.c_core and rep["sound"]


def test_union_two_k9():
    params = ParamHierarchy(d=18, h=2, mu=Fraction(1, 9))
    a = init_clump(clique(range(9)), params)
    b = init_clump(clique(range(8, 17)), params)
    union, q, rep = clump_cut_dense_subgraph([a, b], [{8}, {8}], [None, b.h_family[0]], params)
    assert union.n == 17 and rep["sound"] is None
    # the exact value (enumeration on 17 vertices) still dominates the guarantee
    assert exact_cut_density(union).q_value >= q


def test_union_wrong_size():
    params = ParamHierarchy(d=18, h=2, mu=Fraction(1, 9))
    c = init_clump(complete_graph(9), params)
    with pytest.raises(PreconditionError):
        clump_cut_dense_subgraph([c], [{0, 1}], [None], params)


def test_clamped_towers():
    assert overlap_threshold(Fraction(1, 16), 3, 9) == 1
    q, below = kappa_tower(Fraction(1, 16), 2)
    assert below and q == Fraction(1, 2 ** 40)


# -- triggers

def test_trigger_large_m():
    params = ParamHierarchy(d=20, h=1)
    c = init_clump(complete_graph(20), params)
    t = path_tree(6)
    emb, _ = clump_embed_trigger([c], LARGE_M, None, t, params)
    assert check_embedding(t, c.graph, emb.map).ok


def test_trigger_large_m_precondition():
    params = ParamHierarchy(d=8, h=2)
    c = init_clump(complete_graph(4), params)
    with pytest.raises(PreconditionError):
        clump_embed_trigger([c], LARGE_M, None, path_tree(8), params)


def _fan(params):
    hub = clique(range(8))
    others = [clique([i] + list(range(8 + 7 * i, 15 + 7 * i))) for i in range(5)]
    return [init_clump(hub, params)] + [init_clump(o, params) for o in others]


def test_trigger_many_overlaps_crosses_clumps():
    params = ParamHierarchy(d=16, h=2)
    clumps = _fan(params)
    t = path_tree(10)
    emb, log = clump_embed_trigger(clumps, MANY_OVERLAPS, (0, [1, 2, 3, 4, 5]), t, params)
    ambient = clumps[0].graph
    for c in clumps[1:]:
        ambient = ambient.union(c.graph)
    assert check_embedding(t, ambient, emb.map).ok
    img = set(emb.map.values())
    assert sum(1 for c in clumps if len(img & c.graph.vertex_set()) >= 2) >= 2


def test_trigger_subdivision_chain():
    params = ParamHierarchy(d=16, h=2, delta_cap=2)
    clumps = [init_clump(clique(range(8)), params), init_clump(clique([7] + list(range(8, 15))), params),
              init_clump(clique([14] + list(range(15, 22))), params)]
    s_tree = RootedTree(0, {1: 0, 2: 1})
    conns = {(0, 1): 7, (1, 2): 14}
    pieces, _ = trimmed_pieces(clumps, s_tree, conns)
    assert pieces[0].vertex_set() & pieces[1].vertex_set() == {7}
    t = path_tree(12)
    emb, _ = clump_embed_trigger(clumps, SUBDIVISION_TREE, (s_tree, conns), t, params)
    assert set(emb.map.values()) & set(range(8, 15))


def test_trigger_unknown():
    params = ParamHierarchy(d=18, h=2)
    with pytest.raises(PreconditionError):
        clump_embed_trigger([init_clump(complete_graph(9), params)], "Other", None, path_tree(3), params)


def test_clump_json_roundtrip_fields():
    c = init_clump(complete_graph(9), ParamHierarchy(d=18, h=2))
    out = c.to_json()
    assert {"vertices", "edges", "h_family", "m_family", "c_core", "k", "cert_flags"} <= set(out)
    assert out["k"] == 4
