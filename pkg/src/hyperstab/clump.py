"""Clumps: a graph with an edge partition into cut-dense pieces, a maximum
vertex-disjoint family of regular subgraphs inside the pieces, and a
cut-dense core containing that family.

Also the sets B(K) (edges certified as covered by the regular family) and
D(K) = C(K) | B(K), joining of overlapping clumps, and the three ways a
collection of clumps yields a tree embedding.
"""
import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction

from .cutdense import certify, exact_cut_density
from .embedding import Embedding, check_embedding
from .errors import (ConstructionFailure, EmbedFailure, GraphValidationError, PreconditionError)
from .graph import Graph, RootedTree, is_cover
from .params import clamp_log2, kappa_tower, log2_factorial, overlap_threshold
from .regular import UNDER_BUDGET, find_regular_subgraph, max_disjoint_regular_family
from .trees import embed_cut_dense, embed_tree_of_pieces

LARGE_M = "LargeM"
MANY_OVERLAPS = "ManyOverlaps"
SUBDIVISION_TREE = "SubdivisionTree"
TRIGGERS = (LARGE_M, MANY_OVERLAPS, SUBDIVISION_TREE)

EXACT_CROSSCHECK = 16


def _graph_json(g):
    return {"vertices": list(g.vertices), "edges": [list(e) for e in g.edges()]}


@dataclass(frozen=True)
class Clump:
    graph: Graph
    h_family: tuple
    m_family: object  # RegularFamily; hosts index into h_family
    c_core: Graph
    k: int
    params: object
    cert_flags: tuple = ()
    core_q: Fraction = None  # certified cut-density of c_core

    def m_vertices(self):
        return self.m_family.vertex_union()

    def to_json(self):
        core = _graph_json(self.c_core)
        if self.core_q is not None:
            core["q"] = str(self.core_q)
        return {
            **_graph_json(self.graph),
            "h_family": [_graph_json(h) for h in self.h_family],
            "m_family": self.m_family.to_json(),
            "c_core": core,
            "k": self.k,
            "cert_flags": list(self.cert_flags),
        }


@dataclass(frozen=True)
class DerivedSets:
    m_union: frozenset
    b_graph: Graph
    d_graph: Graph

    @property
    def d_vertices(self):
        return self.d_graph.vertex_set()


def _core_flags(params, k, q):
    """Compare the certified core value with the required kappa tower."""
    bound, below = kappa_tower(params.kappa, k, params.q_min_log2)
    flags = []
    if below:
        flags.append("bound-below-floor")
    if q < bound:
        flags.append(f"core-below-guarantee:q={q}")
    return flags


def init_clump(h, params, cert=None):
    """Single-piece clump: H(K) = {h}, C(K) = h, maximum regular family inside h."""
    m = params.m
    if h.n != m:
        raise PreconditionError(f"piece has order {h.n}, clumps use order m={m}")
    cert = cert or certify(h)
    if cert.q_value < params.p:
        raise PreconditionError(f"piece certified only {cert.q_value}-cut-dense, below p={params.p}")
    r = params.r
    fam = max_disjoint_regular_family([h], r, budget=params.budget)
    if fam.k < 1:
        raise ConstructionFailure(f"no {r}-regular subgraph in a {m}-vertex cut-dense piece",
                                  {"r": r, "flag": fam.maximal_flag})
    assert fam.k <= m // r
    flags = [fam.maximal_flag] + _core_flags(params, fam.k, cert.q_value)
    return Clump(h, (h,), fam, h, fam.k, params, tuple(flags), cert.q_value)


def derive_sets(clump, ambient=None):
    """M(K) vertex union, B(K) and D(K)."""
    k_graph = clump.graph
    if ambient is not None and not k_graph.is_subgraph_of(ambient):
        raise PreconditionError("clump graph is not inside the ambient graph")
    p, m = clump.params.p, clump.params.m
    mv = clump.m_vertices()
    need = p * m / 2  # exact rational threshold
    b_edges = set(clump.m_family.union_graph().edges())
    for v in k_graph.vertices:
        if v in mv:
            continue
        into = k_graph.adj(v) & mv
        if len(into) >= need:
            b_edges.update((min(u, v), max(u, v)) for u in into)
    b = Graph(set(mv) | {x for e in b_edges for x in e}, b_edges)
    if not is_cover(b, mv):
        raise GraphValidationError("M(K) fails to cover B(K)")
    # the handshake bound holds whenever members are at least p^13 m regular
    lower = p ** 13 * m
    if clump.params.r >= lower and k_graph.m < lower * b.n / 10:
        raise GraphValidationError(f"e(K)={k_graph.m} below p^13 m |B(K)|/10={float(lower * b.n / 10):.3f}")
    d = clump.c_core.union(b)
    return DerivedSets(frozenset(mv), b, d)


def b_intersection_report(clump, sets=None):
    """Measured counterparts of the bounds e(H - B) <= p^2 m^2, |V(H) & V(M)| >= pm/2
    and e(K - B) <= 4p e(K).  Only claimed when r = floor(p^13 m) >= 1."""
    sets = sets or derive_sets(clump)
    p, m = clump.params.p, clump.params.m
    in_regime = math.floor(p ** 13 * m) >= 1
    b_edges = set(sets.b_graph.edges())
    rows = []
    for h in clump.h_family:
        outside = sum(1 for e in h.edges() if e not in b_edges)
        meet = len(h.vertex_set() & sets.m_union)
        rows.append({"e_outside_b": outside, "m_meet": meet,
                     "ok": outside <= p * p * m * m and meet >= p * m / 2})
    k_outside = sum(1 for e in clump.graph.edges() if e not in b_edges)
    total_ok = k_outside <= 4 * p * clump.graph.m
    return {"in_regime": in_regime, "pieces": rows, "e_outside_b": k_outside,
            "ok": all(r["ok"] for r in rows) and total_ok}


def _edge_disjoint(g1, g2):
    small, big = (g1, g2) if g1.m <= g2.m else (g2, g1)
    return not any(big.has_edge(u, v) for u, v in small.edges())


def join_clumps(k1, k2, params=None):
    """Merge two edge-disjoint clumps whose D-sets overlap enough."""
    params = params or k1.params
    if not _edge_disjoint(k1.graph, k2.graph):
        raise PreconditionError("clumps share an edge")
    cap = 1 / params.kappa
    if k1.k > cap or k2.k > cap:
        raise PreconditionError(f"k values {k1.k}, {k2.k} exceed 1/kappa={cap}")
    d1, d2 = derive_sets(k1), derive_sets(k2)
    overlap = d1.d_vertices & d2.d_vertices
    need = overlap_threshold(params.kappa, max(k1.k, k2.k), params.m)
    if len(overlap) < need:
        raise PreconditionError(f"D-overlap {len(overlap)} below threshold {need}")
    if k2.k > k1.k:
        k1, k2 = k2, k1
    hosts = tuple(k1.h_family) + tuple(k2.h_family)
    seed = list(zip(k1.m_family.members, k1.m_family.hosts))
    fam = max_disjoint_regular_family(hosts, params.r, budget=params.budget, seed_members=seed)
    graph = k1.graph.union(k2.graph)
    flags = []
    budget_limited = UNDER_BUDGET in (fam.maximal_flag, k1.m_family.maximal_flag, k2.m_family.maximal_flag)
    if fam.k <= k1.k:
        # no growth: the larger clump's family is still maximum
        if fam.maximal_flag == UNDER_BUDGET:
            flags.append("no-growth-under-budget")
        out = Clump(graph, hosts, k1.m_family, k1.c_core, k1.k, params,
                    tuple(dict.fromkeys(flags + [f for f in k1.cert_flags if f != UNDER_BUDGET]
                                        + [k1.m_family.maximal_flag])), k1.core_q)
    else:
        i_size = overlap_threshold(params.kappa, k1.k, params.m)
        inter = sorted(overlap)[:i_size]
        verts = set(k1.c_core.vertices) | set(k2.c_core.vertices) | set(inter)
        for hi in fam.hosts:
            verts |= hosts[hi].vertex_set()
        core = graph.subgraph(verts)
        cert = certify(core)
        flags += [fam.maximal_flag, f"core-{cert.kind}"] + _core_flags(params, fam.k, cert.q_value)
        if core.n > 4 ** fam.k * params.m:
            flags.append("core-order-above-4^k m")
        out = Clump(graph, hosts, fam, core, fam.k, params, tuple(flags), cert.q_value)
    if not k1.k <= out.k <= k1.k + k2.k:
        if not budget_limited:
            raise GraphValidationError(f"k sandwich violated: {out.k} not in [{k1.k}, {k1.k + k2.k}]")
        out = dataclasses.replace(out, cert_flags=out.cert_flags + ("k-sandwich-under-budget",))
    return out


def union_bound_log2(kappa, mu, k, t):
    """log2 of kappa^((10k)!) mu^(2 k t^2)."""
    factor = log2_factorial(10 * k)
    tower = math.log2(kappa) * 2.0 ** factor if factor < 1000 else -math.inf
    return tower + 2 * k * t * t * math.log2(mu)


def clump_cut_dense_subgraph(clumps, i_sets, h_choices, params, mu=None, exact_limit=EXACT_CROSSCHECK):
    """Union of cores, chosen pieces and small attachment sets I_i drawn from
    D(K_1) & D(K_i), with its guaranteed cut-density.

    Returns (graph, guaranteed_q, report); the report carries the exact
    value when the union is small enough to enumerate.
    """
    t = len(clumps)
    if t == 0 or len(i_sets) != t or len(h_choices) != t:
        raise PreconditionError("need one I-set and one piece choice per clump")
    mu = Fraction(params.mu if mu is None else mu)
    size = max(1, math.ceil(mu * params.m))
    derived = [derive_sets(c) for c in clumps]
    first = derived[0].d_vertices
    verts = set()
    for c, s, i_set, h in zip(clumps, derived, i_sets, h_choices):
        i_set = set(i_set)
        if len(i_set) != size:
            raise PreconditionError(f"|I|={len(i_set)} but mu m rounds to {size}")
        if not i_set <= first & s.d_vertices:
            raise PreconditionError("I-set leaves D(K_1) & D(K_i)")
        if h is not None and h not in c.h_family:
            raise PreconditionError("chosen piece is not in the clump's H-family")
        verts |= set(c.c_core.vertices) | i_set
        if h is not None:
            verts |= h.vertex_set()
    ambient = clumps[0].graph
    for c in clumps[1:]:
        ambient = ambient.union(c.graph)
    union = ambient.subgraph(verts)
    k = max(c.k for c in clumps)
    log2_bound = union_bound_log2(params.kappa, mu, k, t)
    q, below = clamp_log2(log2_bound, params.q_min_log2)
    report = {"t": t, "k": k, "order": union.n, "log2_bound": log2_bound, "below_floor": below,
              "exact": None, "sound": None}
    if 2 <= union.n <= exact_limit:
        exact = exact_cut_density(union).q_value
        report["exact"] = str(exact)
        report["sound"] = exact >= q
    return union, q, report


# -- embedding triggers

def _lift_failure(trigger, exc, extra=None):
    report = list(exc.report) + ([extra] if extra else [])
    return EmbedFailure(f"{trigger}: {exc}", exc.partial, f"{trigger}/{exc.stage}", report)


def _half_eps(params):
    # the (2+eps)d hypothesis is the (2+2eps')|t| one with eps' = eps/2
    return dataclasses.replace(params, epsilon=params.epsilon / 2, strict=False, warnings=[])


def boosted_regular(host, need, fallback, budget=50_000):
    """Highest-degree regular subgraph of host with at least need vertices.

    Families with r = max(1, floor(p^13 m)) are matchings at small m, which
    host no greedy step, so denser regular subgraphs are tried first.
    Returns (graph, degree).
    """
    for r in range(host.max_degree(), 1, -1):
        found = find_regular_subgraph(host, r, budget=budget)
        if found.found and found.graph.n >= need:
            return found.graph, r
    return fallback, 1 if fallback.m else 0


def _large_m(clumps, payload, t, params, seed):
    d = len(t)
    need = params.C * d
    if payload is None:
        payload = next((i for i, c in enumerate(clumps) if len(c.m_vertices()) >= need), None)
        if payload is None:
            raise PreconditionError(f"no clump has |M(K)| >= (2+eps)d={float(need)}")
    c = clumps[payload]
    if len(c.m_vertices()) < need:
        raise PreconditionError(f"|M(K)|={len(c.m_vertices())} < (2+eps)d={float(need)}")
    reg, deg = boosted_regular(c.c_core, need, c.m_family.union_graph())
    rec = {"trigger": LARGE_M, "clump": payload, "regular_degree": deg, "regular_order": reg.n}
    try:
        emb, log = embed_cut_dense(c.c_core, reg, t, _half_eps(params), seed=seed, q=c.core_q)
    except EmbedFailure as exc:
        raise _lift_failure(LARGE_M, exc, rec) from exc
    return emb, [rec] + log


def _best_piece(c):
    mv = c.m_vertices()
    return max(c.h_family, key=lambda h: len(h.vertex_set() & mv))


def _many_overlaps(clumps, payload, t, params, seed):
    hub, others = payload
    others = [j for j in others if j != hub]
    d = len(t)
    derived = {j: derive_sets(clumps[j]) for j in [hub] + others}
    need = max(1, math.ceil(params.gamma * params.m))
    hub_d = derived[hub].d_vertices
    for j in others:
        if len(hub_d & derived[j].d_vertices) < need:
            raise PreconditionError(f"clump {j} meets the hub's D-set in fewer than gamma m={need} vertices")
    rec = {"trigger": MANY_OVERLAPS, "hub": hub, "others": len(others)}
    wanted = params.C * params.h / params.p ** 3
    if len(others) < wanted:
        rec["caveat"] = f"overlap-count-below-hypothesis: {len(others)} < C h/p^3={float(wanted):.1f}"
    order = [hub] + others
    chosen = [clumps[j] for j in order]
    pieces = [_best_piece(c) for c in chosen]
    i_sets = [sorted(hub_d & derived[j].d_vertices)[:need] for j in order]
    union, q_guar, rep = clump_cut_dense_subgraph(chosen, i_sets, pieces, params, mu=params.gamma)
    rec["union"] = rep
    h_union = pieces[0]
    for h in pieces[1:]:
        h_union = h_union.union(h)
    fam = max_disjoint_regular_family([h_union], params.r, budget=params.budget)
    reg, deg = boosted_regular(h_union, params.C * d, fam.union_graph())
    rec["regular_order"] = reg.n
    rec["regular_degree"] = deg
    if reg.n < params.C * d:
        raise EmbedFailure(f"merged regular subgraph has {reg.n} < (2+eps)d vertices", None,
                           f"{MANY_OVERLAPS}/regular-merge", rec)
    cert = certify(union)
    rec["union_q"] = str(cert.q_value)
    try:
        emb, log = embed_cut_dense(union, reg, t, _half_eps(params), seed=seed, q=cert.q_value)
    except (EmbedFailure, PreconditionError) as exc:
        if isinstance(exc, PreconditionError):
            raise EmbedFailure(str(exc), None, f"{MANY_OVERLAPS}/precondition", rec) from exc
        raise _lift_failure(MANY_OVERLAPS, exc, rec) from exc
    return emb, [rec] + log


def trimmed_pieces(clumps, s_tree, connectors):
    """Restrict each clump in s_tree to C(K) plus its connectors, minus every
    other D-overlap, so neighbouring pieces share exactly their connector."""
    nodes = list(s_tree.vertices)
    conn = {frozenset(e): u for e, u in connectors.items()}
    tree_edges = {frozenset((c, p)) for c, p in s_tree.parent.items()}
    if set(conn) != tree_edges:
        raise PreconditionError("connectors must label exactly the edges of the clump tree")
    if len(set(conn.values())) != len(conn):
        raise PreconditionError("connector vertices must be distinct")
    derived = {i: derive_sets(clumps[i]) for i in nodes}
    for e, u in conn.items():
        a, b = tuple(e)
        if u not in derived[a].d_vertices or u not in derived[b].d_vertices:
            raise PreconditionError(f"connector {u} is not in both D-sets of {a} and {b}")
    gates = {i: {u for e, u in conn.items() if i in e} for i in nodes}
    pieces = {}
    for i in nodes:
        dv = derived[i].d_vertices
        keep = set(clumps[i].c_core.vertices) | gates[i]
        others = set()
        for j in nodes:
            if j != i:
                others |= dv & derived[j].d_vertices
        pieces[i] = derived[i].d_graph.subgraph(keep - (others - gates[i]))
    return pieces, conn


def _subdivision_tree(clumps, payload, t, params, seed):
    s_tree, connectors = payload
    pieces, conn = trimmed_pieces(clumps, s_tree, connectors)
    nodes = list(s_tree.vertices)
    index = {v: i for i, v in enumerate(nodes)}
    s_rel = RootedTree(index[s_tree.root], {index[c]: index[p] for c, p in s_tree.parent.items()})
    conn_rel = {tuple(sorted(index[x] for x in e)): u for e, u in conn.items()}
    plist = [pieces[v] for v in nodes]
    rec = {"trigger": SUBDIVISION_TREE, "pieces": [p.n for p in plist]}
    qs = [certify(p).q_value if p.n >= 2 else Fraction(0) for p in plist]
    rec["piece_q"] = [str(q) for q in qs]
    if min(qs) <= 0:
        raise EmbedFailure("a trimmed piece is not cut-dense", None, f"{SUBDIVISION_TREE}/trim", rec)
    try:
        emb, log = embed_tree_of_pieces(plist, s_rel, conn_rel, t, params, q=min(qs))
    except EmbedFailure as exc:
        raise _lift_failure(SUBDIVISION_TREE, exc, rec) from exc
    return emb, [rec] + log


def clump_embed_trigger(clumps, trigger, payload, t, params, seed=0):
    """Embed t using one of the three clump configurations.

    LargeM: payload is a clump index (or None to pick one) whose regular
    family has at least (2+eps)d vertices.  ManyOverlaps: payload is
    (hub index, other indices) whose D-sets meet the hub's in gamma m
    vertices.  SubdivisionTree: payload is (RootedTree over clump indices,
    {edge: connector vertex}).

    Returns (Embedding, log).  The embedding is re-validated against the
    union of the clump graphs.
    """
    if t.max_degree() > params.delta_cap:
        raise PreconditionError(f"tree max degree {t.max_degree()} exceeds {params.delta_cap}")
    if trigger == LARGE_M:
        emb, log = _large_m(clumps, payload, t, params, seed)
    elif trigger == MANY_OVERLAPS:
        emb, log = _many_overlaps(clumps, payload, t, params, seed)
    elif trigger == SUBDIVISION_TREE:
        emb, log = _subdivision_tree(clumps, payload, t, params, seed)
    else:
        raise PreconditionError(f"unknown trigger {trigger!r}; expected one of {TRIGGERS}")
    ambient = clumps[0].graph
    for c in clumps[1:]:
        ambient = ambient.union(c.graph)
    # cores and D-sets only use clump edges, so the union hosts the copy
    chk = check_embedding(t, ambient, emb.map)
    if not chk.ok:
        raise GraphValidationError("trigger embedding invalid in the clump union: " + "; ".join(chk.reasons))
    return Embedding(t, ambient, emb.map, None, emb.notes), log
