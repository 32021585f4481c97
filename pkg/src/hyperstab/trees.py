"""Tree-side algorithms: splitting, external vertices, greedy, connector-tree
and expander embeddings, and the two inductive embeddings into cut-dense
graphs (one with a large regular subgraph, one into a tree of pieces).
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .cutdense import certify
from .embedding import Embedding, check_embedding, require_valid
from .errors import (ConstructionFailure, EmbedFailure, GraphValidationError, OverlapError,
                     PreconditionError)
from .graph import Graph, RootedTree, core_peel
from .rng import make_rng


# -- greedy embedding

def _greedy_extend(g, t, mapping, allowed=None):
    """Extend a partial map along BFS order, lowest unused neighbour first.

    Returns (mapping, stuck tree vertex or None).  mapping must already hold
    the root.
    """
    used = set(mapping.values())
    for x in t.bfs_order():
        if x in mapping:
            continue
        img = mapping[t.parent[x]]
        choice = None
        for w in sorted(g.adj(img)):
            if w not in used and (allowed is None or w in allowed):
                choice = w
                break
        if choice is None:
            return mapping, x
        mapping[x] = choice
        used.add(choice)
    return mapping, None


def greedy_precondition(g, t, anchor):
    """Reasons why the minimum-degree condition for greedy embedding fails."""
    if anchor not in g:
        return [f"anchor {anchor} not in host"]
    out = []
    e = t.num_edges
    low = [v for v in g.vertices if v != anchor and g.degree(v) < e]
    if low:
        out.append(f"vertex {low[0]} has degree {g.degree(low[0])} < e(t)={e}")
    if e and g.degree(anchor) < t.max_degree():
        out.append(f"anchor degree {g.degree(anchor)} < max tree degree {t.max_degree()}")
    return out


def greedy_embed(g, t, anchor):
    """Copy of t rooted at anchor, built vertex by vertex in BFS order.

    Every non-anchor vertex needs degree at least e(t) (counted in g) and the
    anchor needs degree at least the maximum degree of t.
    """
    bad = greedy_precondition(g, t, anchor)
    if bad:
        raise PreconditionError("; ".join(bad))
    mapping, stuck = _greedy_extend(g, t, {t.root: anchor})
    if stuck is not None:
        raise AssertionError(f"greedy embedding stuck at {stuck} although the degree condition held")
    return require_valid(Embedding(t, g, mapping, anchor))


def _try_greedy(g, t, anchor, allowed=None):
    """Greedy attempt without the precondition; returns mapping or None."""
    if anchor not in g:
        return None
    mapping, stuck = _greedy_extend(g, t, {t.root: anchor}, allowed)
    return None if stuck is not None else mapping


# -- splitting

@dataclass(frozen=True)
class SplitResult:
    q_subtree: RootedTree
    components: list
    externals: list
    lam: Fraction
    delta_cap: int

    def bounds(self):
        n = len(self.q_subtree) + sum(len(c) - 1 for c in self.components)
        return (1 - 2 * self.lam) * n, (1 - self.lam) * n + 2 * self.delta_cap


def split_tree(t, lam, delta_cap):
    """Subtree Q containing the root with small hanging components.

    Finds the first BFS layer whose hanging subtrees all have at most lam*n
    vertices, takes a vertex y one layer up with a big subtree, and adds the
    subtrees of y's children to the rest of the tree while the size stays
    below (1-lam)n + 2 delta_cap.
    """
    lam = Fraction(lam)
    if not 0 <= lam < 1:
        raise PreconditionError("lambda must lie in [0, 1)")
    if t.max_degree() > delta_cap:
        raise PreconditionError(f"tree max degree {t.max_degree()} exceeds {delta_cap}")
    n = len(t)
    cap = (1 - lam) * n + 2 * delta_cap
    if cap >= n:
        return SplitResult(t, [], [], lam, delta_cap)
    size = t.subtree_sizes()
    depth = t.depth()
    layers = {}
    for v in t.bfs_order():
        layers.setdefault(depth[v], []).append(v)
    level = 1
    while level in layers and any(size[v] > lam * n for v in layers[level]):
        level += 1
    y = min(v for v in layers[level - 1] if size[v] > lam * n)
    kids = t.children(y)
    below = set()
    for c in kids:
        below.update(t.descendants(c))
    q_vertices = (set(t.vertices) - below) | set(kids)
    parts = [t.subtree_at(c) for c in kids]
    s = 0
    while s < len(parts) and len(q_vertices) + len(parts[s]) - 1 <= cap:
        q_vertices |= set(parts[s].vertices)
        s += 1
    comps = [p for p in parts[s:] if len(p) > 1]
    return SplitResult(t.induced(q_vertices), comps, [p.root for p in comps], lam, delta_cap)


def external_vertices(t, sub):
    """Pairs (x, component) for the vertices of sub touching edges outside it.

    sub must be a subtree of t containing t's root; each component is rooted
    at its external vertex.
    """
    if t.root not in sub:
        raise PreconditionError("subtree must contain the root")
    inside = set(sub.vertices)
    for c, p in sub.parent.items():
        if t.parent.get(c) != p and t.parent.get(p) != c:
            raise PreconditionError(f"({p}, {c}) is not an edge of t")
    out = []
    for x in t.bfs_order():
        if x not in inside:
            continue
        hanging = [c for c in t.children(x) if c not in inside]
        if not hanging:
            continue
        verts = {x}
        for c in hanging:
            verts.update(t.descendants(c))
        out.append((x, t.induced(verts)))
    return out


# -- combining

def combine_embeddings(base, parts, host=None):
    """Union of a base embedding and embeddings of the components hanging off it.

    Part i must be rooted at a vertex of the base tree and agree with the base
    there; images may meet only in that shared vertex.
    """
    if not parts:
        return base
    mapping = dict(base.map)
    parent = dict(base.tree.parent)
    hosts = [base.host]
    images = [set(base.map.values())]
    base_vertices = set(base.tree.vertices)
    seen_vertices = set()
    for i, part in enumerate(parts, start=1):
        y = part.tree.root
        if y not in base_vertices:
            raise OverlapError(f"part {i} is rooted at {y}, which is not in the base tree", (0, i))
        if part.map[y] != base.map[y]:
            raise OverlapError(f"part {i} maps its root {y} to {part.map[y]}, base uses {base.map[y]}", (0, i))
        pv = set(part.tree.vertices) - {y}
        if pv & base_vertices or pv & seen_vertices:
            raise OverlapError(f"part {i} shares tree vertices with earlier parts", (0, i))
        seen_vertices |= pv
        img = set(part.map.values())
        shared = part.map[y]
        for j, prev in enumerate(images):
            bad = (img & prev) - {shared}
            if bad:
                raise OverlapError(f"images of parts {j} and {i} meet in {sorted(bad)[:3]}", (j, i))
        images.append(img)
        hosts.append(part.host)
        parent.update(part.tree.parent)
        mapping.update(part.map)
    if host is None:
        host = hosts[0]
        for h in hosts[1:]:
            if h is not host and h != host:
                host = host.union(h)
    tree = RootedTree(base.tree.root, parent)
    notes = tuple(n for e in [base, *parts] for n in e.notes)
    return require_valid(Embedding(tree, host, mapping, base.anchor, notes))


# -- connector trees

@dataclass(frozen=True)
class ConnectorTree:
    tree: RootedTree
    height: int
    leaf_targets: frozenset
    embedding: Embedding
    arity: int
    diagnostics: dict = field(default_factory=dict)

    def leaves(self):
        return [v for v in self.tree.vertices if not self.tree.children(v)]


def _assign_children(g, leaves, pool, arity, used):
    """arity fresh pool-neighbours for each leaf: greedy, then bipartite matching."""
    out = {}
    taken = set()
    for x in leaves:
        got = [w for w in sorted(g.adj(x)) if w in pool and w not in used and w not in taken][:arity]
        if len(got) < arity:
            break
        out[x] = got
        taken.update(got)
    else:
        return out
    b = nx.Graph()
    slots = [(x, i) for x in leaves for i in range(arity)]
    b.add_nodes_from(slots, bipartite=0)
    for x in leaves:
        for w in g.adj(x):
            if w in pool and w not in used:
                for i in range(arity):
                    b.add_edge((x, i), ("v", w))
    match = nx.bipartite.hopcroft_karp_matching(b, top_nodes=slots)
    if any(s not in match for s in slots):
        return None
    return {x: sorted(match[(x, i)][1] for i in range(arity)) for x in leaves}


def connector_tree(g, anchor, u, delta_cap, q, min_targets=None, arity=None):
    """Perfect arity-ary tree rooted at anchor with every leaf in u.

    Layers grow outward from the anchor (vertices with many neighbours in the
    previous layer join), then target sets are filtered backward from u until
    half of one lies next to the anchor; the tree is then grown one level at a
    time into those sets.  Thresholds are clamped below at 1.
    """
    q = Fraction(q)
    arity = delta_cap if arity is None else arity
    u = frozenset(x for x in u if x in g and x != anchor)
    need = arity + 1 if min_targets is None else min_targets
    if anchor not in g:
        raise PreconditionError(f"anchor {anchor} not in host")
    if len(u) < need or len(u) < arity:
        raise PreconditionError(f"target set has {len(u)} vertices, need {max(need, arity)}")
    n = g.n
    nv = set(g.adj(anchor))
    grow = max(Fraction(1), q ** 4 * n / 16)
    full = n - q * q * n / 4
    layers = [None, set(nv)]
    diag = {"grow_threshold": str(grow), "layer_sizes": [len(nv)]}
    while len(layers[-1]) < full:
        prev = layers[-1]
        nxt = nv | {x for x in g.vertices if len(g.adj(x) & prev) >= grow}
        if nxt == prev:
            diag["fail"] = "layer growth stalled"
            raise ConstructionFailure(f"layers stopped growing at {len(prev)} of {n} vertices", diag)
        layers.append(nxt)
        diag["layer_sizes"].append(len(nxt))
    t0 = len(layers) - 1
    targets = {t0 + 1: set(u)}
    k = t0
    while True:
        a_next = targets[k + 1]
        if 2 * len(a_next & nv) >= len(a_next):
            s = k + 1
            break
        thr = max(Fraction(1), q ** 4 * len(a_next) / 128)
        a_k = {x for x in layers[k] if len(g.adj(x) & a_next) >= thr}
        if not a_k:
            diag["fail"] = f"target set at layer {k} empty"
            raise ConstructionFailure("backward filtering emptied a target set", diag)
        targets[k] = a_k
        k -= 1
    diag["t0"] = t0
    diag["s"] = s
    diag["target_sizes"] = {str(i): len(a) for i, a in sorted(targets.items())}
    first = sorted(targets[s] & nv)[:arity]
    if len(first) < arity:
        diag["fail"] = "too few targets next to the anchor"
        raise ConstructionFailure("cannot start the connector star", diag)
    children = {anchor: first}
    used = {anchor, *first}
    frontier = first
    for level in range(s + 1, t0 + 2):
        got = _assign_children(g, frontier, targets[level], arity, used)
        if got is None:
            diag["fail"] = f"level {level} could not be filled"
            raise ConstructionFailure("connector growth ran out of room", diag)
        children.update(got)
        frontier = [w for x in frontier for w in got[x]]
        used.update(frontier)
    # abstract labels in BFS order; labels map to host vertices
    order = [anchor]
    i = 0
    while i < len(order):
        order.extend(children.get(order[i], []))
        i += 1
    index = {v: j for j, v in enumerate(order)}
    parent = {index[c]: index[p] for p, cs in children.items() for c in cs}
    tree = RootedTree(0, parent)
    emb = require_valid(Embedding(tree, g, {j: v for j, v in enumerate(order)}, anchor))
    height = t0 + 2 - s
    leaves = [v for v in tree.vertices if not tree.children(v)]
    assert all(emb.map[x] in u for x in leaves), "connector leaf outside the target set"
    assert all(len(tree.children(v)) in (0, arity) for v in tree.vertices)
    return ConnectorTree(tree, height, u, emb, arity, diag)


def embed_maximal_subtree(t, host_tree):
    """Greedy maximal subtree of t (containing its root) mapped into host_tree.

    The root goes to host_tree's root and each child to an unused child of its
    parent's image.  Returns (subtree, mapping).
    """
    mapping = {t.root: host_tree.root}
    used = {host_tree.root}
    for x in t.bfs_order()[1:]:
        p = t.parent[x]
        if p not in mapping:
            continue
        free = [c for c in host_tree.children(mapping[p]) if c not in used]
        if free:
            mapping[x] = free[0]
            used.add(free[0])
    return t.induced(mapping), mapping


def _maximal_into_connector(t, conn):
    """Map a maximal subtree of t through a connector tree into the host.

    Returns (sub, host mapping, externals at leaves, externals elsewhere).
    With arity >= max degree of t every external vertex lands on a leaf.
    """
    sub, local = embed_maximal_subtree(t, conn.tree)
    ext = external_vertices(t, sub)
    at_leaf, inner = [], []
    for x, comp in ext:
        (at_leaf if not conn.tree.children(local[x]) else inner).append((x, comp))
    if conn.arity >= t.max_degree():
        assert not inner, "external vertex of a maximal subtree is not on a leaf"
    return sub, {x: conn.embedding.map[v] for x, v in local.items()}, at_leaf, inner


# -- expander embedding

def _backtrack_embed(g, t, budget, anchor=None):
    """Chronological backtracking in BFS order; the first branch is the greedy one.

    Returns (mapping or None, deepest partial mapping, nodes used, exhausted).
    """
    order = t.bfs_order()
    tdeg = {x: t.degree(x) for x in order}
    roots = [anchor] if anchor is not None else [v for v in g.vertices if g.degree(v) >= tdeg[order[0]]]
    mapping = {}
    used = set()
    cands = [None] * len(order)
    cands[0] = list(reversed(roots))
    best = {}
    nodes = 0
    i = 0
    while True:
        if i == len(order):
            return dict(mapping), dict(mapping), nodes, True
        if i < 0:
            return None, best, nodes, True
        x = order[i]
        if x in mapping:
            used.discard(mapping.pop(x))
        if not cands[i]:
            i -= 1
            continue
        v = cands[i].pop()
        nodes += 1
        if nodes > budget:
            return None, best, nodes, False
        mapping[x] = v
        used.add(v)
        if len(mapping) > len(best):
            best = dict(mapping)
        i += 1
        if i < len(order):
            y = order[i]
            img = mapping[t.parent[y]]
            cands[i] = sorted((w for w in g.adj(img) if w not in used and g.degree(w) >= tdeg[y]),
                              reverse=True)


def expander_embed(g, t, delta_cap, strict=True, budget=200_000, seed=0, check=None):
    """Embed t by greedy growth with backtracking, after testing expansion.

    The expansion test asks |N(S) - S| >= 10 delta_cap |S| for |S| <= 10|t|.
    With strict=False a failed test is recorded in the notes instead of
    raising.  check may carry a precomputed expansion result.
    """
    from .cutdense import expansion_check
    if t.max_degree() > delta_cap:
        raise PreconditionError(f"tree max degree {t.max_degree()} exceeds {delta_cap}")
    if check is None:
        check = expansion_check(g, 10 * delta_cap, 10 * len(t), seed=seed)
    notes = []
    if not check.passed:
        msg = f"expansion below {10 * delta_cap} at set {list(check.witness)[:6]}"
        if strict:
            raise PreconditionError(msg)
        notes.append("expansion-precondition-failed: " + msg)
    elif not check.exhaustive:
        notes.append("expansion-sampled")
    mapping, partial, nodes, exhausted = _backtrack_embed(g, t, budget)
    if mapping is None:
        stage = "backtracking exhausted" if exhausted else "budget exceeded"
        raise EmbedFailure(f"expander embedding failed: {stage}", partial, "expander",
                           {"nodes": nodes, "notes": notes})
    return require_valid(Embedding(t, g, mapping, None, tuple(notes)))


# -- embedding into a cut-dense graph with a large regular subgraph

def _log_q_sample_plus_more(alpha, q):
    """log2 of alpha^(q^-4) q^5: the cut-density kept when a random sample is enlarged."""
    return float(q) ** -4 * math.log2(alpha) + 5 * math.log2(q)


def draw_reservoirs(vertices, count, rate, rng):
    """count disjoint rate-random subsets: each vertex joins set floor(u/rate) if below count."""
    sets = [[] for _ in range(count)]
    for v in vertices:
        j = int(rng.random() / float(rate))
        if j < count:
            sets[j].append(v)
    return [frozenset(s) for s in sets]


class _DenseEmbedder:
    def __init__(self, g, r_sub, params, q, seed):
        self.g = g
        self.r = r_sub
        self.params = params
        self.delta = params.delta_cap
        self.q = q
        self.seed = seed
        self.log = []

    def setup(self, levels):
        p = self.params
        count = self.delta * levels
        rate = min(p.alpha, Fraction(1, 4 * count))
        n = self.g.n
        for attempt in range(p.retries):
            rng = make_rng(self.seed, 0xA9, attempt)
            sets = draw_reservoirs(self.g.vertices, count, rate, rng)
            sizes = [len(s) for s in sets]
            if min(sizes) >= math.floor(rate * n / 2) and max(sizes) <= 2 * rate * n + 1:
                self.res = {(i, j): sets[(j - 1) * self.delta + i - 1]
                            for i in range(1, self.delta + 1) for j in range(1, levels + 1)}
                self.all_res = frozenset().union(*sets)
                self.log.append({"stage": "reservoirs", "attempt": attempt, "rate": str(rate), "sizes": sizes})
                self.rate = rate
                return
        raise EmbedFailure("reservoir draws kept underfilling", None, "reservoirs",
                           {"rate": str(rate), "attempts": p.retries})

    def level_vertices(self, k):
        out = set(self.g.vertices) - self.all_res
        for (i, j), s in self.res.items():
            if j <= k:
                out |= s
        return out

    def base(self, t, k):
        core = self.r.remove_vertices(self.all_res)
        for v in core.vertices:
            if core.degree(v) >= t.max_degree() or len(t) == 1:
                mapping = _try_greedy(core, t, v)
                if mapping is not None:
                    self.log.append({"stage": "base", "level": k, "order": len(t)})
                    return Embedding(t, self.g, mapping)
        # the regular part is too thin at this size: try the level's host graph
        host = self.g.subgraph(self.level_vertices(k))
        for v in sorted(host.vertices, key=lambda x: (-host.degree(x), x)):
            mapping = _try_greedy(host, t, v)
            if mapping is not None:
                self.log.append({"stage": "base", "level": k, "order": len(t), "fallback": "level-host"})
                return Embedding(t, self.g, mapping)
        raise EmbedFailure(f"greedy base case failed for a {len(t)}-vertex tree", None, "greedy-base",
                           {"level": k, "core_order": core.n, "core_min_degree": core.min_degree()})

    def embed(self, t, k):
        core = self.r.remove_vertices(self.all_res)
        if k <= 2 or (core.n and core.min_degree() >= t.num_edges):
            return self.base(t, k)
        sp = split_tree(t, Fraction(2, k), self.delta)
        if not sp.components:
            return self.embed(sp.q_subtree, k - 1)
        f0 = self.embed(sp.q_subtree, k - 1)
        used = set(f0.map.values())
        parts = []
        level = self.level_vertices(k - 1)
        for i, comp in enumerate(sp.components, start=1):
            y = comp.root
            hv = (level - used) | self.res[(i, k)] | {f0.map[y]}
            parts.append(self.step(comp, self.g.subgraph(hv), f0.map[y], k, i))
            used |= set(parts[-1].map.values())
        return combine_embeddings(f0, parts, self.g)

    def step(self, t, h, anchor, k, i):
        """Connector tree into the regular part of h, then greedy completion."""
        r_h = self.r.subgraph(h.vertices)
        r_core = core_peel(r_h, max(1, t.num_edges))
        if r_core.n < len(t):
            r_core = r_h
        log2_q = _log_q_sample_plus_more(self.rate, self.q)
        q_h = Fraction(2.0 ** max(log2_q, self.params.q_min_log2)).limit_denominator(2 ** 62)
        rec = {"stage": "step", "level": k, "branch": i, "host": h.n, "regular_part": r_core.n,
               "q_guarantee_log2": log2_q}
        # the connector only needs the anchor's component of h
        reach = next(c for c in h.components() if anchor in c)
        if len(reach) < h.n:
            rec["trimmed"] = h.n - len(reach)
        try:
            conn = connector_tree(h.subgraph(reach), anchor, set(r_core.vertices) & set(reach), self.delta, q_h)
        except (ConstructionFailure, PreconditionError) as exc:
            rec["connector_failure"] = str(exc)
            mapping = _try_greedy(h, t, anchor)
            if mapping is not None:
                rec["fallback"] = "direct-greedy"
                self.log.append(rec)
                return Embedding(t, self.g, mapping, anchor)
            rec["fail"] = str(exc)
            self.log.append(rec)
            raise EmbedFailure(f"connector tree failed at level {k}, branch {i}", None, "connector", rec)
        rec["connector_height"] = conn.height
        sub, head, at_leaf, inner = _maximal_into_connector(t, conn)
        used = set(head.values())
        parts = []
        for x, comp in at_leaf + inner:
            allowed = (set(r_core.vertices) - used) | {head[x]}
            mapping = _try_greedy(r_core.subgraph(allowed), comp, head[x])
            if mapping is None:
                mapping = _try_greedy(h.subgraph((set(h.vertices) - used) | {head[x]}), comp, head[x])
                if mapping is not None:
                    rec.setdefault("fallback", []).append(x)
            if mapping is None:
                rec["fail"] = f"greedy completion from {x}"
                self.log.append(rec)
                raise EmbedFailure(f"greedy completion starved at level {k}, branch {i}", head,
                                   "greedy-completion", rec)
            parts.append(Embedding(comp, self.g, mapping))
            used |= set(mapping.values())
        self.log.append(rec)
        return combine_embeddings(Embedding(sub, self.g, head, anchor), parts, self.g)


def embed_cut_dense(g, r_sub, t, params, seed=0, q=None):
    """Embed t into a cut-dense g that contains a large regular subgraph r_sub.

    Works by induction on a level k: split t with lambda = 2/k, embed the
    head at level k-1, then attach each hanging component through a fresh
    random reservoir, a connector tree and greedy completion inside r_sub.
    """
    if t.max_degree() > params.delta_cap:
        raise PreconditionError(f"tree max degree {t.max_degree()} exceeds {params.delta_cap}")
    if not r_sub.is_subgraph_of(g):
        raise PreconditionError("r_sub is not a subgraph of g")
    if r_sub.n < (2 + 2 * params.epsilon) * len(t):
        raise PreconditionError(f"|r_sub|={r_sub.n} < (2+2eps)|t|={float((2 + 2 * params.epsilon) * len(t)):.2f}")
    notes = []
    degs = {r_sub.degree(v) for v in r_sub.vertices}
    if len(degs) > 1:
        notes.append("r_sub-not-regular")
    if q is None:
        q = certify(g).q_value
    if q <= 0:
        raise PreconditionError("g is not cut-dense (certified value 0)")
    emb = _DenseEmbedder(g, r_sub, params, Fraction(q), seed)
    emb.setup(params.levels)
    out = emb.embed(t, params.levels)
    final = Embedding(t, g, out.map, None, tuple(notes) + out.notes)
    final = require_valid(final)
    return final, emb.log


# -- embedding into a tree of cut-dense pieces

def validate_piece_structure(pieces, s_tree, connectors):
    """Pieces on tree edges share exactly their connector; others are disjoint."""
    idx = set(range(len(pieces)))
    if set(s_tree.vertices) != idx:
        raise GraphValidationError("s_tree must span the piece indices")
    conn = {}
    for (a, b), v in connectors.items():
        conn[frozenset((a, b))] = v
    edges = {frozenset((c, p)) for c, p in s_tree.parent.items()}
    if set(conn) != edges:
        raise GraphValidationError("connectors must be given exactly for the s_tree edges")
    if len(set(conn.values())) != len(conn):
        raise GraphValidationError("connector vertices must be distinct")
    sets = [p.vertex_set() for p in pieces]
    for a in range(len(pieces)):
        for b in range(a + 1, len(pieces)):
            meet = sets[a] & sets[b]
            key = frozenset((a, b))
            if key in edges:
                if meet != {conn[key]}:
                    raise GraphValidationError(f"pieces {a} and {b} meet in {sorted(meet)[:4]}, "
                                               f"expected exactly {{{conn[key]}}}")
            elif meet:
                raise GraphValidationError(f"non-adjacent pieces {a} and {b} share {sorted(meet)[:4]}")
    return conn


class _PieceEmbedder:
    def __init__(self, pieces, s_tree, conn, params, q):
        self.pieces = pieces
        self.s = s_tree
        self.conn = conn
        self.params = params
        self.delta = params.delta_cap
        self.q = q
        self.log = []
        self.height = {}
        for v in reversed(s_tree.bfs_order()):
            self.height[v] = 1 + max((self.height[c] for c in s_tree.children(v)), default=0)
        self.ambient = pieces[0]
        for p in pieces[1:]:
            self.ambient = self.ambient.union(p)

    def embed(self, t, node, anchor):
        k = self.height[node]
        piece = self.pieces[node]
        kids = self.s.children(node)
        if k == 1 or not kids:
            mapping = _try_greedy(piece, t, anchor)
            if mapping is None:
                raise EmbedFailure(f"greedy failed in leaf piece {node}", None, "greedy-base",
                                   {"piece": node, "order": len(t)})
            self.log.append({"stage": "base", "piece": node, "order": len(t)})
            return Embedding(t, self.ambient, mapping)
        gate = {self.conn[frozenset((node, c))]: c for c in kids}
        sp = split_tree(t, 1 - Fraction(1, k), self.delta)
        head_host = piece.remove_vertices(gate)
        head = _try_greedy(head_host, sp.q_subtree, anchor)
        if head is None:
            raise EmbedFailure(f"greedy head embedding failed in piece {node}", None, "greedy-head",
                               {"piece": node, "order": len(sp.q_subtree)})
        rec = {"stage": "pieces", "piece": node, "head": len(sp.q_subtree), "components": len(sp.components)}
        used = set(head.values())
        free_gates = set(gate)
        parts = []
        onward = []  # (vertex, component, child piece)
        for idx, comp in enumerate(sp.components):
            y = comp.root
            host = piece.subgraph((set(piece.vertices) - used) | {head[y]})
            # share the scarce connector vertices among the remaining components
            left = len(sp.components) - idx
            arity = min(self.delta, len(free_gates) // left) or min(1, len(free_gates))
            conn = None
            if arity >= 1:
                try:
                    conn = connector_tree(host, head[y], free_gates, self.delta, self.q / 2,
                                          min_targets=arity, arity=arity)
                except (ConstructionFailure, PreconditionError) as exc:
                    rec.setdefault("connector_failures", []).append(str(exc))
            if conn is None:
                # no room to leave this piece: finish the component here
                mapping = _try_greedy(host.remove_vertices(free_gates), comp, head[y])
                if mapping is None:
                    raise EmbedFailure(f"no connector and no room in piece {node}", head, "connector", rec)
                rec.setdefault("kept_local", []).append(y)
                parts.append(Embedding(comp, self.ambient, mapping))
                used |= set(mapping.values())
                continue
            sub, sub_map, at_leaf, inner = _maximal_into_connector(comp, conn)
            used |= set(sub_map.values())
            free_gates -= set(sub_map.values())
            pieces_here = [Embedding(sub, self.ambient, sub_map)]
            for x, c2 in inner:
                mapping = _try_greedy(piece.subgraph((set(piece.vertices) - used - free_gates) | {sub_map[x]}),
                                      c2, sub_map[x])
                if mapping is None:
                    raise EmbedFailure(f"reduced-arity completion failed in piece {node}", head, "connector", rec)
                rec.setdefault("reduced_arity_completions", []).append(x)
                pieces_here.append(Embedding(c2, self.ambient, mapping))
                used |= set(mapping.values())
            for x, c2 in at_leaf:
                onward.append((x, c2, gate[sub_map[x]]))
            parts.append(combine_embeddings(pieces_here[0], pieces_here[1:], self.ambient))
        self.log.append(rec)
        base = Embedding(sp.q_subtree, self.ambient, head, anchor)
        mid = combine_embeddings(base, parts, self.ambient)
        deeper = []
        for x, comp, child in onward:
            deeper.append(self.embed(comp, child, mid.map[x]))
        return combine_embeddings(mid, deeper, self.ambient)


def embed_tree_of_pieces(pieces, s_tree, connectors, t, params, anchor=None, q=None):
    """Embed t into pieces glued along a tree s_tree at single connector vertices.

    Splits t with lambda = 1 - 1/k (k = levels below the current piece),
    embeds the head greedily away from the connectors, walks each hanging
    component to a connector through a connector tree and recurses into the
    matching child piece.
    """
    conn = validate_piece_structure(pieces, s_tree, connectors)
    if t.max_degree() > params.delta_cap:
        raise PreconditionError(f"tree max degree {t.max_degree()} exceeds {params.delta_cap}")
    if q is None:
        q = min(certify(p).q_value for p in pieces)
    q = Fraction(q)
    if q <= 0:
        raise PreconditionError("a piece is not cut-dense")
    root = s_tree.root
    gates = set(conn.values())
    if anchor is None:
        anchor = min(v for v in pieces[root].vertices if v not in gates)
    notes = []
    k = max(s_tree.depth().values()) + 1
    n = min(p.n for p in pieces)
    if len(t) > k * q * n / 16:
        notes.append(f"size-hypothesis-relaxed: |t|={len(t)} > k q n/16={float(k * q * n / 16):.2f}")
    emb = _PieceEmbedder(pieces, s_tree, conn, params, q)
    out = emb.embed(t, root, anchor)
    final = require_valid(Embedding(t, emb.ambient, out.map, anchor, tuple(notes) + out.notes))
    return final, emb.log


def is_valid(emb):
    return check_embedding(emb.tree, emb.host, emb.map, emb.anchor).ok
