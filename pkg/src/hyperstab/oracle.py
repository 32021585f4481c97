"""Brute-force oracles and extremal generators.

Nothing here reuses the constructive code it is meant to audit: tree
containment is an exhaustive backtracking search, covers come from branch
and bound, and trees are enumerated from scratch by canonical forms.
"""
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

from . import kernels
from .embedding import Embedding
from .errors import PreconditionError
from .graph import Graph, RootedTree

DEFAULT_BUDGET = 10**7


# -- trees up to isomorphism

def _rooted_code(adj, v, parent):
    kids = sorted(_rooted_code(adj, w, v) for w in adj[v] if w != parent)
    return "(" + "".join(kids) + ")"


def _centers(adj):
    n = len(adj)
    if n <= 2:
        return list(adj)
    deg = {v: len(adj[v]) for v in adj}
    layer = [v for v in adj if deg[v] == 1]
    left = n
    while left > 2:
        left -= len(layer)
        nxt = []
        for v in layer:
            for w in adj[v]:
                deg[w] -= 1
                if deg[w] == 1:
                    nxt.append(w)
        layer = nxt
    return layer


def canonical_form(edges, n):
    """Isomorphism-invariant string of an unrooted tree on 0..n-1."""
    adj = {v: [] for v in range(n)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return min(_rooted_code(adj, c, None) for c in _centers(adj))


def nonisomorphic_trees(n):
    """One RootedTree per isomorphism class of n-vertex trees, in BFS labeling."""
    if n < 1:
        return []
    level = {canonical_form([], 1): []}
    for size in range(2, n + 1):
        nxt = {}
        for edges in level.values():
            for v in range(size - 1):
                cand = edges + [(v, size - 1)]
                key = canonical_form(cand, size)
                nxt.setdefault(key, cand)
        level = nxt
    out = []
    for key in sorted(level):
        t = RootedTree.from_edges(level[key], 0) if level[key] else RootedTree(0, {})
        out.append(t.relabeled()[0])
    return out


def trees_with_edges(d):
    return nonisomorphic_trees(d + 1)


# -- containment

@dataclass(frozen=True)
class Containment:
    found: bool
    embedding: Embedding = None
    exhausted: bool = True
    nodes: int = 0

    def __bool__(self):
        return self.found


def contains_tree(g, t, budget=DEFAULT_BUDGET):
    """Exhaustive search for a copy of t in g.  A negative answer is a proof
    unless ``exhausted`` is False (budget ran out)."""
    if len(t) > g.n:
        return Containment(False, None, True, 0)
    tr, order = t.relabeled()
    parent = [-1] + [tr.parent[i] for i in range(1, len(tr))]
    h, labels = g.relabeled()
    found, nodes, exhausted = kernels.tree_search(h.n, h.adjacency_masks(), parent, budget)
    if found is None:
        return Containment(False, None, exhausted, nodes)
    mapping = {order[i]: labels[found[i]] for i in range(len(order))}
    return Containment(True, Embedding(t, g, mapping), True, nodes)


# -- vertex cover

@dataclass(frozen=True)
class CoverResult:
    cover: frozenset
    optimal: bool
    lower_bound: int
    nodes: int


def _matching_bound(edges):
    used = set()
    size = 0
    for u, v in edges:
        if u not in used and v not in used:
            used.update((u, v))
            size += 1
    return size


def min_vertex_cover(g, budget=DEFAULT_BUDGET):
    """Minimum vertex cover by branching on a highest-degree vertex: either it
    joins the cover or all of its neighbours do.  Maximal matchings prune."""
    edges0 = list(g.edges())
    best = set(v for e in edges0 for v in e)
    # a maximal matching's endpoints give a 2-approximation to start from
    start = set()
    for u, v in edges0:
        if u not in start and v not in start:
            start.update((u, v))
    if len(start) < len(best):
        best = start
    lower = _matching_bound(edges0)
    nodes = 0
    exhausted = True

    def rec(edges, chosen):
        nonlocal best, nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = False
            return
        if not edges:
            if len(chosen) < len(best):
                best = set(chosen)
            return
        if len(chosen) + _matching_bound(edges) >= len(best):
            return
        deg = {}
        for u, v in edges:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        x = max(sorted(deg), key=lambda v: deg[v])
        rec([e for e in edges if x not in e], chosen | {x})
        if not exhausted:
            return
        nbrs = {v for e in edges if x in e for v in e if v != x}
        rec([e for e in edges if not (nbrs & set(e))], chosen | nbrs)

    rec(edges0, frozenset())
    return CoverResult(frozenset(best), exhausted, len(best) if exhausted else lower, nodes)


# -- Erdős–Sós scan

@dataclass
class ScanReport:
    n: int
    d: int
    graphs_checked: int
    counterexamples: list
    runtime: float = field(default=0.0, compare=False)
    per_n: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "n": self.n,
            "d": self.d,
            "graphs_checked": self.graphs_checked,
            "counterexamples": [{"graph": {"n": g.n, "edges": [list(e) for e in g.edges()]},
                                 "tree": [list(e) for e in t.edges()]} for g, t in self.counterexamples],
            "per_n": {str(k): v for k, v in sorted(self.per_n.items())},
        }


def _pairs(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _scan_one(args):
    n, d_max = args
    trees = []
    for d in range(1, d_max + 1):
        for t in trees_with_edges(d):
            trees.append((d, [-1] + [t.parent[i] for i in range(1, len(t))]))
    checked, bad = kernels.es_scan(n, trees)
    return n, checked, bad, trees


def erdos_sos_scan(n_max, d_max, jobs=1, n_limit=7):
    """Every labeled graph on n <= n_max vertices with more than (d-1)n/2
    edges, tested against every d-edge tree up to isomorphism.

    Graphs whose degree sequence is not non-increasing are skipped: each
    graph is isomorphic to one that is.
    """
    if n_max > n_limit:
        raise PreconditionError(f"exhaustive scan refuses n_max={n_max} > {n_limit}")
    start = time.perf_counter()
    tasks = [(n, d_max) for n in range(2, n_max + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_one, tasks))
    else:
        results = [_scan_one(t) for t in tasks]
    total = 0
    counter = []
    per_n = {}
    for n, checked, bad, trees in sorted(results):
        per_n[n] = sum(checked)
        total += per_n[n]
        pairs = _pairs(n)
        for code, j in bad:
            g = Graph(range(n), [pairs[i] for i in range(len(pairs)) if code >> i & 1])
            d, parent = trees[j]
            t = RootedTree(0, {i: parent[i] for i in range(1, len(parent))})
            # re-verify independently of the scan's own search
            if 2 * g.m > (d - 1) * n and not contains_tree(g, t):
                counter.append((g, t))
    return ScanReport(n_max, d_max, total, counter, time.perf_counter() - start, per_n)


# -- extremal constructions

DISJOINT_CLIQUES = "disjoint_cliques"
REGULAR = "regular"
DOMINATING_SET_JOIN = "dominating_set_join"
KINDS = (DISJOINT_CLIQUES, REGULAR, DOMINATING_SET_JOIN)


def generate_extremal(kind, n, d):
    """Constructions with about (d-1)n/2 edges and no copy of some d-edge tree.

    disjoint_cliques: n/d cliques of order d.  regular: a (d-1)-regular
    circulant (no d-edge star).  dominating_set_join: floor((d-1)/2)
    vertices joined to everything, no other edges (no balanced d-edge tree).
    """
    if n < 1 or d < 1:
        raise PreconditionError("n and d must be positive")
    if kind == DISJOINT_CLIQUES:
        if n % d:
            raise PreconditionError(f"d={d} does not divide n={n}")
        edges = []
        for s in range(0, n, d):
            edges.extend(combinations(range(s, s + d), 2))
        return Graph(range(n), edges)
    if kind == REGULAR:
        r = d - 1
        if r >= n or (r * n) % 2:
            raise PreconditionError(f"no {r}-regular graph on {n} vertices")
        offsets = list(range(1, r // 2 + 1))
        edges = {tuple(sorted((v, (v + o) % n))) for v in range(n) for o in offsets}
        if r % 2:
            edges |= {(v, v + n // 2) for v in range(n // 2)}
        return Graph(range(n), sorted(edges))
    if kind == DOMINATING_SET_JOIN:
        k = (d - 1) // 2
        if k > n:
            raise PreconditionError(f"{k} dominating vertices do not fit in {n}")
        edges = [(u, v) for u in range(k) for v in range(u + 1, n)]
        return Graph(range(n), edges)
    raise PreconditionError(f"unknown construction {kind!r}; expected one of {KINDS}")
