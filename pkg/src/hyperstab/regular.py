"""r-regular subgraphs and maximal vertex-disjoint families of them."""
import sys
from dataclasses import dataclass, field
from itertools import combinations

import networkx as nx

from .errors import PreconditionError
from .graph import Graph, core_peel

DEFAULT_BUDGET = 10**6

FOUND = "found"
ABSENT = "exhausted-proven-absent"
OVER_BUDGET = "budget-exceeded"


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def tick(self):
        self.used += 1
        return self.used <= self.limit


def _grow_from(g, r, start, budget):
    """Connected r-regular subgraph of g through start, or None.

    Returns (edges or None, exhausted).  Pending vertices are completed one
    at a time; partners already in the subgraph are tried first, which keeps
    the members small.
    """
    deficit = {start: r}
    done = set()
    chosen = []
    adj = {v: g.adj(v) for v in g.vertices}
    out_of_budget = False

    def options(x):
        return [y for y in adj[x] if y not in done and y != x and
                (y not in deficit or deficit[y] > 0) and (x, y) not in picked and (y, x) not in picked]

    picked = set()

    def rec():
        nonlocal out_of_budget
        pending = [v for v, d in deficit.items() if d > 0]
        if not pending:
            return True
        # most constrained pending vertex first
        best, best_opts = None, None
        for v in sorted(pending):
            opts = options(v)
            slack = len(opts) - deficit[v]
            if slack < 0:
                return False
            if best is None or slack < len(best_opts) - deficit[best]:
                best, best_opts = v, opts
        x = best
        need = deficit[x]
        best_opts.sort(key=lambda y: (y not in deficit, y))
        for combo in combinations(best_opts, need):
            if not budget.tick():
                out_of_budget = True
                return False
            added = []
            for y in combo:
                if y not in deficit:
                    deficit[y] = r
                    added.append(y)
                deficit[y] -= 1
                picked.add((x, y))
                chosen.append((x, y))
            deficit[x] = 0
            done.add(x)
            if rec():
                return True
            done.discard(x)
            deficit[x] = need
            for y in combo:
                deficit[y] += 1
                picked.discard((x, y))
                chosen.pop()
            for y in added:
                del deficit[y]
            if out_of_budget:
                return False
        return False

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * g.n + 1000))
    try:
        ok = rec()
    finally:
        sys.setrecursionlimit(old)
    if ok:
        return list(chosen), True
    return None, not out_of_budget


def find_connected_regular(g, r, budget=None, _counter=None):
    """A connected r-regular subgraph, searched from each r-core vertex in turn.

    Returns (Graph or None, status).  Vertices whose search is exhausted are
    removed before moving on, so an ABSENT status is a proof.
    """
    if r < 1:
        raise PreconditionError("r must be at least 1")
    counter = _counter or _Budget(DEFAULT_BUDGET if budget is None else budget)
    h = core_peel(g, r)
    # densest components first, then ascending vertex
    while h.n:
        comps = sorted(h.component_graphs(), key=lambda c: (-c.m / c.n, c.vertices[0]))
        progressed = False
        for comp in comps:
            start = comp.vertices[0]
            edges, exhausted = _grow_from(comp, r, start, counter)
            if edges is not None:
                return Graph({x for e in edges for x in e}, edges), FOUND
            if not exhausted:
                return None, OVER_BUDGET
            h = core_peel(h.remove_vertices([start]), r)
            progressed = True
            break
        if not progressed:
            break
    return None, ABSENT


@dataclass
class RegularSearch:
    graph: Graph
    status: str
    nodes: int

    @property
    def found(self):
        return self.graph is not None


def find_regular_subgraph(g, r, budget=DEFAULT_BUDGET):
    """An r-regular subgraph: the union of greedily extracted disjoint connected pieces."""
    if r < 1:
        raise PreconditionError("r must be at least 1")
    counter = _Budget(budget)
    pieces = []
    rest = g
    status = ABSENT
    while True:
        piece, st = find_connected_regular(rest, r, _counter=counter)
        if piece is None:
            if not pieces:
                status = st
            break
        pieces.append(piece)
        rest = rest.remove_vertices(piece.vertices)
    if not pieces:
        return RegularSearch(None, status, counter.used)
    edges = [e for p in pieces for e in p.edges()]
    return RegularSearch(Graph({x for e in edges for x in e}, edges), FOUND, counter.used)


def is_regular(h, r):
    """Independent degree check."""
    return h.n > 0 and all(h.degree(v) == r for v in h.vertices)


PROVEN = "proven-maximal"
MAXIMUM = "proven-maximum"
UNDER_BUDGET = "maximal-under-budget"


@dataclass
class RegularFamily:
    members: list
    hosts: list
    r: int
    maximal_flag: str
    nodes: int = 0
    notes: list = field(default_factory=list)

    @property
    def k(self):
        return len(self.members)

    def vertex_union(self):
        return frozenset(v for m in self.members for v in m.vertices)

    def union_graph(self):
        edges = [e for m in self.members for e in m.edges()]
        return Graph(self.vertex_union(), edges)

    def to_json(self):
        return {
            "r": self.r,
            "k": self.k,
            "maximal_flag": self.maximal_flag,
            "members": [{"host": h, "vertices": list(m.vertices), "edges": [list(e) for e in m.edges()]}
                        for m, h in zip(self.members, self.hosts)],
        }


def _check_edge_disjoint(hosts):
    seen = set()
    for h in hosts:
        for e in h.edges():
            if e in seen:
                raise PreconditionError(f"hosts share edge {e}")
            seen.add(e)


def _fill(hosts, r, used, counter, hosts_order=None):
    """Greedily add members; returns (new members with host index, all exhausted)."""
    out = []
    exhausted = True
    for i in hosts_order if hosts_order is not None else range(len(hosts)):
        while True:
            piece, st = find_connected_regular(hosts[i].remove_vertices(used), r, _counter=counter)
            if piece is None:
                exhausted = exhausted and st == ABSENT
                break
            out.append((piece, i))
            used |= set(piece.vertices)
    return out, exhausted


def _matching_family(hosts):
    """r = 1: members are single edges, so a maximum matching of the union is a maximum family."""
    owner = {}
    g = nx.Graph()
    for i, h in enumerate(hosts):
        for e in h.edges():
            owner[e] = i
            g.add_edge(*e)
    match = sorted(tuple(sorted(e)) for e in nx.max_weight_matching(g, maxcardinality=True))
    members = [Graph(e, [e]) for e in match]
    return RegularFamily(members, [owner[e] for e in match], 1, MAXIMUM, len(match))


def max_disjoint_regular_family(hosts, r, budget=DEFAULT_BUDGET, seed_members=None, rounds=4):
    """Vertex-disjoint r-regular graphs, each inside one host, built greedily
    and then improved by replacing one member with two.

    seed_members: optional list of (Graph, host index) to start from.
    """
    if r < 1:
        raise PreconditionError("r must be at least 1")
    hosts = list(hosts)
    _check_edge_disjoint(hosts)
    if r == 1:
        return _matching_family(hosts)
    counter = _Budget(budget)
    members = list(seed_members or [])
    used = set(v for m, _ in members for v in m.vertices)
    added, _ = _fill(hosts, r, used, counter)
    members.extend(added)
    for _ in range(rounds):
        improved = False
        for idx in range(len(members)):
            m, hi = members[idx]
            trial_used = used - set(m.vertices)
            got, _ = _fill(hosts, r, set(trial_used), counter, [hi])
            if len(got) >= 2:
                members = members[:idx] + members[idx + 1:] + got
                used = trial_used | {v for p, _ in got for v in p.vertices}
                improved = True
                break
        if not improved:
            break
    # absence in a host persists as more vertices are used, so one pass proves maximality
    extra, exhausted = _fill(hosts, r, used, counter)
    members.extend(extra)
    flag = PROVEN if exhausted and counter.used <= counter.limit else UNDER_BUDGET
    return RegularFamily([m for m, _ in members], [h for _, h in members], r, flag, counter.used)
