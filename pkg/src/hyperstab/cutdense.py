"""Cut-density: exact values, flow certificates, preservation bounds,
decomposition, extraction of cut-dense subgraphs and expansion tests.

A graph is q-cut-dense when every bipartition A, B of its vertices has
e(A, B) >= q|A||B|.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from . import kernels
from .errors import BudgetExceeded, ConstructionFailure, PreconditionError
from .graph import Graph, edge_count_between
from .rng import make_rng

EXACT_BUDGET = 1 << 21  # 2^(n-1) bipartitions; covers n <= 22
EXACT_LIMIT = 22


@dataclass(frozen=True)
class CutCertificate:
    kind: str  # "Exact", "FlowLowerBound" or "ViolatingCut"
    q_value: Fraction
    witness: tuple = None
    heuristic_complete: bool = True
    flags: tuple = ()
    pair_table_path: str = None

    def to_json(self):
        return {
            "kind": self.kind,
            "q_num": self.q_value.numerator,
            "q_den": self.q_value.denominator,
            "witness_cut": list(self.witness) if self.witness is not None else None,
            "pair_table_path": self.pair_table_path,
            "heuristic_complete": self.heuristic_complete,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class PathProfile:
    """Per-pair counts of edge-disjoint walks from N(u) to N(v).

    ``min_pairs`` is taken over all pairs, u = v included;
    ``min_pairs_distinct`` excludes the diagonal.
    """
    min_pairs: int
    min_pairs_distinct: int
    labels: tuple
    table: tuple = field(repr=False)

    def count(self, u, v):
        i, j = self.labels.index(u), self.labels.index(v)
        return self.table[i][j]

    def to_json(self):
        return {
            "min_pairs": self.min_pairs,
            "min_pairs_distinct": self.min_pairs_distinct,
            "labels": list(self.labels),
            "table": [list(r) for r in self.table],
        }


def cut_ratio(g, a):
    """e(A, B)/(|A||B|) for the bipartition (a, V - a)."""
    a = set(a)
    b = set(g.vertices) - a
    if not a or not b:
        raise PreconditionError("cut sides must be nonempty")
    return Fraction(edge_count_between(g, a, b), len(a) * len(b))


def exact_cut_density(g, budget=EXACT_BUDGET):
    """Minimum of e(A,B)/(|A||B|) over all proper bipartitions, with witness side A."""
    if g.n < 2:
        raise PreconditionError("cut-density needs at least two vertices")
    need = 1 << (g.n - 1)
    if need > budget:
        raise BudgetExceeded(f"{need} bipartitions exceed budget {budget}", need, budget)
    _, labels = g.relabeled()
    cut, a, mask = kernels.min_ratio_cut(g.n, g.adjacency_masks())
    witness = tuple(labels[i] for i in range(g.n) if mask >> i & 1)
    return CutCertificate("Exact", Fraction(cut, a * (g.n - a)), witness)


def flow_certify(g):
    """Lower bound min_pairs/(10 n^2) on the cut-density from per-pair flows.

    Each undirected edge is a unit gadget; a unit of flow from N(u) to N(v)
    must pass through at least one gadget.
    """
    if g.n < 2:
        raise PreconditionError("cut-density needs at least two vertices")
    h, labels = g.relabeled()
    table = kernels.pair_flow_table(h.n, h.edges())
    n = h.n
    diag = min(table[i][i] for i in range(n))
    off = min(table[i][j] for i in range(n) for j in range(n) if i != j)
    min_pairs = min(diag, off)
    flags = () if n >= 10 else ("below-sandwich-order",)
    prof = PathProfile(min_pairs, off, tuple(labels), tuple(tuple(r) for r in table))
    cert = CutCertificate("FlowLowerBound", Fraction(min_pairs, 10 * n * n), None, True, flags)
    return prof, cert


def certify(g, exact_limit=EXACT_LIMIT):
    """Exact certificate when small enough, otherwise the flow lower bound."""
    if g.n < 2:
        return CutCertificate("Exact", Fraction(1), None, True, ("vacuous",))
    if g.n <= exact_limit:
        return exact_cut_density(g)
    return flow_certify(g)[1]


# -- preservation bounds

def union_bound(q, g1, g2):
    """Guaranteed cut-density of g1 | g2 when both are q-cut-dense."""
    v1, v2 = g1.vertex_set(), g2.vertex_set()
    inter = len(v1 & v2)
    if inter == 0:
        return Fraction(0)
    return Fraction(q) * inter / (4 * len(v1 | v2))


def attach_bound(q, g, h, delta):
    """Guaranteed cut-density of h built from q-cut-dense g by attaching vertices
    that each see at least delta|g| vertices of g."""
    q, delta = Fraction(q), Fraction(delta)
    if not g.is_subgraph_of(h):
        raise PreconditionError("g is not a subgraph of h")
    if delta > 1:
        raise PreconditionError("delta must be at most 1")
    inside = g.vertex_set()
    quota = delta * g.n
    for v in h.vertices:
        if v not in inside and len(h.adj(v) & inside) < quota:
            raise PreconditionError(f"vertex {v} has {len(h.adj(v) & inside)} neighbours in g, needs {quota}")
    return q * delta * g.n ** 2 / (4 * h.n ** 2)


def delete_set_bound(q, g, u):
    """Guaranteed cut-density of g - u for a small set u."""
    q = Fraction(q)
    if len(set(u)) > q * g.n / 8:
        raise PreconditionError(f"|u|={len(set(u))} exceeds q|g|/8={q * g.n / 8}")
    return q / 2


# -- violating-cut search

def _local_search_cut(g, q, rng, restarts):
    """Seeded move-based search for a bipartition with e(A,B) < q|A||B|.

    Minimises the ratio e(A,B)/(|A||B|) from random and single-vertex starts.
    Returns (ratio, side A) of the best cut found.
    """
    verts = list(g.vertices)
    n = len(verts)
    best = None

    def consider(side):
        nonlocal best
        r = cut_ratio(g, side)
        key = (r, tuple(sorted(side)))
        if best is None or key < best:
            best = key

    # single-vertex cuts: cheap and often the worst
    low = min(verts, key=lambda v: (g.degree(v), v))
    consider({low})
    for rnd in range(restarts):
        if rnd == 0:
            side = set(verts[: n // 2])
        else:
            k = int(rng.integers(1, n))
            side = set(int(x) for x in rng.choice(verts, size=k, replace=False))
        cnt = {v: len(g.adj(v) & side) for v in verts}
        cut = sum(g.degree(v) - cnt[v] for v in side)
        a = len(side)
        improved = True
        while improved:
            improved = False
            cur = Fraction(cut, a * (n - a))
            best_move = None
            for v in verts:
                if v in side:
                    if a == 1:
                        continue
                    nc = cut - (g.degree(v) - cnt[v]) + (cnt[v])
                    na = a - 1
                else:
                    if a == n - 1:
                        continue
                    nc = cut - cnt[v] + (g.degree(v) - cnt[v])
                    na = a + 1
                r = Fraction(nc, na * (n - na))
                if r < cur and (best_move is None or (r, v) < best_move[:2]):
                    best_move = (r, v, nc, na)
            if best_move is not None:
                _, v, cut, a = best_move
                if v in side:
                    side.discard(v)
                    delta = -1
                else:
                    side.add(v)
                    delta = 1
                for w in g.adj(v):
                    cnt[w] += delta
                improved = True
        consider(side)
    return best


def find_violating_cut(g, q, rng=None, exact_limit=EXACT_LIMIT, restarts=8):
    """(side A or None, exact_flag) for a cut with e(A,B) < q|A||B| in a connected g."""
    q = Fraction(q)
    if g.n < 2:
        return None, True
    if g.n <= exact_limit:
        cert = exact_cut_density(g)
        return (cert.witness if cert.q_value < q else None), True
    if not g.is_connected():
        return g.components()[0], True
    if rng is None:
        rng = make_rng(0)
    ratio, side = _local_search_cut(g, q, rng, restarts)
    return (side if ratio < q else None), False


@dataclass
class Decomposition:
    deleted: list
    components: list
    heuristic_complete: bool
    cuts: list

    def to_json(self):
        return {
            "deleted": [list(e) for e in self.deleted],
            "components": [list(c.vertices) for c in self.components],
            "heuristic_complete": self.heuristic_complete,
            "num_deleted": len(self.deleted),
        }


def decompose(g, q, seed=0, exact_limit=EXACT_LIMIT, restarts=8):
    """Delete cut edges of sparse cuts until every component is q-cut-dense.

    The total deleted is at most q n^2 for any sequence of violating cuts.
    ``heuristic_complete`` is False when some component was too large for the
    exact search and was only checked by local search.
    """
    q = Fraction(q)
    if not 0 < q <= 1:
        raise PreconditionError("q must lie in (0, 1]")
    rng = make_rng(seed, 0xDEC)
    deleted = []
    cuts = []
    done = []
    exact_all = True
    work = sorted(g.component_graphs(), key=lambda c: c.vertices[0], reverse=True)
    while work:
        c = work.pop()
        side, exact = find_violating_cut(c, q, rng, exact_limit, restarts)
        if side is None:
            exact_all = exact_all and exact
            done.append(c)
            continue
        a = set(side)
        cut_edges = [(u, v) for u, v in c.edges() if (u in a) != (v in a)]
        cuts.append((tuple(sorted(a)), len(cut_edges)))
        deleted.extend(cut_edges)
        rest = c.remove_edges(cut_edges)
        parts = sorted(rest.component_graphs(), key=lambda x: x.vertices[0], reverse=True)
        work.extend(parts)
        work.sort(key=lambda x: x.vertices[0], reverse=True)
    done.sort(key=lambda x: x.vertices[0])
    return Decomposition(sorted(deleted), done, exact_all, cuts)


# -- cut-dense subgraphs of dense graphs

@dataclass
class CutDenseSubgraph:
    graph: Graph
    certificate: CutCertificate
    attempt: int
    diagnostics: list


def _pad(c, core, target):
    """Grow core inside c to the target order, most neighbours in the set first."""
    chosen = set(core)
    while len(chosen) < target:
        best = min((v for v in c.vertices if v not in chosen),
                   key=lambda v: (-len(c.adj(v) & chosen), v))
        chosen.add(best)
    return chosen


def find_cut_dense_subgraph(g, p, q, mu, seed=0, retries=16, s=None):
    """Random-sample construction of a q-cut-dense induced subgraph of order ceil(mu n).

    Keep each vertex with probability 2 mu/s, decompose the sample at level s,
    take a largest component, draw a random core of rate mu n/(2|C|) inside it
    and pad it.  Success requires a certificate of value >= q.
    """
    p, q, mu = Fraction(p), Fraction(q), Fraction(mu)
    n = g.n
    if g.m < p * n * n:
        raise PreconditionError(f"e(g)={g.m} < p|g|^2={float(p * n * n):.2f}")
    if s is None:
        s = Fraction(math.sqrt(p * q)).limit_denominator(10**6)
    s = Fraction(s)
    target = math.ceil(mu * n)
    if target < 1 or target > n:
        raise PreconditionError("mu n must be between 1 and |g|")
    keep = min(Fraction(1), 2 * mu / s)
    diags = []
    for attempt in range(retries):
        rng = make_rng(seed, 0xC0DE, attempt)
        d = {"attempt": attempt}
        kept = [v for v in g.vertices if rng.random() < keep]
        d["sample"] = len(kept)
        if len(kept) < target:
            d["fail"] = "sample smaller than target"
            diags.append(d)
            continue
        sample = g.subgraph(kept)
        dec = decompose(sample, s, seed=int(rng.integers(2**62)))
        comp = max(dec.components, key=lambda c: (c.n, -c.vertices[0]))
        d["component"] = comp.n
        if comp.n < target:
            d["fail"] = "largest component smaller than target"
            diags.append(d)
            continue
        alpha = min(Fraction(1), Fraction(mu * n) / (2 * comp.n))
        core = [v for v in comp.vertices if rng.random() < alpha]
        d["core"] = len(core)
        if len(core) > target:
            d["fail"] = "random core larger than target"
            diags.append(d)
            continue
        chosen = _pad(comp, core, target)
        h = g.subgraph(chosen)
        cert = certify(h)
        d["q_certified"] = str(cert.q_value)
        if cert.q_value >= q:
            diags.append(d)
            return CutDenseSubgraph(h, cert, attempt, diags)
        d["fail"] = "certificate below q"
        diags.append(d)
    raise ConstructionFailure(f"no certified {q}-cut-dense subgraph of order {target} after {retries} attempts", diags)


# -- expansion

@dataclass(frozen=True)
class ExpansionResult:
    passed: bool
    witness: tuple = None
    exhaustive: bool = True
    sets_checked: int = 0


def expansion_check(g, expansion_factor, max_size, budget=200_000, seed=0, samples=2000):
    """Check |N(S) - S| >= factor |S| for every S with |S| <= max_size.

    Exhaustive when the number of sets fits the budget; otherwise random and
    greedily grown sets are tried and the result is marked non-exhaustive.
    """
    factor = Fraction(expansion_factor)
    if factor <= 0:
        raise PreconditionError("expansion factor must be positive")
    verts = list(g.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    masks = [sum(1 << idx[w] for w in g.adj(v)) for v in verts]
    top = min(max_size, len(verts))

    def boundary(ids):
        s = 0
        nb = 0
        for i in ids:
            s |= 1 << i
            nb |= masks[i]
        return (nb & ~s).bit_count()

    total = sum(math.comb(len(verts), k) for k in range(1, top + 1))
    checked = 0
    if total <= budget:
        for k in range(1, top + 1):
            for ids in combinations(range(len(verts)), k):
                checked += 1
                if boundary(ids) < factor * k:
                    return ExpansionResult(False, tuple(verts[i] for i in ids), True, checked)
        return ExpansionResult(True, None, True, checked)
    rng = make_rng(seed, 0xE4)
    # greedy growth from every vertex: add the vertex that keeps the boundary smallest
    for start in range(len(verts)):
        ids = [start]
        inset = {start}
        while True:
            checked += 1
            if boundary(ids) < factor * len(ids):
                return ExpansionResult(False, tuple(sorted(verts[i] for i in ids)), False, checked)
            if len(ids) >= top:
                break
            nb = 0
            for i in ids:
                nb |= masks[i]
            cands = [i for i in range(len(verts)) if nb >> i & 1 and i not in inset] or \
                [i for i in range(len(verts)) if i not in inset]
            nxt = min(cands, key=lambda i: (boundary(ids + [i]), i))
            ids.append(nxt)
            inset.add(nxt)
    for _ in range(samples):
        k = int(rng.integers(1, top + 1))
        ids = [int(x) for x in rng.choice(len(verts), size=k, replace=False)]
        checked += 1
        if boundary(ids) < factor * k:
            return ExpansionResult(False, tuple(sorted(verts[i] for i in ids)), False, checked)
    return ExpansionResult(True, None, False, checked)


# -- sampling trial

def log_bound_sample(p, q):
    """log of p^(20/q^3) q^3/400, the bound for the induced random sample."""
    p, q = float(p), float(q)
    return 20 * q ** -3 * math.log(p) + 3 * math.log(q) - math.log(400) if p < 1 else 3 * math.log(q) - math.log(400)


def log_bound_plus_more(p, q):
    """log of p^(q^-4) q^5, the bound for supersets of the random sample."""
    p, q = float(p), float(q)
    return (q ** -4 * math.log(p) if p < 1 else 0.0) + 5 * math.log(q)


def sample_preservation_trial(g, q, p, seed=0, supersets=8):
    """Empirical cut-density of supersets of a p-random vertex sample.

    Report only: compares the empirical minimum with the sampling bound.
    """
    q, p = Fraction(q), Fraction(p)
    rng = make_rng(seed, 0x5A)
    base = {v for v in g.vertices if p == 1 or rng.random() < p}
    others = [v for v in g.vertices if v not in base]
    values = []
    for i in range(supersets):
        rate = rng.random()
        extra = {v for v in others if rng.random() < rate} if i else set()
        w = base | extra
        if len(w) < 2:
            continue
        values.append((len(w), certify(g.subgraph(w)).q_value))
    lb = log_bound_plus_more(p, q)
    emp = min((v for _, v in values), default=None)
    return {
        "sample_size": len(base),
        "supersets": [{"order": k, "q": str(v)} for k, v in values],
        "empirical_min": None if emp is None else str(emp),
        "bound_log": lb,
        "bound": math.exp(lb) if lb > -700 else 0.0,
        "sample_bound_log": log_bound_sample(p, q),
        "bound_holds": None if emp is None else float(emp) >= math.exp(lb) if lb > -700 else True,
    }
