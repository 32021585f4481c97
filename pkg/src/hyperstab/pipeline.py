"""End-to-end hyperstability procedure.

Given a graph g and a tree t the pipeline either finds a copy of t or
deletes few edges so that every remaining component has a small cover.
The stages, in order:

  (a) too many edges: peel to high minimum degree and embed greedily;
  (b) greedy edge-disjoint collection of order-m p-cut-dense pieces;
  (c) heavy sparse remainder: peel and embed in the (hopefully) expander;
  (d) clumps from the pieces, joined while their D-sets overlap;
  (e) a clump overlapping many others: union embedding;
  (f) order the clumps so each meets the later ones little, or else find a
      subdivided tree in the clump incidence graph and embed along it;
  (g) cut each clump down to J_i and emit the deletion certificate.

Every outcome is validated before it is returned.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .clump import (LARGE_M, MANY_OVERLAPS, SUBDIVISION_TREE, clump_embed_trigger, derive_sets,
                    init_clump, join_clumps)
from .cutdense import certify, find_cut_dense_subgraph
from .embedding import Embedding, check_embedding
from .errors import ConstructionFailure, EmbedFailure, PreconditionError
from .graph import Graph, RootedTree, is_cover, min_degree_peel
from .params import overlap_threshold
from .rng import child_seed
from .subdivision import find_1_subdivision
from .trees import expander_embed, greedy_embed

EMBEDDING_FOUND = "EmbeddingFound"
CERTIFICATE = "Certificate"
INCONCLUSIVE = "Inconclusive"

EXPANDER_BUDGET = 200_000
ORACLE_LIMIT = 16  # components up to this order get the exact T-freeness check


def _edge_list(edges):
    return [list(e) for e in sorted(edges)]


@dataclass
class DeletionCertificate:
    deleted_edges: frozenset
    components: list  # (Graph, cover) pairs
    accounting: dict  # sparse_edges / non_B_edges / overlap_edges -> edge sets
    params_used: object
    caveats: tuple = ()

    def targets(self, n):
        p = self.params_used
        return p.epsilon * p.d * n, p.C * p.d

    def to_json(self, n=None):
        out = {
            "deleted_edges": _edge_list(self.deleted_edges),
            "components": [{"vertices": list(g.vertices), "edges": _edge_list(g.edges()),
                            "cover": sorted(c)} for g, c in self.components],
            "accounting": {k: len(v) for k, v in sorted(self.accounting.items())},
            "params_used": self.params_used.to_json(),
            "caveats": list(self.caveats),
        }
        if n is not None:
            dt, ct = self.targets(n)
            out["stats"] = {
                "deleted": len(self.deleted_edges),
                "deleted_target": str(dt),
                "max_cover": max((len(c) for _, c in self.components), default=0),
                "cover_target": str(ct),
            }
        return out


@dataclass(frozen=True)
class CertificateCheck:
    ok: bool
    reasons: tuple = ()
    warnings: tuple = ()
    deleted: int = 0
    deleted_target: Fraction = Fraction(0)
    max_cover: int = 0
    cover_target: Fraction = Fraction(0)

    @property
    def within_targets(self):
        return self.deleted <= self.deleted_target and self.max_cover <= self.cover_target

    def __bool__(self):
        return self.ok


def validate_certificate(g, t, cert, check_t_free=True, oracle_limit=ORACLE_LIMIT):
    """Re-check a certificate from g's own edge list.

    Structural failures go to reasons; sizes are reported against the
    eps d n and (2+eps) d targets.  Components small enough for the exact
    containment oracle are checked for copies of t, which is only a warning:
    it means the input was not t-free.
    """
    from .oracle import contains_tree
    reasons = []
    warnings = []
    edges = set(g.edges())
    deleted = {(min(u, v), max(u, v)) for u, v in cert.deleted_edges}
    if not deleted <= edges:
        reasons.append("deleted edges not in the input")
    remaining = edges - deleted
    seen_vertices = set()
    covered = set()
    for i, (comp, cover) in enumerate(cert.components):
        verts = set(comp.vertices)
        if verts & seen_vertices:
            reasons.append(f"component {i} shares vertices with an earlier one")
        seen_vertices |= verts
        ce = set(comp.edges())
        if not ce <= remaining:
            reasons.append(f"component {i} has edges outside the survivor graph")
        covered |= ce
        if not set(cover) <= verts:
            reasons.append(f"cover {i} leaves its component")
        if not all(u in cover or v in cover for u, v in ce):
            reasons.append(f"cover {i} misses an edge of its component")
        if check_t_free and comp.n <= oracle_limit and contains_tree(comp, t):
            warnings.append(f"component {i} contains t (input was not t-free)")
    if covered != remaining:
        reasons.append(f"{len(remaining - covered)} surviving edges lie in no component")
    n = g.n
    p = cert.params_used
    return CertificateCheck(
        not reasons, tuple(reasons), tuple(warnings), len(deleted), p.epsilon * p.d * n,
        max((len(c) for _, c in cert.components), default=0), p.C * p.d)


@dataclass
class StructureResult:
    outcome: str
    embedding: Embedding = None
    certificate: DeletionCertificate = None
    report: dict = field(default_factory=dict)
    stage_log: list = field(default_factory=list)
    host_order: int = None  # n of the input, for the certificate's size targets

    def to_json(self, tree_file=None, host_file=None):
        out = {"outcome": self.outcome, "stage_log": self.stage_log}
        if self.embedding is not None:
            out["embedding"] = self.embedding.to_json(tree_file, host_file)
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json(self.host_order)
        if self.report:
            out["report"] = self.report
        return out


class _Run:
    def __init__(self, g, t, params):
        self.g, self.t, self.params = g, t, params
        self.d = len(t)
        self.log = []
        self.caveats = list(params.warnings)
        self.failed_hypotheses = []

    def note(self, stage, action, counts=None, caveats=()):
        self.log.append({"stage": stage, "action": action, "counts": dict(counts or {}),
                         "caveats": list(caveats)})

    def fail_hypothesis(self, name):
        if name not in self.failed_hypotheses:
            self.failed_hypotheses.append(name)

    def found(self, stage, emb):
        chk = check_embedding(self.t, self.g, emb.map)
        if not chk.ok:
            raise AssertionError(f"stage {stage} produced an invalid embedding: " + "; ".join(chk.reasons))
        self.note(stage, "embedding found", {"tree": self.d})
        return StructureResult(EMBEDDING_FOUND, Embedding(self.t, self.g, dict(emb.map), None, emb.notes),
                               report={"stage": stage}, stage_log=self.log, host_order=self.g.n)

    def inconclusive(self, stage, reason, extra=None):
        self.note(stage, "inconclusive", caveats=[reason])
        report = {"stage": stage, "reason": reason,
                  "hypothesis_failed": self.failed_hypotheses[0] if self.failed_hypotheses else None,
                  "failed_hypotheses": list(self.failed_hypotheses),
                  "hierarchy_warnings": list(self.params.warnings)}
        if extra:
            report.update(extra)
        return StructureResult(INCONCLUSIVE, report=report, stage_log=self.log, host_order=self.g.n)


# -- stage (b)

def _grow(rem, v, m):
    """m vertices grown from v, each step taking a frontier vertex with most
    neighbours in the set."""
    chosen = {v}
    while len(chosen) < m:
        frontier = {w for u in chosen for w in rem.adj(u)} - chosen
        if not frontier:
            return None
        chosen.add(min(frontier, key=lambda w: (-len(rem.adj(w) & chosen), w)))
    return chosen


def _piece_at(rem, v, params, seed):
    """An order-m p-cut-dense subgraph of rem through the neighbourhood of v, or None."""
    m, p = params.m, params.p
    ball = rem.subgraph(rem.adj(v) | {v})
    if ball.n >= m and ball.m >= p * ball.n * ball.n:
        try:
            res = find_cut_dense_subgraph(ball, p, p, Fraction(m, ball.n), seed=seed, retries=params.retries)
            return res.graph, res.certificate, "sampled"
        except ConstructionFailure:
            pass  # fall through to growing a candidate
    chosen = _grow(rem, v, m)
    if chosen is None:
        return None
    h = rem.subgraph(chosen)
    cert = certify(h)
    if cert.q_value >= p:
        return h, cert, "grown"
    return None


def extract_pieces(g, params, seed=0):
    """Greedy edge-disjoint collection of order-m p-cut-dense subgraphs.

    Scans vertices in order and extracts pieces until a full pass finds none;
    that pass is what "maximal" means here.  Returns (pieces, remainder
    edge set, counts).
    """
    m, p = params.m, params.p
    rem_edges = set(g.edges())
    pieces = []
    routes = {"sampled": 0, "grown": 0}
    if m < 2:
        return pieces, rem_edges, {"pieces": 0, "passes": 0, **routes}
    need = math.ceil(p * (m - 1))  # a p-cut-dense order-m graph has this minimum degree
    passes = 0
    progress = True
    while progress:
        progress = False
        passes += 1
        rem = Graph(g.vertices, rem_edges)
        for v in g.vertices:
            while rem.degree(v) >= max(1, need):
                got = _piece_at(rem, v, params, child_seed(seed, 0xB, len(pieces), v))
                if got is None:
                    break
                h, cert, route = got
                routes[route] += 1
                pieces.append((h, cert))
                rem_edges -= set(h.edges())
                rem = Graph(g.vertices, rem_edges)
                progress = True
    return pieces, rem_edges, {"pieces": len(pieces), "passes": passes, **routes}


# -- stage (f)

def _perfect_tree(arity, depth):
    parent = {}
    layer = [0]
    nxt_id = 1
    for _ in range(depth):
        new = []
        for u in layer:
            for _ in range(arity):
                parent[nxt_id] = u
                new.append(nxt_id)
                nxt_id += 1
        layer = new
    return RootedTree(0, parent)


def order_clumps(dsets, limit):
    """Greedy maximal ordered subfamily: repeatedly take the first clump whose
    D-set meets the other unplaced D-sets in at most limit vertices.

    Returns (ordered ids, ids left when stuck).
    """
    left = sorted(dsets)
    ordered = []
    while left:
        pick = None
        for c in left:
            rest = set()
            for o in left:
                if o != c:
                    rest |= dsets[o]
            if len(dsets[c] & rest) <= limit:
                pick = c
                break
        if pick is None:
            break
        ordered.append(pick)
        left.remove(pick)
    return ordered, left


def incidence_graph(dsets, ids):
    """Bipartite graph between vertices in several D-sets (side A) and clumps.

    Clump nodes get labels above every vertex label.  Returns
    (graph, A side, {clump label: clump id}).
    """
    count = {}
    for c in ids:
        for v in dsets[c]:
            count[v] = count.get(v, 0) + 1
    a_side = {v for v, k in count.items() if k > 1}
    top = max(max((max(s) for s in dsets.values() if s), default=0), max(a_side, default=0)) + 1
    label = {top + i: c for i, c in enumerate(ids)}
    edges = [(v, lab) for lab, c in label.items() for v in sorted(dsets[c] & a_side)]
    return Graph(a_side | set(label), edges), a_side, label


# -- the procedure

def hyperstability(g, t, params):
    """Either a validated copy of t in g or a validated deletion certificate.

    Returns a StructureResult; Inconclusive when desk-scale parameters defeat
    both exits, with the stage and the first hypothesis that failed.
    """
    if t.max_degree() > params.delta_cap:
        raise PreconditionError(f"tree max degree {t.max_degree()} exceeds delta_cap={params.delta_cap}")
    if params.d != len(t):
        raise PreconditionError(f"params.d={params.d} but the tree has {len(t)} vertices")
    run = _Run(g, t, params)
    d, n, seed = run.d, g.n, params.seed

    # (a)
    if g.m > 2 * d * n:
        h = min_degree_peel(g, d)
        run.note("a", "peeled dense graph", {"edges": g.m, "peeled_order": h.n, "min_degree": h.min_degree()})
        return run.found("a", greedy_embed(h, t, h.vertices[0]))
    run.note("a", "edge count at most 2dn", {"edges": g.m, "bound": 2 * d * n})

    # (b)
    pieces, sparse, counts = extract_pieces(g, params, child_seed(seed, 0xB))
    run.note("b", "extracted cut-dense pieces", {**counts, "sparse_edges": len(sparse)},
             ["maximal-by-exhausted-scan"])

    # (c)
    sparse_threshold = params.epsilon * d * n / 3
    if sparse and len(sparse) >= sparse_threshold:
        gs = Graph(g.vertices, sparse)
        peeled = min_degree_peel(gs, params.epsilon * d / 6)
        try:
            emb = expander_embed(peeled, t, params.delta_cap, strict=False,
                                 budget=min(params.budget, EXPANDER_BUDGET), seed=child_seed(seed, 0xC))
            return run.found("c", emb)
        except EmbedFailure as exc:
            run.fail_hypothesis("sparse-remainder-expansion")
            run.note("c", "sparse remainder heavy, expander embedding failed",
                     {"sparse_edges": len(sparse), "peeled_order": peeled.n}, [str(exc)])
    else:
        run.note("c", "sparse remainder light", {"sparse_edges": len(sparse),
                                                 "threshold": float(sparse_threshold)})

    # (d)
    clumps = {}
    for i, (h, cert) in enumerate(pieces):
        clumps[i] = init_clump(h, params, cert)
    next_id = len(clumps)
    dsets = {i: derive_sets(c).d_vertices for i, c in clumps.items()}
    cap = params.C * d
    blocked = set()
    joins = 0
    while True:
        joined = False
        for a, b in combinations(sorted(clumps), 2):
            if (a, b) in blocked:
                continue
            ca, cb = clumps[a], clumps[b]
            overlap = len(dsets[a] & dsets[b])
            if not overlap or overlap < overlap_threshold(params.kappa, max(ca.k, cb.k), params.m):
                continue
            if ca.k > 1 / params.kappa or cb.k > 1 / params.kappa:
                continue
            try:
                new = join_clumps(ca, cb, params)
            except PreconditionError as exc:
                blocked.add((a, b))
                run.note("d", "join refused", {"pair": [a, b]}, [str(exc)])
                continue
            assert max(ca.k, cb.k) <= new.k <= ca.k + cb.k
            if len(new.m_vertices()) > cap:
                try:
                    emb, _ = clump_embed_trigger([new], LARGE_M, 0, t, params, child_seed(seed, 0xD, joins))
                    run.note("d", "joined clump has a large regular family", {"m_size": len(new.m_vertices())})
                    return run.found("d", emb)
                except EmbedFailure as exc:
                    blocked.add((a, b))
                    run.fail_hypothesis("large-regular-family-embedding")
                    run.note("d", "join left undone: cover guard breached and embedding failed",
                             {"pair": [a, b], "m_size": len(new.m_vertices())}, [str(exc)])
                    continue
            del clumps[a], clumps[b], dsets[a], dsets[b]
            clumps[next_id] = new
            dsets[next_id] = derive_sets(new).d_vertices
            next_id += 1
            joins += 1
            joined = True
            break
        if not joined:
            break
    run.note("d", "joining loop finished", {"clumps": len(clumps), "joins": joins, "blocked": len(blocked),
                                            "k_values": sorted(c.k for c in clumps.values())})

    ids = sorted(clumps)
    arr = [clumps[i] for i in ids]
    pos = {c: j for j, c in enumerate(ids)}

    # (e)
    g_need = max(1, math.ceil(params.gamma * params.m))
    fan_need = params.C * params.h / params.p ** 3
    fan = 0
    for c in ids:
        others = [o for o in ids if o != c and len(dsets[c] & dsets[o]) >= g_need]
        fan = max(fan, len(others))
        if len(others) >= fan_need:
            try:
                emb, _ = clump_embed_trigger(arr, MANY_OVERLAPS, (pos[c], [pos[o] for o in others]), t, params,
                                             child_seed(seed, 0xE, c))
                return run.found("e", emb)
            except (EmbedFailure, PreconditionError) as exc:
                run.fail_hypothesis("overlap-fan-embedding")
                run.note("e", "overlap fan embedding failed", {"hub": c, "fan": len(others)}, [str(exc)])
    run.note("e", "largest overlap fan", {"fan": fan, "needed": float(fan_need)})

    # (f)
    limit = params.alpha * d / 10
    ordered, stuck = order_clumps(dsets, limit)
    if stuck:
        run.note("f", "ordering stuck", {"ordered": len(ordered), "stuck": len(stuck)})
        bip, a_side, label = incidence_graph(dsets, stuck)
        pattern = _perfect_tree(params.L, params.L)
        try:
            w = find_1_subdivision(bip, a_side, pattern, t_thresh=g_need,
                                   s_thresh=max(1, math.ceil(params.kappa * params.m)),
                                   seed=child_seed(seed, 0xF), attempts=params.retries)
        except (ConstructionFailure, PreconditionError) as exc:
            run.fail_hypothesis("incidence-subdivision")
            return run.inconclusive("f", "clumps cannot be ordered and no subdivided tree was found",
                                    {"error": str(exc)})
        node = {x: pos[label[b]] for x, b in w.branch_map.items()}
        s_tree = RootedTree(node[pattern.root], {node[c]: node[p] for c, p in pattern.parent.items()})
        connectors = {tuple(sorted((node[u], node[v]))): a for (u, v), a in w.middle_map.items()}
        try:
            emb, _ = clump_embed_trigger(arr, SUBDIVISION_TREE, (s_tree, connectors), t, params,
                                         child_seed(seed, 0xF, 1))
            return run.found("f", emb)
        except (EmbedFailure, PreconditionError) as exc:
            run.fail_hypothesis("clump-tree-embedding")
            return run.inconclusive("f", "embedding along the subdivided clump tree failed", {"error": str(exc)})
    run.note("f", "clumps ordered", {"clumps": len(ordered), "limit": float(limit)})

    # (g)
    cert = _certificate(run, clumps, ordered, dsets, sparse)
    chk = validate_certificate(g, t, cert)
    if not chk.ok:
        raise AssertionError("pipeline produced an invalid certificate: " + "; ".join(chk.reasons))
    counts = {k: len(v) for k, v in cert.accounting.items()}
    run.note("g", "certificate built", {**counts, "deleted": chk.deleted, "max_cover": chk.max_cover,
                                       "components": len(cert.components)}, list(chk.warnings))
    if chk.deleted > chk.deleted_target:
        run.fail_hypothesis("deletion-budget")
    if chk.max_cover > chk.cover_target:
        run.fail_hypothesis("cover-budget")
    if not chk.within_targets:
        return run.inconclusive("g", "certificate exceeds its size targets",
                                {"certificate": cert.to_json(n)})
    return StructureResult(CERTIFICATE, certificate=cert, report={"stage": "g", "warnings": list(chk.warnings)},
                           stage_log=run.log, host_order=n)


def _certificate(run, clumps, ordered, dsets, sparse):
    """Trim every clump to J_i and account for each deleted edge."""
    g = run.g
    non_b = set()
    overlap_edges = set()
    pieces = []
    for i, c in enumerate(ordered):
        clump = clumps[c]
        sets = derive_sets(clump)
        b_edges = set(sets.b_graph.edges())
        non_b |= set(clump.graph.edges()) - b_edges
        later = set()
        for o in ordered[i + 1:]:
            later |= dsets[o]
        cut = dsets[c] & later
        keep = [e for e in b_edges if e[0] not in cut and e[1] not in cut]
        overlap_edges |= b_edges - set(keep)
        if keep:
            pieces.append((Graph({x for e in keep for x in e}, keep), sets.m_union))
    components = []
    for j, cover in pieces:
        for comp in j.component_graphs():
            cv = frozenset(cover & comp.vertex_set())
            assert is_cover(comp, cv)
            components.append((comp, cv))
    components.sort(key=lambda x: x[0].vertices[0])
    deleted = frozenset(sparse) | non_b | overlap_edges
    accounting = {"sparse_edges": frozenset(sparse), "non_B_edges": frozenset(non_b),
                  "overlap_edges": frozenset(overlap_edges)}
    assert sum(len(v) for v in accounting.values()) == len(deleted)
    return DeletionCertificate(deleted, components, accounting, run.params, tuple(run.caveats))
