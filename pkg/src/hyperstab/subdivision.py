"""1-subdivisions of trees in bipartite graphs, with subdivision vertices on
a prescribed side, and an independent witness checker."""
from dataclasses import dataclass, field
from itertools import combinations

from .embedding import Check
from .errors import ConstructionFailure, PreconditionError
from .graph import Graph, RootedTree, core_peel
from .rng import make_rng

DEFAULT_ATTEMPTS = 16


@dataclass(frozen=True)
class SubdivisionWitness:
    pattern: RootedTree
    branch_map: dict  # pattern vertex -> B vertex
    middle_map: dict  # pattern edge (u, v), u < v -> A vertex
    route: str = ""
    notes: tuple = field(default=(), compare=False)

    def to_json(self, pattern_file=None):
        return {
            "pattern_file": pattern_file,
            "branch_map": [[int(x), int(b)] for x, b in sorted(self.branch_map.items())],
            "middle_map": [[int(u), int(v), int(a)] for (u, v), a in sorted(self.middle_map.items())],
        }


def common_neighbour_profile(bip, b_side, t_thresh, s_thresh):
    """Per B-vertex counts of partners sharing >= t_thresh and >= s_thresh neighbours."""
    b_side = sorted(b_side)
    common = {}
    for a in bip.vertices:
        if a in b_side:
            continue
        nb = sorted(bip.adj(a))
        for x, y in combinations(nb, 2):
            common[(x, y)] = common.get((x, y), 0) + 1
    at_t = {b: 0 for b in b_side}
    at_s = {b: 0 for b in b_side}
    for (x, y), c in common.items():
        if c >= t_thresh:
            at_t[x] += 1
            at_t[y] += 1
        if c >= s_thresh:
            at_s[x] += 1
            at_s[y] += 1
    return {
        "t_thresh": t_thresh,
        "s_thresh": s_thresh,
        "max_partners_at_t": max(at_t.values(), default=0),
        "max_partners_at_s": max(at_s.values(), default=0),
        "max_common": max(common.values(), default=0),
    }


def subdivide(pattern):
    """The 1-subdivision of pattern as a rooted tree, plus the edge of each middle vertex."""
    top = max(pattern.vertices) + 1
    parent = {}
    middle_of = {}
    for i, (c, p) in enumerate(sorted(pattern.parent.items())):
        mid = top + i
        parent[mid] = p
        parent[c] = mid
        middle_of[mid] = (min(c, p), max(c, p))
    return RootedTree(pattern.root, parent), middle_of


def _greedy(g, t, anchors):
    for a in anchors:
        mapping = {t.root: a}
        used = {a}
        ok = True
        for x in t.bfs_order()[1:]:
            img = mapping[t.parent[x]]
            choice = next((w for w in sorted(g.adj(img)) if w not in used), None)
            if choice is None:
                ok = False
                break
            mapping[x] = choice
            used.add(choice)
        if ok:
            return mapping
    return None


def _peel_targets(proof_target, greedy_target):
    return [proof_target] if proof_target <= greedy_target else [proof_target, greedy_target]


def prune_and_contract(bip, small, rng):
    """Keep two random edges at every vertex of small and contract each into an edge on B.

    Returns (contracted graph on B, {B-pair: A vertex}, {A vertex: kept pair}).
    """
    kept = {}
    pair_to_a = {}
    for a in sorted(small):
        nb = sorted(bip.adj(a))
        i, j = sorted(rng.choice(len(nb), size=2, replace=False).tolist())
        pair = (nb[i], nb[j])
        kept[a] = pair
        pair_to_a.setdefault(pair, a)
    b_vertices = {x for pair in kept.values() for x in pair}
    return Graph(b_vertices, sorted(pair_to_a)), pair_to_a, kept


def find_1_subdivision(bip, a_side, pattern, t_thresh=1, s_thresh=2, seed=0, attempts=DEFAULT_ATTEMPTS):
    """A 1-subdivision of pattern in bip with branch vertices in B and middles in A.

    If vertices of degree >= 8k (k = |pattern|) carry half the edges, peel
    that part to minimum degree 2k and embed the subdivided tree greedily.
    Otherwise prune every low-degree A-vertex to two random edges, contract
    into a graph on B, peel it to minimum degree k, embed pattern there
    greedily and uncontract.  Pruning is retried with fresh seeds.
    """
    a_side = set(a_side)
    if not a_side <= set(bip.vertices):
        raise PreconditionError("A side is not inside the graph")
    b_side = set(bip.vertices) - a_side
    for u, v in bip.edges():
        if (u in a_side) == (v in a_side):
            raise PreconditionError(f"edge ({u}, {v}) does not cross the bipartition")
    low = [a for a in sorted(a_side) if bip.degree(a) < 2]
    if low:
        raise PreconditionError(f"A-vertex {low[0]} has degree {bip.degree(low[0])} < 2")
    k = len(pattern)
    report = {"k": k, "profile": common_neighbour_profile(bip, b_side, t_thresh, s_thresh)}
    if k == 1:
        if not b_side:
            raise ConstructionFailure("no B-vertex for a single-vertex pattern", report)
        return SubdivisionWitness(pattern, {pattern.root: min(b_side)}, {}, "trivial")
    large = {a for a in a_side if bip.degree(a) >= 8 * k}
    small = a_side - large
    e_large = sum(bip.degree(a) for a in large)
    report.update(a_large=len(large), a_small=len(small), e_large=e_large, e_total=bip.m)
    notes = []
    tried = []
    if 2 * e_large >= bip.m:
        sub_tree, middle_of = subdivide(pattern)
        g = bip.subgraph(large | b_side)
        for target in _peel_targets(2 * k, sub_tree.num_edges):
            core = core_peel(g, target)
            anchors = sorted(v for v in core.vertices if v in b_side)
            mapping = _greedy(core, sub_tree, anchors)
            tried.append({"route": "large", "peel": target, "core": core.n, "ok": mapping is not None})
            if mapping is not None:
                if target != 2 * k:
                    notes.append(f"peeled to greedy threshold {target}")
                branch = {x: mapping[x] for x in pattern.vertices}
                middles = {e: mapping[m] for m, e in middle_of.items()}
                return _checked(bip, a_side, SubdivisionWitness(pattern, branch, middles, "large", tuple(notes)))
    if small:
        g = bip.subgraph(small | b_side)
        for attempt in range(attempts):
            rng = make_rng(seed, 0x5DB, attempt)
            s, pair_to_a, _ = prune_and_contract(g, small, rng)
            for target in _peel_targets(k, pattern.num_edges):
                core = core_peel(s, target)
                mapping = _greedy(core, pattern, list(core.vertices))
                tried.append({"route": "small", "attempt": attempt, "peel": target, "core": core.n,
                              "ok": mapping is not None})
                if mapping is None:
                    continue
                if target != k:
                    notes.append(f"peeled to greedy threshold {target}")
                middles = {}
                for c, p in pattern.parent.items():
                    x, y = sorted((mapping[c], mapping[p]))
                    middles[(min(c, p), max(c, p))] = pair_to_a[(x, y)]
                w = SubdivisionWitness(pattern, dict(mapping), middles, f"small:{attempt}", tuple(notes))
                return _checked(bip, a_side, w)
    report["tried"] = tried
    raise ConstructionFailure(f"no 1-subdivision of a {k}-vertex tree found", report)


def _checked(bip, a_side, w):
    chk = validate_subdivision(bip, w, a_side)
    if not chk.ok:
        raise AssertionError("finder produced an invalid witness: " + "; ".join(chk.reasons))
    return w


def validate_subdivision(bip, w, a_side=None):
    """Injectivity, totality and adjacency of a witness, from the host's raw edge list."""
    reasons = []
    adj = set()
    for u, v in bip.edges():
        adj.add((u, v))
        adj.add((v, u))
    t = w.pattern
    t_edges = [(min(c, p), max(c, p)) for c, p in t.parent.items()]
    if set(w.branch_map) != set(t.vertices):
        reasons.append("branch map does not cover the pattern")
    if set(w.middle_map) != set(t_edges):
        reasons.append("middle map does not cover the pattern edges")
    images = list(w.branch_map.values()) + list(w.middle_map.values())
    if len(images) != len(set(images)):
        reasons.append("not injective")
    verts = set(bip.vertices)
    if any(x not in verts for x in images):
        reasons.append("image outside host")
    for e in t_edges:
        if e not in w.middle_map or e[0] not in w.branch_map or e[1] not in w.branch_map:
            continue
        a = w.middle_map[e]
        if (a, w.branch_map[e[0]]) not in adj or (a, w.branch_map[e[1]]) not in adj:
            reasons.append(f"missing edge at pattern edge {e}")
            break
    if a_side is not None:
        a_side = set(a_side)
        if any(b in a_side for b in w.branch_map.values()) or any(a not in a_side for a in w.middle_map.values()):
            reasons.append("wrong side")
    return Check(not reasons, tuple(reasons))
