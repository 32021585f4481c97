"""Simple undirected graphs, rooted trees, file I/O and peeling helpers.

Vertices are integers.  Graphs loaded from files use 0..n-1; subgraphs keep
the labels of their parent so embeddings compose across modules.  Kernels
that want dense indices go through :meth:`Graph.relabeled`.
"""
import heapq
from collections import deque
from fractions import Fraction
from pathlib import Path

from .errors import GraphValidationError, ParseError, PreconditionError


def _norm(u, v):
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable simple graph on an explicit vertex set."""

    __slots__ = ("_vertices", "_adj", "_m")

    def __init__(self, vertices, edges=()):
        vs = sorted(set(int(v) for v in vertices))
        adj = {v: set() for v in vs}
        m = 0
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphValidationError(f"self-loop at {u}")
            if u not in adj or v not in adj:
                raise GraphValidationError(f"edge ({u}, {v}) has an endpoint outside the vertex set")
            if v in adj[u]:
                raise GraphValidationError(f"duplicate edge ({min(u, v)}, {max(u, v)})")
            adj[u].add(v)
            adj[v].add(u)
            m += 1
        self._vertices = tuple(vs)
        self._adj = {v: frozenset(s) for v, s in adj.items()}
        self._m = m

    @classmethod
    def from_edges(cls, n, edges):
        """Graph on 0..n-1."""
        return cls(range(n), edges)

    @classmethod
    def _trusted(cls, vertices, adj, m):
        g = cls.__new__(cls)
        g._vertices = tuple(sorted(vertices))
        g._adj = adj
        g._m = m
        return g

    # -- basic accessors
    @property
    def vertices(self):
        return self._vertices

    @property
    def n(self):
        return len(self._vertices)

    def __len__(self):
        return len(self._vertices)

    @property
    def m(self):
        return self._m

    def edges(self):
        """Sorted list of edges (u, v) with u < v."""
        return sorted((u, v) for u in self._vertices for v in self._adj[u] if u < v)

    def vertex_set(self):
        return frozenset(self._vertices)

    def __contains__(self, v):
        return v in self._adj

    def adj(self, v):
        return self._adj[v]

    def degree(self, v):
        return len(self._adj[v])

    def has_edge(self, u, v):
        return u in self._adj and v in self._adj[u]

    def min_degree(self):
        return min((len(s) for s in self._adj.values()), default=0)

    def max_degree(self):
        return max((len(s) for s in self._adj.values()), default=0)

    def common_neighbors(self, u, v):
        return self._adj[u] & self._adj[v]

    # -- derived graphs
    def subgraph(self, vertices):
        """Induced subgraph, original labels kept."""
        keep = frozenset(vertices) & self._adj.keys()
        adj = {v: self._adj[v] & keep for v in keep}
        m = sum(len(s) for s in adj.values()) // 2
        return Graph._trusted(keep, adj, m)

    def remove_vertices(self, vertices):
        return self.subgraph(self._adj.keys() - set(vertices))

    def remove_edges(self, edges):
        drop = {_norm(u, v) for u, v in edges}
        return Graph(self._vertices, [e for e in self.edges() if e not in drop])

    def edge_subgraph(self, edges, vertices=None):
        """Graph with the given edges; vertex set is their endpoints unless given."""
        edges = [_norm(u, v) for u, v in edges]
        if vertices is None:
            vertices = {x for e in edges for x in e}
        return Graph(vertices, edges)

    def union(self, other):
        verts = set(self._vertices) | set(other.vertices)
        es = set(self.edges()) | set(other.edges())
        return Graph(verts, es)

    def components(self):
        """Vertex tuples of connected components, ordered by smallest vertex."""
        seen = set()
        out = []
        for s in self._vertices:
            if s in seen:
                continue
            comp = [s]
            seen.add(s)
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in self._adj[x]:
                    if y not in seen:
                        seen.add(y)
                        comp.append(y)
                        queue.append(y)
            out.append(tuple(sorted(comp)))
        return out

    def component_graphs(self):
        return [self.subgraph(c) for c in self.components()]

    def is_connected(self):
        return self.n <= 1 or len(self.components()) == 1

    def relabeled(self):
        """(dense copy on 0..n-1, labels) where labels[i] is the original vertex."""
        labels = list(self._vertices)
        index = {v: i for i, v in enumerate(labels)}
        edges = [(index[u], index[v]) for u, v in self.edges()]
        return Graph.from_edges(len(labels), edges), labels

    def adjacency_masks(self):
        """Bitmask adjacency in relabeled index order."""
        index = {v: i for i, v in enumerate(self._vertices)}
        return [sum(1 << index[w] for w in self._adj[v]) for v in self._vertices]

    def to_networkx(self):
        import networkx as nx
        h = nx.Graph()
        h.add_nodes_from(self._vertices)
        h.add_edges_from(self.edges())
        return h

    def is_subgraph_of(self, other):
        return all(v in other for v in self._vertices) and all(other.has_edge(u, v) for u, v in self.edges())

    def __eq__(self, other):
        return isinstance(other, Graph) and self._vertices == other._vertices and self._adj == other._adj

    def __hash__(self):
        return hash((self._vertices, tuple(self.edges())))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


# -- constructors used throughout tests and generators

def complete_graph(n, offset=0):
    vs = range(offset, offset + n)
    return Graph(vs, [(u, v) for u in vs for v in vs if u < v])


def path_graph(n, offset=0):
    return Graph(range(offset, offset + n), [(offset + i, offset + i + 1) for i in range(n - 1)])


def cycle_graph(n, offset=0):
    edges = [(offset + i, offset + (i + 1) % n) for i in range(n)]
    return Graph(range(offset, offset + n), edges)


def star_graph(leaves, offset=0):
    return Graph(range(offset, offset + leaves + 1), [(offset, offset + i) for i in range(1, leaves + 1)])


def disjoint_union(graphs):
    """Disjoint union after shifting each graph to fresh labels."""
    verts, edges, base = [], [], 0
    for g in graphs:
        h, labels = g.relabeled()
        verts.extend(base + i for i in range(h.n))
        edges.extend((base + u, base + v) for u, v in h.edges())
        base += h.n
    return Graph(verts, edges)


def random_graph(n, p, rng):
    """G(n, p) on 0..n-1; rng is a numpy Generator."""
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges)


# -- rooted trees

class RootedTree:
    """Rooted tree given by a parent map."""

    __slots__ = ("root", "parent", "_children", "_vertices")

    def __init__(self, root, parent):
        parent = {int(c): int(p) for c, p in parent.items()}
        root = int(root)
        if root in parent:
            raise GraphValidationError("root has a parent")
        verts = {root} | set(parent)
        for c, p in parent.items():
            if p not in verts:
                raise GraphValidationError(f"parent {p} of {c} is not a tree vertex")
            if c == p:
                raise GraphValidationError(f"self-loop at {c}")
        children = {v: [] for v in verts}
        for c, p in parent.items():
            children[p].append(c)
        # every vertex must reach the root
        seen = {root}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for c in children[x]:
                seen.add(c)
                queue.append(c)
        if len(seen) != len(verts):
            raise GraphValidationError("parent map contains a cycle or is disconnected")
        self.root = root
        self.parent = parent
        self._children = {v: tuple(sorted(cs)) for v, cs in children.items()}
        self._vertices = tuple(sorted(verts))

    @classmethod
    def from_edges(cls, edges, root):
        """Orient an undirected edge list away from root."""
        adj = {root: set()}
        for u, v in edges:
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        parent = {}
        seen = {root}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in sorted(adj[x]):
                if y not in seen:
                    seen.add(y)
                    parent[y] = x
                    queue.append(y)
        if len(seen) != len(adj) or len(edges) != len(adj) - 1:
            raise GraphValidationError("edge list is not a tree")
        return cls(root, parent)

    @property
    def vertices(self):
        return self._vertices

    @property
    def order(self):
        return len(self._vertices)

    def __len__(self):
        return len(self._vertices)

    @property
    def num_edges(self):
        return len(self._vertices) - 1

    def children(self, v):
        return self._children[v]

    def neighbors(self, v):
        out = list(self._children[v])
        if v in self.parent:
            out.append(self.parent[v])
        return out

    def degree(self, v):
        return len(self._children[v]) + (1 if v in self.parent else 0)

    def max_degree(self):
        return max(self.degree(v) for v in self._vertices)

    def edges(self):
        return sorted(_norm(c, p) for c, p in self.parent.items())

    def __contains__(self, v):
        return v in self._children

    def bfs_order(self):
        out = [self.root]
        i = 0
        while i < len(out):
            out.extend(self._children[out[i]])
            i += 1
        return out

    def depth(self):
        d = {self.root: 0}
        for v in self.bfs_order()[1:]:
            d[v] = d[self.parent[v]] + 1
        return d

    def height(self):
        return max(self.depth().values())

    def subtree_sizes(self):
        size = {}
        for v in reversed(self.bfs_order()):
            size[v] = 1 + sum(size[c] for c in self._children[v])
        return size

    def descendants(self, v):
        """v and everything below it."""
        out = [v]
        i = 0
        while i < len(out):
            out.extend(self._children[out[i]])
            i += 1
        return out

    def subtree_at(self, v):
        """Subtree of all descendants of v, rooted at v."""
        desc = self.descendants(v)
        return RootedTree(v, {c: self.parent[c] for c in desc if c != v})

    def induced(self, vertices):
        """Induced subtree on a connected vertex set; root is its top vertex."""
        vs = set(vertices)
        depth = self.depth()
        top = min(vs, key=lambda x: (depth[x], x))
        parent = {}
        for c in vs:
            if c == top:
                continue
            p = self.parent.get(c)
            if p not in vs:
                raise GraphValidationError("vertex set does not induce a connected subtree")
            parent[c] = p
        return RootedTree(top, parent)

    def rerooted(self, new_root):
        return RootedTree.from_edges(self.edges(), new_root)

    def to_graph(self):
        return Graph(self._vertices, self.edges())

    def relabeled(self):
        """Copy on 0..n-1 in BFS order (root -> 0), plus the label list."""
        order = self.bfs_order()
        index = {v: i for i, v in enumerate(order)}
        return RootedTree(0, {index[c]: index[p] for c, p in self.parent.items()}), order

    def __eq__(self, other):
        return isinstance(other, RootedTree) and self.root == other.root and self.parent == other.parent

    def __hash__(self):
        return hash((self.root, tuple(sorted(self.parent.items()))))

    def __repr__(self):
        return f"RootedTree(order={self.order}, root={self.root})"


def path_tree(n):
    """Path on n vertices rooted at an end (vertex 0)."""
    return RootedTree(0, {i: i - 1 for i in range(1, n)})


def star_tree(leaves):
    return RootedTree(0, {i: 0 for i in range(1, leaves + 1)})


def random_tree(n, rng, max_degree=None):
    """Random recursive tree on 0..n-1 rooted at 0 with optional degree cap."""
    parent = {}
    deg = [0] * n
    for v in range(1, n):
        cands = [u for u in range(v) if max_degree is None or deg[u] < max_degree]
        u = cands[int(rng.integers(len(cands)))]
        parent[v] = u
        deg[u] += 1
        deg[v] += 1
    return RootedTree(0, parent)


# -- elementary facts

def edge_count_between(g, s, t):
    """Edges with one end in s and the other in t; edges inside s & t counted once."""
    s, t = set(s), set(t)
    seen = set()
    for u in s:
        for v in g.adj(u):
            if v in t:
                seen.add(_norm(u, v))
    return len(seen)


def min_degree_peel(g, x):
    """Delete vertices of degree <= floor(x), lowest index first, until none remain.

    Requires x > 0 and e(g) >= x|g|; the result has e(H) >= x|H| and minimum degree
    at least floor(x) + 1.
    """
    x = Fraction(x)
    if x <= 0:
        raise PreconditionError(f"peel threshold must be positive, got {x}")
    if g.m < x * g.n:
        raise PreconditionError(f"e(g)={g.m} < x|g|={x * g.n}")
    cap = x.numerator // x.denominator
    deg = {v: g.degree(v) for v in g.vertices}
    alive = set(g.vertices)
    heap = [v for v in g.vertices if deg[v] <= cap]
    heapq.heapify(heap)
    while heap:
        v = heapq.heappop(heap)
        if v not in alive or deg[v] > cap:
            continue
        alive.discard(v)
        for w in g.adj(v):
            if w in alive:
                deg[w] -= 1
                if deg[w] == cap:
                    heapq.heappush(heap, w)
    h = g.subgraph(alive)
    if h.n == 0:
        raise AssertionError("peeling emptied a graph that met the edge-count precondition")
    return h


def core_peel(g, k):
    """The k-core: repeatedly delete vertices of degree < k (may be empty)."""
    deg = {v: g.degree(v) for v in g.vertices}
    alive = set(g.vertices)
    stack = [v for v in g.vertices if deg[v] < k]
    while stack:
        v = stack.pop()
        if v not in alive:
            continue
        alive.discard(v)
        for w in g.adj(v):
            if w in alive:
                deg[w] -= 1
                if deg[w] < k:
                    stack.append(w)
    return g.subgraph(alive)


def densest_component(g):
    """Component with the largest e(C)/|C|; ties go to the smallest minimum vertex."""
    if g.n < 1:
        raise PreconditionError("graph has no vertices")
    best, best_ratio = None, None
    for comp in g.components():
        h = g.subgraph(comp)
        r = Fraction(h.m, h.n)
        if best_ratio is None or r > best_ratio:
            best, best_ratio = h, r
    return best


def is_cover(g, cover):
    c = set(cover)
    return all(u in c or v in c for u, v in g.edges())


# -- file formats

def _content_lines(text):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _ints(line, no, count):
    parts = line.split()
    if len(parts) != count:
        raise ParseError(f"expected {count} integers, got {len(parts)}", no)
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ParseError(f"non-integer token in {line!r}", no) from None


def parse_graph(text):
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty graph file")
    no, head = lines[0]
    n, m = _ints(head, no, 2)
    if n < 0 or m < 0:
        raise ParseError("negative header value", no)
    if len(lines) - 1 != m:
        raise ParseError(f"header declares {m} edges, found {len(lines) - 1}", no)
    edges = []
    for no, line in lines[1:]:
        u, v = _ints(line, no, 2)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"endpoint out of range [0, {n})", no)
        edges.append((u, v))
    return Graph.from_edges(n, edges)


def format_graph(g):
    h, _ = g.relabeled()
    out = [f"{h.n} {h.m}"]
    out.extend(f"{u} {v}" for u, v in h.edges())
    return "\n".join(out) + "\n"


def load_graph(path):
    return parse_graph(Path(path).read_text())


def save_graph(g, path):
    Path(path).write_text(format_graph(g))


def parse_tree(text):
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty tree file")
    no, head = lines[0]
    n, root = _ints(head, no, 2)
    if n < 1 or not 0 <= root < n:
        raise ParseError("bad tree header", no)
    if len(lines) - 1 != n - 1:
        raise ParseError(f"tree on {n} vertices needs {n - 1} parent lines", no)
    parent = {}
    for no, line in lines[1:]:
        c, p = _ints(line, no, 2)
        if not (0 <= c < n and 0 <= p < n):
            raise ParseError("vertex out of range", no)
        if c in parent:
            raise ParseError(f"vertex {c} has two parents", no)
        parent[c] = p
    return RootedTree(root, parent)


def format_tree(t):
    h, _ = t.relabeled() if set(t.vertices) != set(range(t.order)) else (t, None)
    out = [f"{h.order} {h.root}"]
    out.extend(f"{c} {p}" for c, p in sorted(h.parent.items()))
    return "\n".join(out) + "\n"


def load_tree(path):
    return parse_tree(Path(path).read_text())


def save_tree(t, path):
    Path(path).write_text(format_tree(t))
