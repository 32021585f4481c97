"""Pure-Python kernels.  Same signatures and results as the compiled module."""


def min_ratio_cut(n, masks):
    """Minimise e(A,B)/(|A||B|) over bipartitions with vertex 0 in A.

    Gray-code walk over the other n-1 vertices.  Returns (cut, size_a, mask_a);
    ties go to the smallest mask.
    """
    if n < 2:
        raise ValueError("need at least two vertices")
    full = (1 << n) - 1
    deg = [m.bit_count() for m in masks]
    a_mask = 1
    a = 1
    cut = deg[0]
    best = (cut, 1, 1)
    best_num, best_den = cut, n - 1
    prev = 0
    for i in range(1, 1 << (n - 1)):
        g = i ^ (i >> 1)
        flip = g ^ prev
        prev = g
        v = flip.bit_length()  # vertex index (bit v-1 of g is vertex v)
        inside = (masks[v] & a_mask).bit_count()
        if a_mask >> v & 1:
            a_mask &= ~(1 << v)
            a -= 1
            cut += 2 * inside - deg[v]
        else:
            cut += deg[v] - 2 * inside
            a_mask |= 1 << v
            a += 1
        if a_mask == full:
            continue
        den = a * (n - a)
        lhs = cut * best_den
        rhs = best_num * den
        if lhs < rhs or (lhs == rhs and a_mask < best[2]):
            best = (cut, a, a_mask)
            best_num, best_den = cut, den
    return best


def _dinic(num_nodes, arcs, s, t):
    """Max flow; arcs is a flat list of (u, v, cap)."""
    head = [-1] * num_nodes
    to, cap, nxt = [], [], []
    for u, v, c in arcs:
        to.append(v); cap.append(c); nxt.append(head[u]); head[u] = len(to) - 1
        to.append(u); cap.append(0); nxt.append(head[v]); head[v] = len(to) - 1
    flow = 0
    while True:
        level = [-1] * num_nodes
        level[s] = 0
        queue = [s]
        qi = 0
        while qi < len(queue):
            x = queue[qi]; qi += 1
            e = head[x]
            while e != -1:
                if cap[e] > 0 and level[to[e]] < 0:
                    level[to[e]] = level[x] + 1
                    queue.append(to[e])
                e = nxt[e]
        if level[t] < 0:
            return flow
        it = head[:]
        # iterative blocking flow with unit pushes along DFS paths
        while True:
            stack = [s]
            path = []
            found = False
            while stack:
                x = stack[-1]
                if x == t:
                    found = True
                    break
                e = it[x]
                advanced = False
                while e != -1:
                    y = to[e]
                    if cap[e] > 0 and level[y] == level[x] + 1:
                        path.append(e)
                        stack.append(y)
                        advanced = True
                        break
                    e = nxt[e]
                    it[x] = e
                if not advanced:
                    level[x] = -1
                    stack.pop()
                    if path:
                        path.pop()
                        it[stack[-1]] = nxt[it[stack[-1]]]
            if not found:
                break
            push = min(cap[e] for e in path)
            for e in path:
                cap[e] -= push
                cap[e ^ 1] += push
            flow += push


def gadget_network(n, edges, xmask, ymask):
    """Arc list of the edge-gadget network for sources X and sinks Y.

    Node layout: 0 = S, 1 = T, 2..n+1 vertices, then (in, out) per edge.
    Each undirected edge is a capacity-1 gadget; every unit of flow passes at
    least one gadget, so zero-length paths at X & Y are impossible.
    """
    big = len(edges) + 1
    arcs = []
    for i, (a, b) in enumerate(edges):
        ein = 2 + n + 2 * i
        eout = ein + 1
        arcs.append((ein, eout, 1))
        for x in (a, b):
            arcs.append((2 + x, ein, big))
            arcs.append((eout, 2 + x, big))
        if (xmask >> a | xmask >> b) & 1:
            arcs.append((0, ein, big))
        if (ymask >> a | ymask >> b) & 1:
            arcs.append((eout, 1, big))
    return 2 + n + 2 * len(edges), arcs


def gadget_flow(n, edges, xmask, ymask):
    nodes, arcs = gadget_network(n, edges, xmask, ymask)
    return _dinic(nodes, arcs, 0, 1)


def pair_flow_table(n, edges):
    """Symmetric n x n table of gadget flows from N(u) to N(v)."""
    nbr = [0] * n
    for a, b in edges:
        nbr[a] |= 1 << b
        nbr[b] |= 1 << a
    table = [[0] * n for _ in range(n)]
    for u in range(n):
        for v in range(u, n):
            f = gadget_flow(n, edges, nbr[u], nbr[v])
            table[u][v] = table[v][u] = f
    return table


def tree_search(n, masks, parent, budget):
    """Backtracking search for a copy of a tree in a host.

    parent[i] < i for i >= 1 (BFS order, parent[0] = -1).  Returns
    (mapping list or None, nodes_used, exhausted_flag).
    """
    k = len(parent)
    if k == 0:
        return [], 0, True
    if k > n:
        return None, 0, True
    tdeg = [0] * k
    for i in range(1, k):
        tdeg[i] += 1
        tdeg[parent[i]] += 1
    deg = [m.bit_count() for m in masks]
    img = [-1] * k
    cand = [0] * k
    nodes = 0
    used = 0
    i = 0
    cand[0] = sum(1 << v for v in range(n) if deg[v] >= tdeg[0])
    while True:
        if i == k:
            return img[:], nodes, True
        if i < 0:
            return None, nodes, True
        c = cand[i]
        if img[i] >= 0:
            used &= ~(1 << img[i])
            img[i] = -1
        if c == 0:
            i -= 1
            continue
        low = c & -c
        cand[i] = c ^ low
        v = low.bit_length() - 1
        nodes += 1
        if nodes > budget:
            return None, nodes, False
        img[i] = v
        used |= low
        i += 1
        if i < k:
            pool = masks[img[parent[i]]] & ~used
            m = 0
            while pool:
                b = pool & -pool
                pool ^= b
                w = b.bit_length() - 1
                if deg[w] >= tdeg[i]:
                    m |= b
            cand[i] = m
            img[i] = -1


def es_scan(n, trees):
    """Scan labelled graphs on n vertices with non-increasing degree sequence.

    trees: list of (d, parent list).  For each graph and each tree with
    e > (d-1)n/2, check containment.  Returns (checked, counterexamples) where
    checked[j] counts graphs tested against tree j and counterexamples is a
    list of (edge_mask, j).
    """
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    p = len(pairs)
    checked = [0] * len(trees)
    bad = []
    for code in range(1 << p):
        e = code.bit_count()
        need_any = False
        for d, _ in trees:
            if 2 * e > (d - 1) * n:
                need_any = True
                break
        if not need_any:
            continue
        masks = [0] * n
        c = code
        idx = 0
        while c:
            if c & 1:
                a, b = pairs[idx]
                masks[a] |= 1 << b
                masks[b] |= 1 << a
            c >>= 1
            idx += 1
        deg = [m.bit_count() for m in masks]
        if any(deg[i] < deg[i + 1] for i in range(n - 1)):
            continue
        for j, (d, parent) in enumerate(trees):
            if 2 * e <= (d - 1) * n:
                continue
            checked[j] += 1
            found, _, _ = tree_search(n, masks, parent, 1 << 62)
            if found is None:
                bad.append((code, j))
    return checked, bad
