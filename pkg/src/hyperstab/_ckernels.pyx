# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels mirroring _pykernels.  Masks are limited to 64 vertices."""
from libc.stdlib cimport calloc, malloc, free
from libc.string cimport memset

ctypedef unsigned long long u64

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int popcount(u64 x) noexcept nogil:
    return __builtin_popcountll(x)




def min_ratio_cut(int n, masks):
    if n < 2:
        raise ValueError("need at least two vertices")
    if n > 63:
        raise ValueError("compiled cut kernel supports at most 63 vertices")
    cdef u64 m[64]
    cdef int deg[64]
    cdef int i
    for i in range(n):
        m[i] = masks[i]
        deg[i] = popcount(m[i])
    cdef u64 full = (<u64>1 << n) - 1
    cdef u64 a_mask = 1, g, prev = 0, flip, best_mask = 1
    cdef long long cut = deg[0], best_num = deg[0], best_den = n - 1, den, lhs, rhs
    cdef int a = 1, best_a = 1, v, inside
    cdef u64 it, stop = <u64>1 << (n - 1)
    with nogil:
        it = 1
        while it < stop:
            g = it ^ (it >> 1)
            flip = g ^ prev
            prev = g
            v = __builtin_ctzll(flip) + 1
            inside = popcount(m[v] & a_mask)
            if (a_mask >> v) & 1:
                a_mask &= ~(<u64>1 << v)
                a -= 1
                cut += 2 * inside - deg[v]
            else:
                cut += deg[v] - 2 * inside
                a_mask |= <u64>1 << v
                a += 1
            it += 1
            if a_mask == full:
                continue
            den = a * (n - a)
            lhs = cut * best_den
            rhs = best_num * den
            if lhs < rhs or (lhs == rhs and a_mask < best_mask):
                best_num = cut
                best_den = den
                best_a = a
                best_mask = a_mask
    return int(best_num), best_a, int(best_mask)


cdef struct Net:
    int nodes
    int narcs
    int *head
    int *to
    int *cap
    int *nxt
    int *level
    int *it
    int *queue


cdef void net_add(Net *g, int u, int v, int c) noexcept nogil:
    g.to[g.narcs] = v; g.cap[g.narcs] = c; g.nxt[g.narcs] = g.head[u]; g.head[u] = g.narcs; g.narcs += 1
    g.to[g.narcs] = u; g.cap[g.narcs] = 0; g.nxt[g.narcs] = g.head[v]; g.head[v] = g.narcs; g.narcs += 1


cdef int net_bfs(Net *g, int s, int t) noexcept nogil:
    cdef int i, qh = 0, qt = 0, x, e
    for i in range(g.nodes):
        g.level[i] = -1
    g.level[s] = 0
    g.queue[qt] = s; qt += 1
    while qh < qt:
        x = g.queue[qh]; qh += 1
        e = g.head[x]
        while e != -1:
            if g.cap[e] > 0 and g.level[g.to[e]] < 0:
                g.level[g.to[e]] = g.level[x] + 1
                g.queue[qt] = g.to[e]; qt += 1
            e = g.nxt[e]
    return g.level[t] >= 0


cdef int net_dfs(Net *g, int x, int t, int f) noexcept nogil:
    cdef int e, y, got
    if x == t:
        return f
    while g.it[x] != -1:
        e = g.it[x]
        y = g.to[e]
        if g.cap[e] > 0 and g.level[y] == g.level[x] + 1:
            got = net_dfs(g, y, t, f if f < g.cap[e] else g.cap[e])
            if got > 0:
                g.cap[e] -= got
                g.cap[e ^ 1] += got
                return got
        g.it[x] = g.nxt[e]
    return 0


cdef int net_maxflow(Net *g, int s, int t) noexcept nogil:
    cdef int flow = 0, f, i
    while net_bfs(g, s, t):
        for i in range(g.nodes):
            g.it[i] = g.head[i]
        while True:
            f = net_dfs(g, s, t, 1 << 30)
            if f == 0:
                break
            flow += f
    return flow


cdef int gadget_flow_c(int n, int m, int *ea, int *eb, unsigned char *xin, unsigned char *yin,
                       Net *g) noexcept nogil:
    cdef int i, ein, eout, big = m + 1, a, b
    g.nodes = 2 + n + 2 * m
    g.narcs = 0
    for i in range(g.nodes):
        g.head[i] = -1
    for i in range(m):
        a = ea[i]; b = eb[i]
        ein = 2 + n + 2 * i
        eout = ein + 1
        net_add(g, ein, eout, 1)
        net_add(g, 2 + a, ein, big)
        net_add(g, eout, 2 + a, big)
        net_add(g, 2 + b, ein, big)
        net_add(g, eout, 2 + b, big)
        if xin[a] or xin[b]:
            net_add(g, 0, ein, big)
        if yin[a] or yin[b]:
            net_add(g, eout, 1, big)
    return net_maxflow(g, 0, 1)


cdef Net* net_alloc(int n, int m):
    cdef Net *g = <Net*>malloc(sizeof(Net))
    cdef int nodes = 2 + n + 2 * m
    cdef int arcs = 2 * (7 * m + 1)
    g.head = <int*>malloc(nodes * sizeof(int))
    g.level = <int*>malloc(nodes * sizeof(int))
    g.it = <int*>malloc(nodes * sizeof(int))
    g.queue = <int*>malloc(nodes * sizeof(int))
    g.to = <int*>malloc(arcs * sizeof(int))
    g.cap = <int*>malloc(arcs * sizeof(int))
    g.nxt = <int*>malloc(arcs * sizeof(int))
    return g


cdef void net_free(Net *g):
    free(g.head); free(g.level); free(g.it); free(g.queue)
    free(g.to); free(g.cap); free(g.nxt); free(g)


def gadget_flow(int n, edges, xmask, ymask):
    cdef int m = len(edges), i, f
    cdef int *ea = <int*>malloc((m + 1) * sizeof(int))
    cdef int *eb = <int*>malloc((m + 1) * sizeof(int))
    cdef unsigned char *xin = <unsigned char*>malloc(n + 1)
    cdef unsigned char *yin = <unsigned char*>malloc(n + 1)
    for i in range(m):
        ea[i] = edges[i][0]
        eb[i] = edges[i][1]
    for i in range(n):
        xin[i] = (xmask >> i) & 1
        yin[i] = (ymask >> i) & 1
    cdef Net *g = net_alloc(n, m)
    f = gadget_flow_c(n, m, ea, eb, xin, yin, g)
    net_free(g)
    free(ea); free(eb); free(xin); free(yin)
    return f


def pair_flow_table(int n, edges):
    cdef int m = len(edges), i, u, v, f
    cdef int *ea = <int*>malloc((m + 1) * sizeof(int))
    cdef int *eb = <int*>malloc((m + 1) * sizeof(int))
    # row u of nbr is the indicator of N(u)
    cdef unsigned char *nbr = <unsigned char*>calloc(n * n + 1, 1)
    for i in range(m):
        ea[i] = edges[i][0]
        eb[i] = edges[i][1]
        nbr[ea[i] * n + eb[i]] = 1
        nbr[eb[i] * n + ea[i]] = 1
    cdef Net *g = net_alloc(n, m)
    table = [[0] * n for _ in range(n)]
    for u in range(n):
        for v in range(u, n):
            with nogil:
                f = gadget_flow_c(n, m, ea, eb, nbr + u * n, nbr + v * n, g)
            table[u][v] = f
            table[v][u] = f
    net_free(g)
    free(ea); free(eb); free(nbr)
    return table


cdef long long tree_search_c(int n, u64 *masks, int *deg, int k, int *parent, int *tdeg,
                             int *img, long long budget, int *exhausted) noexcept nogil:
    cdef u64 cand[64]
    cdef u64 used = 0, c, low, pool
    cdef long long nodes = 0
    cdef int i = 0, v, w
    exhausted[0] = 1
    for i in range(k):
        img[i] = -1
    i = 0
    cand[0] = 0
    for v in range(n):
        if deg[v] >= tdeg[0]:
            cand[0] |= <u64>1 << v
    while True:
        if i == k:
            return nodes
        if i < 0:
            return -nodes - 1
        if img[i] >= 0:
            used &= ~(<u64>1 << img[i])
            img[i] = -1
        c = cand[i]
        if c == 0:
            i -= 1
            continue
        low = c & (~c + 1)
        cand[i] = c ^ low
        v = __builtin_ctzll(low)
        nodes += 1
        if nodes > budget:
            exhausted[0] = 0
            return -nodes - 1
        img[i] = v
        used |= low
        i += 1
        if i < k:
            pool = masks[img[parent[i]]] & ~used
            cand[i] = 0
            while pool:
                low = pool & (~pool + 1)
                pool ^= low
                w = __builtin_ctzll(low)
                if deg[w] >= tdeg[i]:
                    cand[i] |= low
            img[i] = -1


def tree_search(int n, masks, parent, long long budget):
    cdef int k = len(parent), i
    if k == 0:
        return [], 0, True
    if k > n:
        return None, 0, True
    if n > 64:
        raise ValueError("compiled tree kernel supports at most 64 vertices")
    cdef u64 hm[64]
    cdef int deg[64]
    cdef int par[64]
    cdef int td[64]
    cdef int img[64]
    cdef int exhausted = 1
    for i in range(n):
        hm[i] = masks[i]
        deg[i] = popcount(hm[i])
    for i in range(k):
        td[i] = 0
    par[0] = -1
    for i in range(1, k):
        par[i] = parent[i]
        td[i] += 1
        td[par[i]] += 1
    cdef long long r
    with nogil:
        r = tree_search_c(n, hm, deg, k, par, td, img, budget, &exhausted)
    if r >= 0:
        return [img[i] for i in range(k)], int(r), True
    return None, int(-r - 1), bool(exhausted)


def es_scan(int n, trees):
    if n > 11:
        raise ValueError("exhaustive scan is limited to 11 vertices")
    cdef int p = n * (n - 1) // 2
    cdef int pa[64]
    cdef int pb[64]
    cdef int idx = 0, i, j, e, nt = len(trees), t, ok
    for i in range(n):
        for j in range(i + 1, n):
            pa[idx] = i; pb[idx] = j; idx += 1
    cdef int *tk = <int*>malloc((nt + 1) * sizeof(int))
    cdef int *td_ = <int*>malloc((nt + 1) * sizeof(int))
    cdef int *tpar = <int*>malloc((nt + 1) * 64 * sizeof(int))
    cdef int *tdeg = <int*>malloc((nt + 1) * 64 * sizeof(int))
    for t in range(nt):
        d, parent = trees[t]
        td_[t] = d
        tk[t] = len(parent)
        for i in range(64):
            tdeg[t * 64 + i] = 0
        tpar[t * 64] = -1
        for i in range(1, tk[t]):
            tpar[t * 64 + i] = parent[i]
            tdeg[t * 64 + i] += 1
            tdeg[t * 64 + parent[i]] += 1
    cdef long long *checked = <long long*>malloc((nt + 1) * sizeof(long long))
    for t in range(nt):
        checked[t] = 0
    cdef u64 code, c, stop = <u64>1 << p
    cdef u64 hm[64]
    cdef int deg[64]
    cdef int img[64]
    cdef int exhausted
    bad = []
    code = 0
    while code < stop:
        e = popcount(code)
        ok = 0
        for t in range(nt):
            if 2 * e > (td_[t] - 1) * n:
                ok = 1
                break
        if ok:
            for i in range(n):
                hm[i] = 0
            c = code
            idx = 0
            while c:
                if c & 1:
                    hm[pa[idx]] |= <u64>1 << pb[idx]
                    hm[pb[idx]] |= <u64>1 << pa[idx]
                c >>= 1
                idx += 1
            for i in range(n):
                deg[i] = popcount(hm[i])
            for i in range(n - 1):
                if deg[i] < deg[i + 1]:
                    ok = 0
                    break
            if ok:
                for t in range(nt):
                    if 2 * e <= (td_[t] - 1) * n:
                        continue
                    checked[t] += 1
                    if tk[t] > n or tree_search_c(n, hm, deg, tk[t], &tpar[t * 64], &tdeg[t * 64],
                                                  img, <long long>1 << 62, &exhausted) < 0:
                        bad.append((int(code), t))
        code += 1
    out = [int(checked[t]) for t in range(nt)]
    free(tk); free(td_); free(tpar); free(tdeg); free(checked)
    return out, bad
