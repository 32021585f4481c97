import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hyperstab.graph import Graph, RootedTree

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def brute_cut_density(g):
    """min e(A,B)/(|A||B|) over every bipartition, by plain enumeration."""
    from fractions import Fraction
    vs = list(g.vertices)
    edges = list(g.edges())
    best = None
    for r in range(1, len(vs)):
        for a in itertools.combinations(vs, r):
            a = set(a)
            cut = sum(1 for u, v in edges if (u in a) != (v in a))
            val = Fraction(cut, r * (len(vs) - r))
            if best is None or val < best:
                best = val
    return best


def random_connected(n, p, rng):
    """Random graph plus a random spanning tree, so it is connected."""
    order = rng.permutation(n).tolist()
    edges = {tuple(sorted((order[i], order[int(rng.integers(i))]))) for i in range(1, n)}
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges.add((u, v))
    return Graph(range(n), edges)


@st.composite
def graphs(draw, min_n=1, max_n=9):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(range(n), [e for e, keep in zip(pairs, mask) if keep])


@st.composite
def trees(draw, min_n=1, max_n=12, max_degree=None):
    n = draw(st.integers(min_n, max_n))
    parent = {}
    deg = {0: 0}
    for v in range(1, n):
        choices = [u for u in range(v) if max_degree is None or deg[u] < max_degree]
        p = draw(st.sampled_from(choices))
        parent[v] = p
        deg[p] += 1
        deg[v] = 1
    return RootedTree(0, parent)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def split_violations(t, res, lam, delta):
    """Independent check of a tree split: sizes, component count and overlap pattern."""
    out = []
    n = len(t)
    q = set(res.q_subtree.vertices)
    if not (1 - 2 * lam) * n <= len(q) <= (1 - lam) * n + 2 * delta:
        out.append(f"|Q|={len(q)} outside bounds for n={n}")
    if len(res.components) > delta:
        out.append(f"{len(res.components)} components > {delta}")
    if t.root not in q:
        out.append("root not in Q")
    covered = set(q)
    t_edges = set(t.edges())
    if not set(res.q_subtree.edges()) <= t_edges:
        out.append("Q uses a non-tree edge")
    for comp, y in zip(res.components, res.externals):
        cv = set(comp.vertices)
        if cv & q != {y}:
            out.append(f"component at {y} meets Q in {sorted(cv & q)}")
        if len(cv) - 1 > lam * n:
            out.append(f"component at {y} has {len(cv) - 1} > lam n vertices")
        if (cv - {y}) & (covered - q):
            out.append("components overlap")
        if not set(comp.edges()) <= t_edges:
            out.append("component uses a non-tree edge")
        covered |= cv
    if covered != set(t.vertices):
        out.append("Q and the components do not cover t")
    if len(res.externals) != len(res.components):
        out.append("externals and components differ in number")
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
