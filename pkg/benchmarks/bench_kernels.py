"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each row times one kernel on a fixed seeded input with both backends and
checks that they agree.
"""
import argparse
import time

import numpy as np

from hyperstab import _pykernels as py
from hyperstab.graph import complete_graph, disjoint_union, random_graph
from hyperstab.oracle import trees_with_edges

try:
    from hyperstab import _ckernels as cy
except ImportError:
    cy = None


def _inputs():
    rng = np.random.default_rng(2024)
    g14 = random_graph(14, 0.5, rng).relabeled()[0]
    g30 = random_graph(30, 0.3, rng).relabeled()[0]
    # no 9-vertex path in two disjoint K_8: the search has to exhaust
    kk = disjoint_union([complete_graph(8), complete_graph(8, offset=8)])
    path = [-1] + list(range(8))
    trees = []
    for d in range(1, 4):
        for t in trees_with_edges(d):
            trees.append((d, [-1] + [t.parent[i] for i in range(1, len(t))]))
    return [
        ("min_ratio_cut n=14", "min_ratio_cut", (14, g14.adjacency_masks())),
        ("pair_flow_table n=30", "pair_flow_table", (30, list(g30.edges()))),
        ("tree_search P9 in 2K8", "tree_search", (16, kk.adjacency_masks(), path, 10**7)),
        ("es_scan n=6 d<=3", "es_scan", (6, trees)),
    ]


def _time(fn, args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled kernels not built; only the Python backend is available")
    print(f"{'kernel':<24}{'python s':>12}{'cython s':>12}{'speedup':>10}  agree")
    for label, name, inp in _inputs():
        tp, outp = _time(getattr(py, name), inp, args.repeat)
        if cy is None:
            print(f"{label:<24}{tp:>12.4f}{'-':>12}{'-':>10}  -")
            continue
        tc, outc = _time(getattr(cy, name), inp, args.repeat)
        agree = outp == outc
        print(f"{label:<24}{tp:>12.4f}{tc:>12.4f}{tp / max(tc, 1e-9):>10.1f}  {agree}")


if __name__ == "__main__":
    main()
