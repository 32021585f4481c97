"""Kernel backend selection.

The compiled module is used when it imports and HYPERSTAB_PURE is unset;
otherwise the pure-Python module.  Both expose the same functions, and the
wrappers here route oversized inputs to the Python versions.
"""
import os

from . import _pykernels as py

try:
    if os.environ.get("HYPERSTAB_PURE"):
        raise ImportError("pure backend requested")
    from . import _ckernels as c
    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build
    c = None
    BACKEND = "python"


def _impl(limit, n):
    return c if c is not None and n <= limit else py


def min_ratio_cut(n, masks):
    return _impl(63, n).min_ratio_cut(n, list(masks))


def gadget_flow(n, edges, xmask, ymask):
    return _impl(1 << 20, n).gadget_flow(n, list(edges), xmask, ymask)


def pair_flow_table(n, edges):
    return _impl(1 << 20, n).pair_flow_table(n, list(edges))


def tree_search(n, masks, parent, budget):
    return _impl(64, n).tree_search(n, list(masks), list(parent), budget)


def es_scan(n, trees):
    return _impl(11, n).es_scan(n, list(trees))
