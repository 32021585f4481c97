"""Seeded generators.  Each consumer derives a child stream from (seed, path)."""
import numpy as np


def make_rng(seed, *path):
    """numpy Generator for the stream named by integer path components."""
    key = tuple(int(p) & 0xFFFFFFFF for p in path)
    return np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=key))


def child_seed(seed, *path):
    """A fresh 63-bit integer seed derived deterministically."""
    return int(make_rng(seed, *path).integers(0, 2**63 - 1))
