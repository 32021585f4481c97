"""Tree embeddings and the independent validator.

The validator rebuilds its own edge set from the host's edge list and walks
the raw parent map of the tree; it does not call any construction routine.
"""
from dataclasses import dataclass, field

from .errors import GraphValidationError


@dataclass(frozen=True)
class Embedding:
    tree: object
    host: object
    map: dict
    anchor: object = None
    notes: tuple = field(default=(), compare=False)

    def image(self):
        return set(self.map.values())

    def to_json(self, tree_file=None, host_file=None):
        return {
            "tree_file": tree_file,
            "host_file": host_file,
            "map": [[int(k), int(v)] for k, v in sorted(self.map.items())],
            "validated": validate_embedding(self).ok,
        }


@dataclass(frozen=True)
class Check:
    ok: bool
    reasons: tuple = ()

    def __bool__(self):
        return self.ok


def check_embedding(tree, host, mapping, anchor=None):
    """Injectivity, totality, edge preservation and anchor placement."""
    reasons = []
    tree_vertices = set(tree.vertices)
    host_vertices = set(host.vertices)
    host_edges = set()
    for u, v in host.edges():
        host_edges.add((u, v))
        host_edges.add((v, u))
    missing = tree_vertices - set(mapping)
    if missing:
        reasons.append(f"unmapped tree vertices {sorted(missing)[:5]}")
    extra = set(mapping) - tree_vertices
    if extra:
        reasons.append(f"map has non-tree keys {sorted(extra)[:5]}")
    images = [mapping[x] for x in mapping]
    if len(set(images)) != len(images):
        reasons.append("not injective")
    bad = [x for x in mapping if mapping[x] not in host_vertices]
    if bad:
        reasons.append(f"images outside host for {sorted(bad)[:5]}")
    for c, p in tree.parent.items():
        if c in mapping and p in mapping and (mapping[c], mapping[p]) not in host_edges:
            reasons.append(f"tree edge ({p}, {c}) maps to non-edge ({mapping[p]}, {mapping[c]})")
            break
    if anchor is not None and mapping.get(tree.root) != anchor:
        reasons.append(f"root maps to {mapping.get(tree.root)}, expected anchor {anchor}")
    return Check(not reasons, tuple(reasons))


def validate_embedding(emb):
    return check_embedding(emb.tree, emb.host, emb.map, emb.anchor)


def require_valid(emb):
    """Return emb or raise if the independent validator rejects it."""
    chk = validate_embedding(emb)
    if not chk.ok:
        raise GraphValidationError("invalid embedding: " + "; ".join(chk.reasons))
    return emb
