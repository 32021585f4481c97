"""Command-line front end.

Every command prints one JSON document (sorted keys) to stdout or --out,
except ``gen`` which writes an edge list.  Exit codes: 0 success, 1 usage
or input error, 2 inconclusive / not found, 3 validation failure.
"""
import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .errors import HierarchyError, HyperstabError, ParseError, PreconditionError

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_INVALID = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fraction(text):
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return v


def _q_json(q):
    return {"q": f"{q.numerator}/{q.denominator}", "q_float": float(q)}


def _common(sub):
    # globals may also follow the subcommand; SUPPRESS keeps the top-level value otherwise
    g = sub.add_argument_group("global")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--budget", type=int, default=argparse.SUPPRESS)
    g.add_argument("--out", default=argparse.SUPPRESS)
    g.add_argument("--jobs", type=int, default=argparse.SUPPRESS)


def _param_flags(sub):
    sub.add_argument("--eps", type=_fraction, default=Fraction(1, 2))
    sub.add_argument("--delta-cap", type=int, default=3)
    sub.add_argument("--p", type=_fraction, default=Fraction(1, 2))
    sub.add_argument("--h", type=int, default=2)
    sub.add_argument("--alpha", type=_fraction, default=Fraction(1, 8))
    sub.add_argument("--kappa", type=_fraction, default=Fraction(1, 16))
    sub.add_argument("--L", type=int, default=2)
    sub.add_argument("--gamma", type=_fraction, default=Fraction(1, 32))
    sub.add_argument("--mu", type=_fraction, default=Fraction(1, 2))
    sub.add_argument("--levels", type=int, default=4)
    sub.add_argument("--retries", type=int, default=16)
    sub.add_argument("--strict-hierarchy", action="store_true")


def build_parser():
    ap = _Parser(prog="hyperstab", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=10**6)
    ap.add_argument("--out", default=None)
    ap.add_argument("--jobs", type=int, default=1)
    cmds = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cd = cmds.add_parser("cutdense", help="certify cut-density")
    cd.add_argument("mode", choices=["exact", "flow"])
    cd.add_argument("graph")
    _common(cd)

    dec = cmds.add_parser("decompose", help="delete few edges so every component is q-cut-dense")
    dec.add_argument("graph")
    dec.add_argument("--q", type=_fraction, required=True)
    _common(dec)

    em = cmds.add_parser("embed", help="embed a tree with one of the constructions")
    em.add_argument("graph")
    em.add_argument("tree")
    em.add_argument("--method", choices=["greedy", "expander", "cutdense", "pieces"], default="greedy")
    em.add_argument("--anchor", type=int, default=None)
    em.add_argument("--strict", action="store_true", help="expander: fail if the expansion test fails")
    em.add_argument("--pieces", default=None, help="pieces: JSON with pieces, tree and connectors")
    _param_flags(em)
    _common(em)

    hs = cmds.add_parser("hyperstab", help="embedding or deletion-plus-cover certificate")
    hs.add_argument("graph")
    hs.add_argument("tree")
    _param_flags(hs)
    _common(hs)

    orc = cmds.add_parser("oracle", help="brute-force oracles")
    osub = orc.add_subparsers(dest="oracle", required=True, parser_class=_Parser)
    sc = osub.add_parser("scan")
    sc.add_argument("--n", type=int, required=True)
    sc.add_argument("--d", type=int, required=True)
    _common(sc)
    co = osub.add_parser("contains")
    co.add_argument("graph")
    co.add_argument("tree")
    _common(co)
    cv = osub.add_parser("cover")
    cv.add_argument("graph")
    _common(cv)

    gen = cmds.add_parser("gen", help="extremal constructions as edge lists")
    gen.add_argument("kind", choices=["cliques", "regular", "join"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    _common(gen)
    return ap


def _params(args, d):
    from .params import ParamHierarchy
    p = ParamHierarchy(d=d, epsilon=args.eps, delta_cap=args.delta_cap, p=args.p, h=args.h, alpha=args.alpha,
                       kappa=args.kappa, L=args.L, gamma=args.gamma, mu=args.mu, seed=args.seed,
                       budget=args.budget, retries=args.retries, levels=args.levels,
                       strict=args.strict_hierarchy)
    for w in p.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return p


def _load(args):
    from .errors import GraphValidationError
    from .graph import load_graph, load_tree
    try:
        g = load_graph(args.graph)
        t = load_tree(args.tree) if getattr(args, "tree", None) else None
    except GraphValidationError as exc:
        # a malformed input file is an input error, not a failed check
        raise ParseError(str(exc)) from exc
    return g, t


def _cmd_cutdense(args):
    from .cutdense import exact_cut_density, flow_certify
    g, _ = _load(args)
    if args.mode == "exact":
        cert = exact_cut_density(g)
        return {"n": g.n, "m": g.m, **cert.to_json(), **_q_json(cert.q_value)}, EXIT_OK
    prof, cert = flow_certify(g)
    out = {"n": g.n, "m": g.m, **cert.to_json(), **_q_json(cert.q_value), "profile": prof.to_json()}
    return out, EXIT_OK


def _cmd_decompose(args):
    from .cutdense import decompose
    g, _ = _load(args)
    dec = decompose(g, args.q, seed=args.seed)
    return {"n": g.n, "m": g.m, "q": str(args.q), **dec.to_json()}, EXIT_OK


def _embed_result(emb, method, extra=None):
    from .embedding import validate_embedding
    out = {"method": method, "found": emb is not None, "embedding": None, **(extra or {})}
    if emb is None:
        return out, EXIT_INCONCLUSIVE
    chk = validate_embedding(emb)
    out["embedding"] = emb.to_json()
    out["notes"] = list(emb.notes)
    return out, EXIT_OK if chk.ok else EXIT_INVALID


def _load_pieces(path, g):
    from .graph import RootedTree
    spec = json.loads(Path(path).read_text())
    pieces = [g.subgraph(vs) for vs in spec["pieces"]]
    s_tree = RootedTree(spec.get("root", 0), {int(c): int(p) for c, p in spec["tree"]})
    connectors = {(min(i, j), max(i, j)): u for i, j, u in spec["connectors"]}
    return pieces, s_tree, connectors


def _cmd_embed(args):
    from .errors import EmbedFailure
    from .trees import embed_cut_dense, embed_tree_of_pieces, expander_embed, greedy_embed, greedy_precondition
    g, t = _load(args)
    params = _params(args, len(t))
    method = args.method
    try:
        if method == "greedy":
            anchors = [args.anchor] if args.anchor is not None else list(g.vertices)
            anchor = next((a for a in anchors if not greedy_precondition(g, t, a)), None)
            if anchor is None:
                why = greedy_precondition(g, t, anchors[0]) if anchors else ["empty host"]
                return _embed_result(None, method, {"error": "; ".join(why)})
            return _embed_result(greedy_embed(g, t, anchor), method)
        if method == "expander":
            return _embed_result(expander_embed(g, t, args.delta_cap, strict=args.strict, budget=args.budget,
                                                seed=args.seed), method)
        if method == "cutdense":
            from .clump import boosted_regular
            from .regular import max_disjoint_regular_family
            fam = max_disjoint_regular_family([g], params.r, budget=args.budget)
            reg, deg = boosted_regular(g, (2 + 2 * params.epsilon) * len(t), fam.union_graph())
            emb, _ = embed_cut_dense(g, reg, t, params, seed=args.seed)
            return _embed_result(emb, method, {"regular_degree": deg})
        if args.pieces is None:
            raise PreconditionError("--method pieces needs --pieces FILE")
        pieces, s_tree, connectors = _load_pieces(args.pieces, g)
        emb, _ = embed_tree_of_pieces(pieces, s_tree, connectors, t, params, anchor=args.anchor)
        return _embed_result(emb, method)
    except EmbedFailure as exc:
        return _embed_result(None, method, {"error": str(exc), "stage": exc.stage})


def _cmd_hyperstab(args):
    from .pipeline import CERTIFICATE, EMBEDDING_FOUND, hyperstability, validate_certificate
    from .embedding import check_embedding
    g, t = _load(args)
    params = _params(args, len(t))
    res = hyperstability(g, t, params)
    out = res.to_json(tree_file=args.tree, host_file=args.graph)
    if res.outcome == EMBEDDING_FOUND:
        ok = check_embedding(t, g, res.embedding.map).ok
        return out, EXIT_OK if ok else EXIT_INVALID
    if res.outcome == CERTIFICATE:
        chk = validate_certificate(g, t, res.certificate)
        for w in chk.warnings:
            print(f"warning: {w}", file=sys.stderr)
        return out, EXIT_OK if chk.ok and chk.within_targets else EXIT_INVALID
    return out, EXIT_INCONCLUSIVE


def _cmd_oracle(args):
    from .oracle import contains_tree, erdos_sos_scan, min_vertex_cover
    if args.oracle == "scan":
        rep = erdos_sos_scan(args.n, args.d, jobs=args.jobs)
        print(f"scan runtime {rep.runtime:.2f}s", file=sys.stderr)
        return rep.to_json(), EXIT_OK
    if args.oracle == "contains":
        g, t = _load(args)
        res = contains_tree(g, t, budget=max(args.budget, 1))
        out = {"answer": "yes" if res.found else "no", "found": res.found, "exhausted": res.exhausted,
               "embedding": res.embedding.to_json(args.tree, args.graph) if res.embedding else None}
        return out, EXIT_OK if res.found or res.exhausted else EXIT_INCONCLUSIVE
    g, _ = _load(args)
    res = min_vertex_cover(g, budget=args.budget)
    out = {"cover": sorted(res.cover), "size": len(res.cover), "optimal": res.optimal,
           "lower_bound": res.lower_bound}
    return out, EXIT_OK if res.optimal else EXIT_INCONCLUSIVE


def _cmd_gen(args):
    from .graph import format_graph
    from .oracle import DISJOINT_CLIQUES, DOMINATING_SET_JOIN, REGULAR, generate_extremal
    kind = {"cliques": DISJOINT_CLIQUES, "regular": REGULAR, "join": DOMINATING_SET_JOIN}[args.kind]
    return format_graph(generate_extremal(kind, args.n, args.d)), EXIT_OK


COMMANDS = {"cutdense": _cmd_cutdense, "decompose": _cmd_decompose, "embed": _cmd_embed,
            "hyperstab": _cmd_hyperstab, "oracle": _cmd_oracle, "gen": _cmd_gen}


def _emit(payload, out):
    text = payload if isinstance(payload, str) else json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        payload, code = COMMANDS[args.command](args)
    except (ParseError, PreconditionError, HierarchyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HyperstabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(payload, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
