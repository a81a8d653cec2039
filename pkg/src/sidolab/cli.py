"""Command-line driver: ``sidolab <command> ...`` emitting one report row per result.

Exit codes: 0 when every verdict holds, 1 when some verdict fails, 2 for
unparseable input or unmet preconditions, 3 when a budget is exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Iterator

from . import brw, density, entropy, homs, treedecomp
from .errors import BudgetExceeded, SidolabError
from .graph import build_named_graph, serialize_graph
from .report import jsonable

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


def _graph(spec: str, args):
    g = build_named_graph(spec)
    if args.max_n is not None and g.n > args.max_n:
        raise BudgetExceeded(f"{spec} has {g.n} vertices, above --max-n {args.max_n}")
    return g


def _edges(g) -> list:
    return [list(e) for e in g.edges]


def _verdict(ok) -> str:
    return "holds" if ok else "fails"


# -- command handlers: each yields plain dict rows ---------------------------

def cmd_construct(args) -> Iterator[dict]:
    g = _graph(args.family, args)
    yield {"family": args.family, "n": g.n, "m": g.m, "edges": _edges(g), "text": serialize_graph(g)}


def cmd_count(args) -> Iterator[dict]:
    h, g = _graph(args.H, args), _graph(args.G, args)
    yield {"H": args.H, "G": args.G, "method": args.method, "hom": homs.count_homomorphisms(h, g, args.method)}


def cmd_check_sidorenko(args) -> Iterator[dict]:
    h, g = _graph(args.H, args), _graph(args.G, args)
    rep = homs.sidorenko_check(h, g, args.method)
    yield {"H": args.H, "G": args.G, **rep.to_dict(), "verdict": _verdict(rep.holds)}


def cmd_decompose(args) -> Iterator[dict]:
    h = _graph(args.H, args)
    res = treedecomp.find_strong_decomposition(h, time_limit=args.time_limit)
    row = {"H": args.H, "exhaustive": res.exhaustive, "covers_examined": res.covers_examined}
    d = res.decomposition
    if d is None:
        row.update(decomposition=None, verdict="fails")
    else:
        cls = treedecomp.classify_family(h, d)
        row.update(decomposition=json.loads(d.to_json()), classification=cls,
                   verdict=_verdict(treedecomp.validate_strong(h, d).valid))
    yield row


def _load_decomposition(path: str) -> treedecomp.TreeDecomposition:
    with open(path) as fh:
        return treedecomp.TreeDecomposition.from_json(fh.read())


def cmd_validate_decomp(args) -> Iterator[dict]:
    h = _graph(args.H, args)
    d = _load_decomposition(args.decomp)
    base = treedecomp.validate_decomposition(h, d)
    diag = treedecomp.validate_strong(h, d) if base.valid else base
    yield {"H": args.H, "diagnostics": diag.to_dict(), "verdict": "valid" if diag.valid else "fails"}


def cmd_brw_sample(args) -> Iterator[dict]:
    t, g = _graph(args.T, args), _graph(args.G, args)
    for i in range(args.samples):
        img = brw.brw_sample(t, g, args.seed, i)
        yield {"index": i, "seed": args.seed, "image": list(img),
               "verdict": _verdict(homs.is_homomorphism(t, g, img))}


def cmd_brw_dist(args) -> Iterator[dict]:
    t, g = _graph(args.T, args), _graph(args.G, args)
    dist = brw.brw_distribution(t, g, max_support=args.max_hom)
    for h, p in zip(dist.support, dist.prob):
        yield {"image": list(h), "prob": p}


def cmd_brw_audit(args) -> Iterator[dict]:
    from scipy.stats import chi2

    t, g = _graph(args.T, args), _graph(args.G, args)
    dist = brw.brw_distribution(t, g, max_support=args.max_hom)
    law = dist.as_dict()
    counts = dict.fromkeys(law, 0)
    for h in brw.brw_sample_batch(t, g, args.seed, args.samples):
        counts[h] += 1  # a KeyError here would mean a non-homomorphism
    n = args.samples
    stat = sum((counts[h] - n * float(p)) ** 2 / (n * float(p)) for h, p in law.items())
    df = len(law) - 1
    crit = float(chi2.ppf(0.999, df)) if df > 0 else 0.0
    edge_uniform = all(
        set(dist.pushforward((u, v)).values()) == {Fraction(1, 2 * g.m)} for u, v in t.edges
    )
    yield {"T": args.T, "G": args.G, "seed": args.seed, "samples": n, "support": len(law),
           "total_mass": sum(law.values(), Fraction(0)), "edge_marginals_uniform": edge_uniform,
           "chi2": stat, "df": df, "critical_0.999": crit,
           "verdict": _verdict(edge_uniform and (df == 0 or stat < crit))}


def cmd_entropy_tree(args) -> Iterator[dict]:
    t, g = _graph(args.T, args), _graph(args.G, args)
    rep = entropy.tree_entropy_bound(t, g)
    yield {"T": args.T, "G": args.G, **rep.to_dict(), "verdict": _verdict(rep.holds)}


def cmd_entropy_chain(args) -> Iterator[dict]:
    h, g = _graph(args.H, args), _graph(args.G, args)
    if args.decomp:
        d = _load_decomposition(args.decomp)
    else:
        d = treedecomp.find_strong_decomposition(h, time_limit=args.time_limit).decomposition
        if d is None:
            raise treedecomp.DecompositionError(f"{args.H} has no strong tree decomposition")
    rep = entropy.std_entropy_chain(h, d, g, root=args.root)
    yield {"H": args.H, "G": args.G, "decomposition": json.loads(d.to_json()), **rep.to_dict(),
           "verdict": _verdict(rep.holds)}


def cmd_density_local(args) -> Iterator[dict]:
    g = _graph(args.G, args)
    params = density.DensityParams(Fraction(args.rho), Fraction(args.d))
    res = density.is_locally_dense(g, params, mode=args.mode, samples=args.samples, seed=args.seed)
    yield {"G": args.G, "rho": params.rho, "d": params.d, **res.to_dict(), "verdict": _verdict(res.dense)}


def cmd_density_mindeg(args) -> Iterator[dict]:
    g = _graph(args.G, args)
    res = density.extract_min_degree_subgraph(g)
    yield {"G": args.G, **res.to_dict(), "verdict": _verdict(res.guarantees_hold)}


def cmd_density_codegree(args) -> Iterator[dict]:
    g = _graph(args.G, args)
    u = range(g.n) if args.U is None else [int(x) for x in args.U.split(",") if x.strip()]
    rep = density.codegree_bound_check(g, u)
    ok = rep.pair_identity and rep.holds is not False
    yield {"G": args.G, "U": list(u), **rep.to_dict(), "verdict": _verdict(ok)}


def _audit_row(rep, **inputs) -> dict:
    row = rep.to_dict()
    row["inputs"] = inputs  # the specs as typed, not the expanded graphs
    return row


def cmd_audit_subdivision(args) -> Iterator[dict]:
    rep = density.subdivision_identity_check(_graph(args.H, args), _graph(args.G, args))
    yield _audit_row(rep, H=args.H, G=args.G)


def cmd_audit_replacement(args) -> Iterator[dict]:
    rep = density.replacement_convexity_check(_graph(args.H, args), _graph(args.G, args), args.t)
    yield _audit_row(rep, H=args.H, G=args.G, t=args.t)


def cmd_audit_holder(args) -> Iterator[dict]:
    rep = density.holder_triangle_check(_graph(args.G, args), args.r, args.s, args.t)
    yield _audit_row(rep, G=args.G, r=args.r, s=args.s, t=args.t)


def cmd_audit_cartesian(args) -> Iterator[dict]:
    h, g = _graph(args.H, args), _graph(args.G, args)
    cap = args.max_hom if args.max_hom is not None else density.DEFAULT_MAX_HOM
    rep = density.cartesian_cycle_audit(h, args.k, g, max_hom=cap)
    yield {"H": args.H, "G": args.G, **rep.to_dict(), "verdict": _verdict(rep.holds)}


# -- argument parsing ---------------------------------------------------------

def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def default(x):
        return argparse.SUPPRESS if suppress else x

    parser.add_argument("--seed", type=int, default=default(0), help="64-bit seed for randomized commands")
    parser.add_argument("--format", choices=("json", "csv", "text"), default=default("json"))
    parser.add_argument("--max-hom", type=int, default=default(None), help="cap on enumerated homomorphisms")
    parser.add_argument("--max-n", type=int, default=default(None), help="cap on input graph order")
    parser.add_argument("--samples", type=int, default=default(1000))
    parser.add_argument("--out", default=default(None), help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sidolab", allow_abbrev=False,
                                     description="Homomorphism counts, BRW laws, and audits.")
    _global_flags(parser, suppress=False)
    shared = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    _global_flags(shared, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, sp=sub, **kw):
        p = sp.add_parser(name, parents=[shared], allow_abbrev=False, **kw)
        p.set_defaults(handler=handler)
        return p

    p = add("construct", cmd_construct)
    p.add_argument("family", help="graph spec such as cycle:6 or gnp:16,1/2,7")
    for name, fn in (("count", cmd_count), ("check-sidorenko", cmd_check_sidorenko)):
        p = add(name, fn)
        p.add_argument("--H", required=True)
        p.add_argument("--G", required=True)
        p.add_argument("--method", choices=("auto", "backtrack", "matrix"), default="auto")
    p = add("decompose", cmd_decompose)
    p.add_argument("--H", required=True)
    p.add_argument("--time-limit", type=float, default=60.0)
    p = add("validate-decomp", cmd_validate_decomp)
    p.add_argument("--H", required=True)
    p.add_argument("--decomp", required=True, help="JSON file with bags and tree_edges")

    brw_p = sub.add_parser("brw", allow_abbrev=False).add_subparsers(dest="action", required=True)
    for name, fn in (("sample", cmd_brw_sample), ("dist", cmd_brw_dist), ("audit", cmd_brw_audit)):
        p = add(name, fn, brw_p)
        p.add_argument("--T", required=True)
        p.add_argument("--G", required=True)

    ent_p = sub.add_parser("entropy", allow_abbrev=False).add_subparsers(dest="action", required=True)
    p = add("tree", cmd_entropy_tree, ent_p)
    p.add_argument("--T", required=True)
    p.add_argument("--G", required=True)
    p = add("chain", cmd_entropy_chain, ent_p)
    p.add_argument("--H", required=True)
    p.add_argument("--G", required=True)
    p.add_argument("--decomp")
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=60.0)

    den_p = sub.add_parser("density", allow_abbrev=False).add_subparsers(dest="action", required=True)
    p = add("local", cmd_density_local, den_p)
    p.add_argument("--G", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--d", required=True)
    p.add_argument("--mode", choices=("exhaustive", "sample"), default="exhaustive")
    p = add("mindeg", cmd_density_mindeg, den_p)
    p.add_argument("--G", required=True)
    p = add("codegree", cmd_density_codegree, den_p)
    p.add_argument("--G", required=True)
    p.add_argument("--U", help="comma-separated vertices (default: all)")

    aud_p = sub.add_parser("audit", allow_abbrev=False).add_subparsers(dest="action", required=True)
    p = add("subdivision", cmd_audit_subdivision, aud_p)
    p.add_argument("--H", required=True)
    p.add_argument("--G", required=True)
    p = add("replacement", cmd_audit_replacement, aud_p)
    p.add_argument("--H", required=True)
    p.add_argument("--G", required=True)
    p.add_argument("--t", type=int, required=True)
    p = add("holder", cmd_audit_holder, aud_p)
    p.add_argument("--G", required=True)
    for name in ("--r", "--s", "--t"):
        p.add_argument(name, type=int, required=True)
    p = add("cartesian", cmd_audit_cartesian, aud_p)
    p.add_argument("--H", required=True)
    p.add_argument("--G", required=True)
    p.add_argument("--k", type=int, required=True)
    return parser


def _flatten(row: dict) -> dict:
    out = {}
    for k, v in jsonable(row).items():
        out[k] = json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v
    return out


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return "".join(json.dumps(jsonable(r)) + "\n" for r in rows)
    if fmt == "csv":
        flat = [_flatten(r) for r in rows]
        fields = list(dict.fromkeys(k for r in flat for k in r))
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(flat)
        return buf.getvalue()
    lines = []
    for r in rows:
        lines.append(" ".join(f"{k}={v}" for k, v in _flatten(r).items() if k != "text"))
    return "\n".join(lines) + ("\n" if lines else "")


def _exit_code(rows: list[dict]) -> int:
    verdicts = [r["verdict"] for r in rows if "verdict" in r]
    return EXIT_OK if all(v in ("holds", "valid") for v in verdicts) else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.max_hom is None:
        args.max_hom = brw.DEFAULT_MAX_SUPPORT if args.handler is not cmd_audit_cartesian else None
    try:
        rows = list(args.handler(args))
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SidolabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(rows, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return _exit_code(rows)


if __name__ == "__main__":
    sys.exit(main())
