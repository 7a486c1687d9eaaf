"""Command-line entry point: ``epsapprox <command> ...``.

Point sets travel as CSV, everything else as JSON.  Every command that
writes ``--out`` also writes ``<out>.manifest.json`` with the command line,
configuration, seed, version, input and output digests and wall time.
Exit codes: 0 success, 1 domain error (error JSON on stdout), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .discrepancy import beck_fiala, canonical_structure
from .geometry import DirectionSet, RangeFamily
from .io import (dumps, file_digest, load_patch_json, load_terrain_json, read_points_csv,
                 write_json, write_points_csv)
from .lowdisc import LatticeSpec, irrational_lattice, stretched_vdc, van_der_corput
from .merge_reduce import (ReduceConfig, epsilon_approx, random_sample_baseline,
                           weight_buckets, weighted_epsilon_approx)
from .oracle import eps_error_discrete, eps_error_terrain
from .scan import max_rect_general, max_rect_linear, max_rect_poisson_approx
from .sentinel import build_sentinels, disjoint_sentinels, verify_sentinel
from .terrain import GaussianSpec, gaussian_approx, pl_terrain_approx


class DomainError(Exception):
    """Input is well formed but the computation cannot proceed."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _family(text, dim=2):
    if text == "rect":
        return RangeFamily.rect(dim)
    if text.startswith("kdir:"):
        with open(text[5:], encoding="utf-8") as fh:
            dirs = json.load(fh)
        return RangeFamily.kdir(DirectionSet(np.asarray(dirs, dtype=np.float64), normalize=True))
    raise argparse.ArgumentTypeError("family must be 'rect' or 'kdir:<dirs.json>'")


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _cfg(args, eps=None):
    kw = dict(eps=args.eps if eps is None else eps, family=_family(args.family),
              threads=args.threads, check_decrease=False)
    if args.block_size:
        kw["block_size"] = args.block_size
    return ReduceConfig(**kw)


def _sibling(out, suffix):
    root, _ = os.path.splitext(out)
    return root + suffix


def _dump_curve(path, cert):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# step\tstage\tsize\terror\tcumulative\n")
        acc = 0.0
        for i, e in enumerate(cert.halve_log):
            acc += e.error
            fh.write(f"{i}\t{e.stage}\t{e.size}\t{e.error:.17g}\t{acc:.17g}\n")


# ------------------------------------------------------------------ commands

def cmd_gen(args, io_log):
    if args.kind == "vdc":
        P = van_der_corput(args.n)
    elif args.kind == "lattice":
        P = irrational_lattice(LatticeSpec(args.m, args.alpha or ()), args.dim)
    else:
        io_log["inputs"].append(args.patch)
        P = stretched_vdc(args.n, load_patch_json(args.patch))
    write_points_csv(args.out, P)
    io_log["outputs"].append(args.out)
    return {"size": len(P)}


def cmd_color(args, io_log):
    X = read_points_csv(args.input)
    io_log["inputs"].append(args.input)
    fam = _family(args.family)
    inc = canonical_structure(X, fam)
    chi = beck_fiala(inc)
    result = {"signs": chi.to_json(), "t": inc.t, "rows": inc.num_rows}
    write_json(args.out, result)
    io_log["outputs"].append(args.out)
    return {"t": inc.t}


def cmd_approx(args, io_log):
    X = read_points_csv(args.input)
    io_log["inputs"].append(args.input)
    if args.method == "random":
        P = random_sample_baseline(X, args.eps, args.delta, seed=args.seed)
        write_points_csv(args.out, P, with_weights=True)
        io_log["outputs"].append(args.out)
        return {"size": len(P)}
    cfg = _cfg(args)
    if len(np.unique(weight_buckets(X.weights))) > 1:
        P, cert = weighted_epsilon_approx(X, cfg)
    else:
        P, cert = epsilon_approx(X, cfg)
    write_points_csv(args.out, P, with_weights=True)
    cpath = _sibling(args.out, ".cert.json")
    write_json(cpath, cert)
    io_log["outputs"] += [args.out, cpath]
    if args.dump_curve:
        _dump_curve(args.dump_curve, cert)
    return {"size": len(P), "accumulated_error": cert.accumulated_error}


def cmd_eval(args, io_log):
    P = read_points_csv(args.approx)
    io_log["inputs"].append(args.approx)
    if args.tin:
        T = load_terrain_json(args.tin)
        io_log["inputs"].append(args.tin)
        rep = eps_error_terrain(P, T, resolution=args.resolution)
    else:
        D = read_points_csv(args.ground)
        io_log["inputs"].append(args.ground)
        rep = eps_error_discrete(P, D, _family(args.family))
    if args.report:
        write_json(args.report, rep)
        io_log["outputs"].append(args.report)
    else:
        sys.stdout.write(dumps(rep))
    return {"max_error": rep.max_error}


def cmd_scan(args, io_log):
    M = read_points_csv(args.measured)
    B = read_points_csv(args.baseline)
    io_log["inputs"] += [args.measured, args.baseline]
    if len(M) == 0 or len(B) == 0:
        raise DomainError("measured and baseline sets must be nonempty")
    if args.stat == "linear":
        if args.coeffs is None or len(args.coeffs) != 3:
            raise DomainError("linear statistic needs --coeffs a,c,g")
        out = {"result": max_rect_linear(M, B, args.coeffs)}
    else:
        cfg = _cfg(args, eps=0.5)
        out = {"result": max_rect_poisson_approx(M, B, args.eps, cfg)}
        if args.exact:
            out["exact"] = max_rect_general(M, B, "poisson")
    _emit(args.out, out, io_log)
    return {"value": out["result"].value}


def _emit(path, obj, io_log):
    if path:
        write_json(path, obj)
        io_log["outputs"].append(path)
    else:
        sys.stdout.write(dumps(obj))


def _write_approx(out, P, cert, io_log, dump=None):
    write_points_csv(out, P, with_weights=True)
    cpath = _sibling(out, ".cert.json")
    write_json(cpath, cert)
    io_log["outputs"] += [out, cpath]
    if dump:
        _dump_curve(dump, cert)


def cmd_terrain(args, io_log):
    T = load_terrain_json(args.tin)
    io_log["inputs"].append(args.tin)
    cfg = _cfg(args)
    if not T.has_negative:
        P, cert = pl_terrain_approx(T, cfg)
        _write_approx(args.out, P, cert, io_log, args.dump_curve)
        return {"size": len(P)}
    summary = {}
    for name, part in zip(("pos", "neg"), T.split_at_zero()):
        out = _sibling(args.out, f".{name}.csv")
        P, cert = pl_terrain_approx(part, cfg)
        _write_approx(out, P, cert, io_log)
        summary[name] = {"size": len(P), "mass": part.total_mass}
    return summary


def cmd_gaussian(args, io_log):
    g = GaussianSpec(args.mean, args.sigma)
    P, cert = gaussian_approx(g, args.eps, _cfg(args))
    _write_approx(args.out, P, cert, io_log, args.dump_curve)
    return {"size": len(P), "accumulated_error": cert.accumulated_error}


def cmd_sentinel(args, io_log):
    D = read_points_csv(args.input)
    io_log["inputs"].append(args.input)
    if len(D) == 0:
        raise DomainError("input set is empty")
    fam = _family(args.family)
    if args.disjoint:
        sets = list(disjoint_sentinels(D, args.eps, fam).sets)
    else:
        sets = [build_sentinels(D, _cfg(args))]
    report = []
    for i, S in enumerate(sets):
        path = _sibling(args.out, f".{i}.csv")
        write_points_csv(path, S, with_weights=False)
        io_log["outputs"].append(path)
        v = verify_sentinel(S, D, args.eps, fam)
        report.append({"file": os.path.basename(path), "size": len(S), "verdict": v})
    rpath = _sibling(args.out, ".report.json")
    write_json(rpath, {"eps": args.eps, "sets": report})
    io_log["outputs"].append(rpath)
    return {"sets": len(sets), "all_pass": all(r["verdict"].ok for r in report)}


# -------------------------------------------------------------------- parser

def _common(p, eps=True, out=True, out_required=True):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--family", default="rect")
    p.add_argument("--block-size", type=int, default=0)
    p.add_argument("--dump-curve", default=None, help="TSV of the per-step error log")
    if eps:
        p.add_argument("--eps", type=float, required=True)
    if out:
        p.add_argument("--out", required=out_required)


def build_parser():
    ap = _Parser(prog="epsapprox", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate low-discrepancy point sets")
    gsub = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    g = gsub.add_parser("vdc")
    g.add_argument("--n", type=int, required=True)
    _common(g, eps=False)
    g = gsub.add_parser("lattice")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--alpha", type=_floats, default=None)
    _common(g, eps=False)
    g = gsub.add_parser("stretched")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--patch", required=True)
    _common(g, eps=False)

    p = sub.add_parser("color", help="Beck-Fiala coloring of a point set")
    p.add_argument("--input", required=True)
    _common(p, eps=False)

    p = sub.add_parser("approx", help="eps-approximation of a point set")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=("merge-reduce", "random"), default="merge-reduce")
    p.add_argument("--delta", type=float, default=0.1)
    _common(p)

    p = sub.add_parser("eval", help="oracle error of an approximation")
    p.add_argument("--approx", required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--ground")
    grp.add_argument("--tin")
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--report", default=None)
    _common(p, eps=False, out=False)

    p = sub.add_parser("scan", help="rectangle scan statistic")
    p.add_argument("--measured", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--stat", choices=("poisson", "linear"), default="poisson")
    p.add_argument("--coeffs", type=_floats, default=None)
    p.add_argument("--exact", action="store_true")
    _common(p, out_required=False)

    p = sub.add_parser("terrain", help="terrain pipelines")
    tsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    t = tsub.add_parser("approx")
    t.add_argument("--tin", required=True)
    _common(t)

    p = sub.add_parser("gaussian", help="Gaussian pipelines")
    gsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    g = gsub.add_parser("approx")
    g.add_argument("--sigma", type=_floats, required=True)
    g.add_argument("--mean", type=_floats, default=(0.0, 0.0))
    _common(g)

    p = sub.add_parser("sentinel", help="sentinel sets for cut detection")
    p.add_argument("--input", required=True)
    p.add_argument("--disjoint", action="store_true")
    _common(p)
    return ap


COMMANDS = {"gen": cmd_gen, "color": cmd_color, "approx": cmd_approx, "eval": cmd_eval,
            "scan": cmd_scan, "terrain": cmd_terrain, "gaussian": cmd_gaussian,
            "sentinel": cmd_sentinel}


def _manifest(argv, args, io_log, summary, seconds):
    config = {k: v for k, v in vars(args).items()}
    return {"argv": list(argv), "command": args.command, "config": config, "seed": args.seed,
            "version": __version__,
            "inputs": {p: file_digest(p) for p in io_log["inputs"]},
            "outputs": {p: file_digest(p) for p in io_log["outputs"]},
            "summary": summary, "seconds": seconds}


def dispatch(argv):
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "eps", None) is not None and not 0 < args.eps < 1:
        ap.error("--eps must lie in (0, 1)")
    try:
        _family(args.family)
    except (argparse.ArgumentTypeError, OSError, ValueError) as exc:
        ap.error(f"--family: {exc}")
    io_log = {"inputs": [], "outputs": []}
    t0 = time.perf_counter()
    try:
        summary = COMMANDS[args.command](args, io_log)
    except (DomainError, ValueError, OSError, AssertionError) as exc:
        sys.stdout.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                     "command": args.command}) + "\n")
        return 1
    out = getattr(args, "out", None) or getattr(args, "report", None)
    if out:
        write_json(_sibling(out, ".manifest.json"),
                   _manifest(argv, args, io_log, summary, time.perf_counter() - t0))
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        return dispatch(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
