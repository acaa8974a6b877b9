"""Command-line front end: one subcommand per computation, CSV or JSON rows out."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction

from . import analytic, charsum, classnum, curvecount, familylab
from .errors import DomainError, IdentityError, ResourceCapError

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_IDENTITY, EXIT_RESOURCE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------- formatting


def _fmt(v, precision: int):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.{precision}g}"
    if isinstance(v, complex):
        return f"{v.real:.{precision}g}{v.imag:+.{precision}g}j"
    if isinstance(v, (list, tuple)):
        return " ".join(str(_fmt(x, precision)) for x in v)
    return v


def _json_value(v, precision: int):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return None if math.isnan(v) else float(f"{v:.{precision}g}")
    if isinstance(v, complex):
        return [float(f"{v.real:.{precision}g}"), float(f"{v.imag:.{precision}g}")]
    if isinstance(v, (list, tuple)):
        return [_json_value(x, precision) for x in v]
    return v


def render(rows: list[dict], summary: dict, meta: dict | None, fmt: str, precision: int) -> str:
    if fmt == "json":
        doc = {
            "rows": [{k: _json_value(v, precision) for k, v in row.items()} for row in rows],
            "summary": {k: _json_value(v, precision) for k, v in summary.items()},
        }
        if meta is not None:
            doc["meta"] = {k: _json_value(v, precision) for k, v in meta.items()}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v, precision) for k, v in row.items()})
    for k, v in summary.items():
        buf.write(f"# {k}: {_fmt(v, precision)}\n")
    if meta is not None:
        buf.write("# meta: " + ",".join(f"{k}={_fmt(v, precision)}" for k, v in meta.items()) + "\n")
    return buf.getvalue()


def experiment_row(report: familylab.ExperimentReport) -> dict:
    row = {"kind": report.kind, **report.params}
    row.update(empirical=report.empirical, predicted=report.predicted, ratio=report.ratio)
    row.update({f"verdict[{k}]": v for k, v in report.verdicts.items()})
    row.update(report.metadata)
    row["warnings"] = ";".join(report.warnings)
    return row


def _progress(enabled: bool):
    if not enabled:
        return None

    def report(done, total):
        print(f"progress {done}/{total}", file=sys.stderr, flush=True)

    return report


# ---------------------------------------------------------------- commands


def cmd_ap(args, ctx):
    t = curvecount.ap(args.p, args.a, args.b)
    return [{"p": args.p, "a": args.a, "b": args.b, "a_p": t, "points": args.p + 1 - t}], {}


def cmd_pi_r(args, ctx):
    curve = curvecount.CurveModel(args.a, args.b)
    n = curvecount.pi_r(curve, args.r, args.x, args.cutoff_mode, cache=ctx["cache"])
    return [{"a": args.a, "b": args.b, "r": args.r, "x": args.x, "cutoff_mode": args.cutoff_mode, "count": n}], {}


def cmd_theta(args, ctx):
    curve = curvecount.CurveModel(args.a, args.b)
    win = analytic.SatoTateWindow(args.alpha, args.beta)
    val = curvecount.theta(curve, win, args.x, cache=ctx["cache"])
    pred = args.x * win.measure
    row = {"a": args.a, "b": args.b, "alpha": args.alpha, "beta": args.beta, "x": args.x}
    row.update(theta=val, predicted=pred, ratio=val / pred if pred else math.nan)
    return [row], {}


def _config(args):
    return analytic.ExperimentConfig(args.A, args.B, args.x, args.epsilon, args.C, args.c)


def cmd_lt_average(args, ctx):
    win = familylab.FamilyWindow(args.A, args.B, args.exclude_zero_ab, args.exclude_all_cm)
    rep = familylab.lt_average(
        win,
        args.r,
        args.x,
        cutoff_mode=args.cutoff_mode,
        constant_cutoff=args.constant_cutoff,
        config=_config(args),
        cache=ctx["cache"],
        order=args.order,
        workers=args.workers,
        max_work=args.max_work,
        progress=ctx["progress"],
    )
    return [experiment_row(rep)], {}


def cmd_st_average(args, ctx):
    win = familylab.FamilyWindow(args.A, args.B, True, args.exclude_all_cm)
    st = analytic.SatoTateWindow(args.alpha, args.beta)
    rep = familylab.st_average(
        win,
        st,
        args.x,
        config=_config(args),
        cache=ctx["cache"],
        order=args.order,
        workers=args.workers,
        max_work=args.max_work,
        progress=ctx["progress"],
    )
    return [experiment_row(rep)], {}


def cmd_cm_scan(args, ctx):
    win = familylab.FamilyWindow(args.A, args.B)
    hits = familylab.cm_scan(win)
    rows = [{"A": args.A, "B": args.B, "a": c.a, "b": c.b, "j": c.j_invariant} for c in hits]
    return rows, {"cm_count": len(hits)}


def cmd_cm_contribution(args, ctx):
    rep = familylab.cm_family_report(args.A, args.B, args.x, cache=ctx["cache"])
    return [experiment_row(rep)], {}


def cmd_deuring_check(args, ctx):
    if args.pmax > args.max_enum_p:
        raise ResourceCapError(f"pmax={args.pmax} exceeds enumeration cap {args.max_enum_p}")
    rows = familylab.deuring_check(args.pmax, args.pmin)
    out = [
        {"p": d.p, "r": d.r, "count": d.count, "H": d.H, "predicted": d.predicted, "exact": d.exact}
        for d in rows
    ]
    ok = all(d.exact for d in rows)
    ctx["identity_ok"] = ok
    return out, {"all exact": ok}


def cmd_iso_classes(args, ctx):
    s = curvecount.iso_classes(args.p, args.r, cap=args.max_enum_p)
    rows = [
        {"p": args.p, "r": args.r, "u": u, "v": v, "orbit_size": n, "restricted": bool(u and v)}
        for (u, v), n in zip(s.representatives, s.orbit_sizes)
    ]
    summary = {"classes": len(s.representatives), "I_rp": s.restricted_count}
    if args.r * args.r < 4 * args.p:
        summary["H"] = classnum.kronecker_H(args.r, args.p)
    return rows, summary


def cmd_class_number(args, ctx):
    forms = classnum.reduced_forms(args.d)
    cn = classnum.class_number(args.d)
    return [{"d": args.d, "h": cn.h, "w": cn.w, "forms": [f"({f.A},{f.B},{f.C})" for f in forms]}], {}


def cmd_hurwitz(args, ctx):
    H = classnum.kronecker_H(args.r, args.p)
    row = {"r": args.r, "p": args.p, "D": args.r**2 - 4 * args.p, "H": H, "H_float": float(H)}
    if args.analytic:
        row["H_analytic"] = classnum.analytic_H(4 * args.p - args.r**2, args.terms)
    return [row], {}


def cmd_hp_sum(args, ctx):
    win = analytic.SatoTateWindow(args.alpha, args.beta)
    Hp = classnum.hp_sum(args.p, win)
    return [{"p": args.p, "alpha": args.alpha, "beta": args.beta, "H_p": Hp, "H_p_float": float(Hp)}], {}


def cmd_constants(args, ctx):
    c = analytic.lang_trotter_constant(args.r, args.cutoff)
    row = {"r": args.r, "cutoff": args.cutoff, "value": c.value, "tail_bound": c.tail_bound}
    row["closed_form"] = c.closed_form if c.closed_form is not None else ""
    return [row], {}


def cmd_pi_half(args, ctx):
    return [{"x": args.x, "pi_half": analytic.pi_half(args.x)}], {}


def cmd_st_measure(args, ctx):
    return [{"alpha": args.alpha, "beta": args.beta, "F": analytic.sato_tate_measure(args.alpha, args.beta)}], {}


def cmd_charsum(args, ctx):
    s = charsum.char_sum_interval(args.p, args.j, args.M)
    return [{"p": args.p, "j": args.j, "M": args.M, "re": s.real, "im": s.imag, "abs": abs(s)}], {}


def cmd_charsum_scan(args, ctx):
    cfg = charsum.ScanConfig(args.x, args.M, args.eta)
    rep = charsum.exceptional_primes(cfg, progress=ctx["progress"])
    rows = []
    if args.per_prime:
        rows = [
            {
                "p": p,
                "M": args.M,
                "max_abs_sum": m,
                "threshold": rep.threshold,
                "cap": charsum.polya_vinogradov_cap(p, args.M),
                "exceptional": m > rep.threshold,
            }
            for p, m in zip(rep.primes, rep.max_sums)
        ]
    summary = {
        "x": args.x,
        "M": args.M,
        "eta": args.eta,
        "threshold": rep.threshold,
        "scanned": rep.scanned,
        "exceptional_count": rep.count,
        "fraction": rep.fraction,
        "reference_x^(3/4+4eta)": rep.reference,
        "count/reference": rep.ratio,
        "exceptional_primes": rep.exceptional,
    }
    return rows, summary


def cmd_decompose_check(args, ctx):
    rows, ok = [], True
    for p in args.p:
        for r in args.r:
            for A in args.A:
                for B in args.B:
                    if p > args.max_enum_p:
                        raise ResourceCapError(f"p={p} exceeds enumeration cap {args.max_enum_p}")
                    d = familylab.decompose_count(p, r, A, B, exact=args.exact)
                    ok &= d.matches
                    rows.append(
                        {
                            "p": p,
                            "r": r,
                            "A": A,
                            "B": B,
                            "classes": d.classes,
                            "M": d.M_p,
                            "E1": d.E1_p,
                            "E2": d.E2_p,
                            "total": d.total,
                            "brute_count": d.brute_count,
                            "match": d.matches,
                        }
                    )
    ctx["identity_ok"] = ok
    return rows, {"all match": ok}


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("output and resources")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--out", help="write output here instead of stdout")
    g.add_argument("--precision", type=int, default=12, help="significant digits for floats")
    g.add_argument("--no-meta", action="store_true", help="omit the wall-time/cache metadata record")
    g.add_argument("--quiet", action="store_true", help="no progress lines on stderr")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--max-enum-p", type=int, default=curvecount.ENUMERATION_CAP)
    g.add_argument("--cache-bytes", type=int, default=64 << 20)
    g.add_argument("--max-work", type=int, default=10**8, help="cap on curves x primes per sweep")

    parser = _Parser(prog="frobavg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_, columns):
        sp = sub.add_parser(name, parents=[common], help=help_, description=f"{help_}  CSV columns: {columns}")
        sp.set_defaults(func=func)
        return sp

    sp = add("ap", cmd_ap, "trace of Frobenius a_p(E(a,b))", "p,a,b,a_p,points")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)

    sp = add("pi-r", cmd_pi_r, "count primes p <= x with a_p = r", "a,b,r,x,cutoff_mode,count")
    for f in ("--a", "--b", "--r"):
        sp.add_argument(f, type=int, required=True)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--cutoff-mode", choices=("all_good", "paper_Br"), default="all_good")

    sp = add("theta", cmd_theta, "log-weighted count of normalized traces in [alpha, beta]",
             "a,b,alpha,beta,x,theta,predicted,ratio")
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--x", type=float, required=True)

    def family_args(sp):
        sp.add_argument("--A", type=int, required=True)
        sp.add_argument("--B", type=int, required=True)
        sp.add_argument("--x", type=float, required=True)
        sp.add_argument("--exclude-all-cm", action="store_true")
        sp.add_argument("--epsilon", type=float, default=0.01)
        sp.add_argument("--C", type=float, default=2.0)
        sp.add_argument("--c", type=float, default=1.0)
        sp.add_argument("--order", choices=("prime", "curve"), default="prime")

    sp = add("lt-average", cmd_lt_average, "family average of pi^r against C_r pi_1/2(x)",
             "kind,A,B,r,x,...,empirical,predicted,ratio,verdict[...],count,curves,...")
    family_args(sp)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--exclude-zero-ab", action="store_true")
    sp.add_argument("--cutoff-mode", choices=("all_good", "paper_Br"), default="all_good")
    sp.add_argument("--constant-cutoff", type=int, default=analytic.DEFAULT_CUTOFF)

    sp = add("st-average", cmd_st_average, "family average of Theta against x F(alpha, beta)",
             "kind,A,B,alpha,beta,x,...,empirical,predicted,ratio,verdict[...],F,...")
    family_args(sp)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)

    sp = add("cm-scan", cmd_cm_scan, "list CM curves in the box", "A,B,a,b,j")
    sp.add_argument("--A", type=int, required=True)
    sp.add_argument("--B", type=int, required=True)

    sp = add("cm-contribution", cmd_cm_contribution, "average of pi^0 over the axis CM families",
             "kind,A,B,x,empirical,predicted,ratio,verdict[...],deuring_scale,pi_x")
    sp.add_argument("--A", type=int, required=True)
    sp.add_argument("--B", type=int, required=True)
    sp.add_argument("--x", type=float, required=True)

    sp = add("deuring-check", cmd_deuring_check, "trace histogram vs (p-1)/2 H(4p - r^2)",
             "p,r,count,H,predicted,exact")
    sp.add_argument("--pmax", type=int, required=True)
    sp.add_argument("--pmin", type=int, default=5)

    sp = add("iso-classes", cmd_iso_classes, "F_p-isomorphism classes with trace r",
             "p,r,u,v,orbit_size,restricted")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--r", type=int, required=True)

    sp = add("class-number", cmd_class_number, "reduced forms and h(d)", "d,h,w,forms")
    sp.add_argument("--d", type=int, required=True)

    sp = add("hurwitz", cmd_hurwitz, "Kronecker/Hurwitz class number H(r^2 - 4p)", "r,p,D,H,H_float[,H_analytic]")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--analytic", action="store_true", help="also evaluate the L(1, chi_d) formula")
    sp.add_argument("--terms", type=int, default=10**6)

    sp = add("hp-sum", cmd_hp_sum, "sum of H(r^2 - 4p) over 2 sqrt(p) [alpha, beta]", "p,alpha,beta,H_p,H_p_float")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)

    sp = add("constants", cmd_constants, "Lang-Trotter constant C_r", "r,cutoff,value,tail_bound,closed_form")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--cutoff", type=int, default=analytic.DEFAULT_CUTOFF)

    sp = add("pi-half", cmd_pi_half, "pi_1/2(x)", "x,pi_half")
    sp.add_argument("--x", type=float, required=True)

    sp = add("st-measure", cmd_st_measure, "Sato-Tate measure F(alpha, beta)", "alpha,beta,F")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)

    sp = add("charsum", cmd_charsum, "sum_{|n|<=M} chi_j(n) mod p", "p,j,M,re,im,abs")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--j", type=int, required=True)
    sp.add_argument("--M", type=int, required=True)

    sp = add("charsum-scan", cmd_charsum_scan, "primes with a short character sum above M^(1-eta)",
             "p,M,max_abs_sum,threshold,cap,exceptional (with --per-prime)")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--eta", type=float, default=0.05)
    sp.add_argument("--per-prime", action="store_true")

    sp = add("decompose-check", cmd_decompose_check, "character-sum decomposition vs brute-force count",
             "p,r,A,B,classes,M,E1,E2,total,brute_count,match")
    sp.add_argument("--p", type=int, nargs="+", required=True)
    sp.add_argument("--r", type=int, nargs="+", required=True)
    sp.add_argument("--A", type=int, nargs="+", required=True)
    sp.add_argument("--B", type=int, nargs="+", required=True)
    sp.add_argument("--exact", action="store_true", help="also verify in exact cyclotomic arithmetic (p <= 50)")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE

    cache = curvecount.TraceCache(args.cache_bytes)
    ctx = {"cache": cache, "progress": _progress(not args.quiet), "identity_ok": True}
    start = time.perf_counter()
    try:
        rows, summary = args.func(args, ctx)
    except ResourceCapError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except IdentityError as exc:
        print(f"identity failure: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    except DomainError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    meta = None
    if not args.no_meta:
        meta = {"command": args.command, "wall_time_s": time.perf_counter() - start, **cache.stats()}
    text = render(rows, summary, meta, args.format, args.precision)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ctx["identity_ok"] else EXIT_IDENTITY


def main() -> None:
    sys.exit(run())
