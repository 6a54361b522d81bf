"""Command-line interface: one subcommand per check, plus scenario files."""

from __future__ import annotations

import argparse
import sys

from . import scenario as S
from .errors import (
    DimensionMismatch,
    EpsnetError,
    ExprSyntaxError,
    MollifierError,
    ScenarioError,
    UnknownIdentifier,
)

USAGE_ERRORS = (ExprSyntaxError, UnknownIdentifier, DimensionMismatch, ScenarioError, MollifierError,
                ValueError)


def _net_args(p, with_other=False):
    p.add_argument("--expr", required=True,
                   help="net expression in x (or x1..xd) and eps; 'iota:heaviside' embeds a distribution")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--domain", choices=["whole", "pierced"])
    p.add_argument("--override", action="append", default=[], metavar="K=EXPR",
                   help="replace the representative at grid index K")
    if with_other:
        p.add_argument("--other", required=True, help="second net expression")


def _compact_args(p):
    p.add_argument("--K", nargs=2, type=float, action="append", metavar=("LO", "HI"),
                   help="one box side; repeat once per axis")
    p.add_argument("--annulus", nargs=2, type=float, metavar=("RIN", "ROUT"))
    p.add_argument("--samples", type=int, default=0)


def _testfn_args(p):
    p.add_argument("--testfn", nargs=2, type=float, action="append", metavar=("CENTER", "RADIUS"),
                   help="bump test function; repeatable")


def build_parser():
    ap = argparse.ArgumentParser(prog="epsnet", description="Colombeau generalized function checks")
    ap.add_argument("--out", default="-", help="report file (default: stdout)")
    ap.add_argument("--format", choices=["json", "csv"], default="json")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--grid-kmin", type=int)
    ap.add_argument("--grid-kmax", type=int)
    ap.add_argument("--moments", type=int, help="mollifier moment order M")
    ap.add_argument("--seed", type=int, help="jitter seed for sampling lattices")
    ap.add_argument("--timings", action="store_true", help="record wall time per check")
    ap.add_argument("--expect", choices=["pass", "fail"], default="pass",
                    help="expected outcome of a single check")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="moderateness of a net")
    _net_args(p)
    _compact_args(p)
    p.add_argument("--max-order", type=int, default=0)

    p = sub.add_parser("equal", help="is u - v negligible")
    _net_args(p, with_other=True)
    _compact_args(p)
    p.add_argument("--m", type=float)

    p = sub.add_parser("eval-point", help="value at a generalized point")
    _net_args(p)
    p.add_argument("--point", nargs="+", required=True, help="coordinates, each an expression in eps")
    p.add_argument("--m", type=float, help="test the value for negligibility")

    p = sub.add_parser("order", help="eps-order of sup_K |d^beta u|")
    _net_args(p)
    _compact_args(p)
    p.add_argument("--deriv", nargs="+", type=int)
    p.add_argument("--m", type=float)

    p = sub.add_parser("embed", help="embed a catalog distribution")
    p.add_argument("distribution", help="delta(j), heaviside, xplus(n), polynomial(c0,...), a*b")
    _compact_args(p)

    p = sub.add_parser("integrate", help="integral of a net between generalized bounds")
    _net_args(p)
    p.add_argument("--a", default="0")
    p.add_argument("--b", default="1")
    p.add_argument("--m", type=float)

    p = sub.add_parser("pair", help="pairing sequence <u_eps, phi>")
    _net_args(p)
    _testfn_args(p)

    p = sub.add_parser("associate", help="association of a net with a distribution")
    _net_args(p)
    _testfn_args(p)
    p.add_argument("--to-zero", action="store_true")

    hp = sub.add_parser("homog", help="homogeneity checks")
    hsub = hp.add_subparsers(dest="mode", required=True)
    for mode in ("strong", "weak", "assoc"):
        p = hsub.add_parser(mode)
        _net_args(p)
        _compact_args(p)
        _testfn_args(p)
        p.add_argument("--alpha", type=float, default=0.0)
        p.add_argument("--scales", nargs="+", type=float)
        p.add_argument("--m", type=float)

    ep = sub.add_parser("euler", help="Euler identity checks")
    esub = ep.add_subparsers(dest="mode", required=True)
    for mode in ("strong", "assoc"):
        p = esub.add_parser(mode)
        _net_args(p)
        _compact_args(p)
        _testfn_args(p)
        p.add_argument("--alpha", type=float, default=0.0)
        p.add_argument("--m", type=float)

    ip = sub.add_parser("invariance", help="scaling or translation invariance")
    isub = ip.add_subparsers(dest="mode", required=True)
    for mode in ("scale", "translate"):
        p = isub.add_parser(mode)
        _net_args(p)
        _compact_args(p)
        p.add_argument("--m", type=float)
        if mode == "scale":
            p.add_argument("--scales", nargs="+", type=float)
        else:
            p.add_argument("--shifts", nargs="+", type=float)

    p = sub.add_parser("radial", help="radial factorization on annuli")
    _net_args(p)
    _compact_args(p)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--m", type=float)

    p = sub.add_parser("extend", help="homogeneous extension across the origin")
    _net_args(p)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--N", type=float, default=0)
    p.add_argument("--max-order", type=int, default=0)

    p = sub.add_parser("tempered", help="tempered representative and its bounds")
    _net_args(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--N", type=float, default=0)
    p.add_argument("--max-order", type=int, default=2)

    p = sub.add_parser("coeffs", help="coefficients of a homogeneous polynomial")
    _net_args(p)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--m", type=float)

    p = sub.add_parser("zerodiv", help="zero-divisor search with witness")
    _net_args(p)
    _compact_args(p)
    p.add_argument("--rho", type=float)
    p.add_argument("--budget", type=int)

    p = sub.add_parser("mollifier-info", help="mollifier coefficients and moments")

    p = sub.add_parser("scenario", help="run a JSON scenario file")
    p.add_argument("path", nargs="?", help="scenario file")
    p.add_argument("--suite", choices=["counterexamples"], help="run a shipped scenario")
    return ap


def _net_spec(a, key="expr"):
    text = getattr(a, key)
    if text.startswith("iota:"):
        return text
    spec = {"expr": text, "dim": a.dim}
    if a.domain:
        spec["domain"] = a.domain
    if a.override:
        ov = {}
        for item in a.override:
            k, sep, e = item.partition("=")
            if not sep or not k.strip().isdigit():
                raise ScenarioError(f"override must look like K=EXPR, got {item!r}", "/override")
            ov[k.strip()] = e
        spec["overrides"] = ov
    return spec


def _compact_specs(a):
    out = []
    if getattr(a, "K", None):
        out.append({"box": [list(b) for b in a.K]})
    if getattr(a, "annulus", None):
        out.append({"annulus": list(a.annulus), "dim": getattr(a, "dim", 1)})
    for c in out:
        if a.samples:
            c["samples"] = a.samples
    return out


def _check_from_args(a):
    name = a.command if a.command not in ("homog", "euler", "invariance") else f"{a.command}-{a.mode}"
    c = {"id": name, "check": name}
    if hasattr(a, "expr"):
        c["net"] = _net_spec(a)
    if getattr(a, "other", None):
        c["other"] = _net_spec(a, "other")
    comps = _compact_specs(a) if hasattr(a, "samples") else []
    if comps:
        c["compacts"] = comps
    if getattr(a, "testfn", None):
        c["testfns"] = [{"center": [ctr], "radius": r} for ctr, r in a.testfn]
    for key in ("alpha", "m", "N", "degree", "rho", "budget", "max_order", "scales", "shifts", "deriv"):
        v = getattr(a, key, None)
        if v is not None:
            c[key] = v
    if name == "eval-point":
        c["point"] = a.point
    if name == "integrate":
        c["a"], c["b"] = a.a, a.b
    if name == "associate":
        c["to_zero"] = a.to_zero
    if name == "embed":
        c["distribution"] = a.distribution
    if name == "mollifier-info" and a.moments is not None:
        c["M"] = a.moments
    c["expect"] = a.expect
    return {"checks": [c]}


def run(argv=None):
    ap = build_parser()
    a = ap.parse_args(argv)
    grid = {"k_min": a.grid_kmin, "k_max": a.grid_kmax}
    if a.jobs < 1:
        ap.error("--jobs must be positive")
    try:
        if a.command == "scenario":
            if a.suite:
                data = S.shipped_suite()
            elif a.path:
                data = S.load_scenario(a.path)
            else:
                ap.error("scenario needs a PATH or --suite")
        else:
            data = _check_from_args(a)
        report = S.run_scenario(data, a.jobs, grid, a.moments, a.seed, a.timings)
    except USAGE_ERRORS as exc:
        print(f"epsnet: error: {exc}", file=sys.stderr)
        return 2
    except (EpsnetError, ArithmeticError) as exc:
        print(f"epsnet: runtime error: {exc}", file=sys.stderr)
        return 3
    text = S.emit_report(report, a.out, a.format)
    if a.out == "-":
        sys.stdout.write(text)
    return report["summary"]["exit_status"]


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
