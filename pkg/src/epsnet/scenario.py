"""Scenario files, the check registry, and report assembly."""

from __future__ import annotations

import csv
import io
import json
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from importlib.metadata import PackageNotFoundError, version

import jsonschema
import numpy as np

from . import algebra as A
from . import analysis as AN
from . import embedding as EM
from . import homogeneity as HG
from . import zerodiv as ZD
from .asymptotics import (
    CompactSet,
    DecaySamples,
    DecayVerdict,
    EpsGrid,
    _jsonable,
    default_compacts,
    fit_order,
    sample_sup,
    verdict_moderate,
    verdict_negligible,
)
from .defaults import DEFAULTS, HOMOG_M, PAIRING_K_MAX
from .errors import ExprSyntaxError, PreconditionViolated, ScenarioError

CHECKS = (
    "classify", "equal", "eval-point", "order", "embed", "integrate", "pair", "associate",
    "homog-strong", "homog-weak", "homog-assoc", "euler-strong", "euler-assoc",
    "invariance-scale", "invariance-translate", "radial", "extend", "tempered", "coeffs",
    "zerodiv", "mollifier-info",
)

PAIRING_CHECKS = {"pair", "associate", "homog-weak", "homog-assoc", "euler-assoc"}
TOLERANCES = {k: DEFAULTS[k] for k in ("slope_tol", "abs_floor", "m_max", "N_max", "assoc_tol",
                                       "assoc_rate", "quad_tol")}

_NET_SPEC = {
    "oneOf": [
        {"type": "string"},
        {
            "type": "object",
            "properties": {
                "expr": {"type": "string"},
                "dim": {"type": "integer", "minimum": 1, "maximum": 9},
                "domain": {"enum": ["whole", "pierced"]},
                "overrides": {"type": "object",
                              "patternProperties": {"^[0-9]+$": {"type": "string"}},
                              "additionalProperties": False},
                "embed": {"type": "object"},
            },
            "additionalProperties": False,
        },
    ]
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "nets": {"type": "object", "additionalProperties": _NET_SPEC},
        "mollifier": {"type": "object", "properties": {"M": {"type": "integer", "minimum": 0}},
                      "additionalProperties": False},
        "grid": {
            "type": "object",
            "properties": {"base": {"type": "number", "exclusiveMinimum": 1},
                           "k_min": {"type": "integer", "minimum": 0},
                           "k_max": {"type": "integer", "minimum": 1},
                           "pairing_k_max": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
        "compacts": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "box": {"type": "array", "items": {"type": "array", "items": {"type": "number"},
                                                       "minItems": 2, "maxItems": 2}},
                    "annulus": {"type": "array", "items": {"type": "number"}, "minItems": 2,
                                "maxItems": 2},
                    "dim": {"type": "integer", "minimum": 1},
                    "samples": {"type": "integer", "minimum": 3},
                },
                "additionalProperties": False,
            },
        },
        "testfns": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {"center": {"type": "array", "items": {"type": "number"}},
                               "radius": {"type": "number", "exclusiveMinimum": 0},
                               "modulation": {"type": "array", "items": {"type": "number"}}},
                "required": ["center", "radius"],
                "additionalProperties": False,
            },
        },
        "checks": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string"},
                    "check": {"enum": list(CHECKS)},
                    "expect": {"enum": ["pass", "fail"]},
                },
                "required": ["check"],
            },
        },
    },
    "required": ["checks"],
    "additionalProperties": False,
}

_VERDICT = {
    "type": "object",
    "properties": {"outcome": {"type": "string"}, "passed": {"type": "boolean"}},
    "required": ["outcome", "passed"],
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema": {"const": "epsnet-report/1"},
        "provenance": {
            "type": "object",
            "properties": {
                "defaults": {"type": "object"},
                "grid": {"type": "object"},
                "pairing_grid": {"type": "object"},
                "mollifier": {"type": "object"},
                "version": {"type": "string"},
            },
            "required": ["defaults", "grid", "pairing_grid", "mollifier", "version"],
        },
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string"},
                    "check": {"enum": list(CHECKS)},
                    "inputs": {"type": "object"},
                    "verdict": _VERDICT,
                    "passed": {"type": "boolean"},
                    "expect": {"enum": ["pass", "fail"]},
                    "ok": {"type": "boolean"},
                    "samples": {"type": "array"},
                    "wall_time": {"type": "number"},
                },
                "required": ["id", "check", "inputs", "verdict", "passed", "expect", "ok"],
            },
        },
        "summary": {
            "type": "object",
            "properties": {"total": {"type": "integer"}, "ok": {"type": "integer"},
                           "unexpected": {"type": "array", "items": {"type": "string"}},
                           "exit_status": {"enum": [0, 1]}},
            "required": ["total", "ok", "unexpected", "exit_status"],
        },
    },
    "required": ["schema", "provenance", "records", "summary"],
}


def _pointer(path):
    return "/" + "/".join(str(p) for p in path)


def validate_scenario(data):
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ScenarioError(e.message, _pointer(e.absolute_path))


def validate_report(report):
    jsonschema.validate(report, REPORT_SCHEMA)


def package_version():
    try:
        return version("epsnet")
    except PackageNotFoundError:
        return "0+unknown"


@dataclass
class Outcome:
    """Verdict wrapper for checks that combine several sub-verdicts or carry no decay fit."""

    outcome: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"outcome": self.outcome, "passed": self.passed, "detail": _jsonable(self.detail)}

    def __str__(self):
        return self.outcome


class Context:
    def __init__(self, data=None, jobs=1, grid=None, moments=None, seed=None):
        data = data or {}
        g = dict(DEFAULTS["grid"])
        g.update({k: v for k, v in data.get("grid", {}).items() if k != "pairing_k_max"})
        if grid:
            g.update({k: v for k, v in grid.items() if v is not None})
        self.grid = EpsGrid(float(g["base"]), int(g["k_min"]), int(g["k_max"]))
        pk = data.get("grid", {}).get("pairing_k_max", PAIRING_K_MAX)
        self.pairing_grid = self.grid.truncate(max(pk, self.grid.k_min + 7))
        M = moments if moments is not None else data.get("mollifier", {}).get("M", DEFAULTS["moments"])
        self.mollifier = EM.build_mollifier(int(M))
        self.jobs = jobs
        self.seed = seed
        self.nets = {}
        self.compacts = {}
        self.testfns = {}
        for name, spec in data.get("compacts", {}).items():
            self.compacts[name] = self.compact(spec, f"/compacts/{name}")
        for name, spec in data.get("testfns", {}).items():
            self.testfns[name] = AN.TestFunction(tuple(spec["center"]), float(spec["radius"]),
                                                 tuple(spec.get("modulation", (1.0,))))
        for name, spec in data.get("nets", {}).items():
            self.nets[name] = self.net(spec, f"/nets/{name}")

    def provenance(self):
        return {"defaults": DEFAULTS, "grid": self.grid.to_dict(),
                "pairing_grid": self.pairing_grid.to_dict(), "mollifier": self.mollifier.describe(),
                "version": package_version(), "seed": self.seed,
                "representative": "verdicts are computed on the stored representative",
                "advisory": []}

    def compact(self, spec, where):
        if isinstance(spec, str):
            if spec not in self.compacts:
                raise ScenarioError(f"unknown compact set {spec!r}", where)
            return self.compacts[spec]
        samples = spec.get("samples", 0)
        if "box" in spec:
            return CompactSet.box(spec["box"], samples, jitter_seed=self.seed)
        if "annulus" in spec:
            r_in, r_out = spec["annulus"]
            return CompactSet.annulus(r_in, r_out, spec.get("dim", 1), samples)
        raise ScenarioError("compact set needs 'box' or 'annulus'", where)

    def net(self, spec, where):
        try:
            return self._net(spec, where)
        except ExprSyntaxError as exc:
            raise ScenarioError(str(exc), where) from exc

    def _net(self, spec, where):
        if isinstance(spec, str):
            if spec in self.nets:
                return self.nets[spec]
            if spec.startswith("iota:"):
                return EM.embed(parse_distribution(spec[5:], where), self.mollifier)
            return A.Net.from_text(spec, 1, mollifier=self.mollifier)
        if "embed" in spec:
            return EM.embed(distribution_from_dict(spec["embed"], where), self.mollifier)
        if "expr" not in spec:
            raise ScenarioError("net needs 'expr' or 'embed'", where)
        return A.Net.from_text(spec["expr"], spec.get("dim", 1), spec.get("overrides"),
                               mollifier=self.mollifier, domain=spec.get("domain", ""))

    def testfn(self, spec, where):
        if isinstance(spec, str):
            if spec not in self.testfns:
                raise ScenarioError(f"unknown test function {spec!r}", where)
            return self.testfns[spec]
        return AN.TestFunction(tuple(spec["center"]), float(spec["radius"]),
                               tuple(spec.get("modulation", (1.0,))))


_DIST = re.compile(r"^\s*(delta|heaviside|xplus|polynomial)\s*(?:\(([^)]*)\))?\s*$")


def parse_distribution(text, where=""):
    """'delta(1)', 'heaviside', 'xplus(2)', 'polynomial(1, 0, 3)' or a '*'-separated tensor."""
    parts = [p for p in text.split("*")]
    specs = []
    for p in parts:
        m = _DIST.match(p)
        if not m:
            raise ScenarioError(f"unknown distribution {p!r}", where)
        kind, arg = m.group(1), m.group(2)
        if kind == "heaviside":
            specs.append(EM.heaviside())
        elif kind == "polynomial":
            specs.append(EM.polynomial([float(v) for v in arg.split(",")]))
        else:
            n = int(arg) if arg else 0
            specs.append(EM.delta(n) if kind == "delta" else EM.xplus(n))
    return specs[0] if len(specs) == 1 else EM.tensor(*specs)


def distribution_from_dict(d, where=""):
    kind = d.get("kind")
    try:
        if kind == "delta":
            return EM.delta(int(d.get("order", 0)))
        if kind == "heaviside":
            return EM.heaviside()
        if kind == "xplus":
            return EM.xplus(int(d.get("power", d.get("order", 1))))
        if kind == "polynomial":
            return EM.polynomial(d["coeffs"])
        if kind == "tensor":
            return EM.tensor(*[distribution_from_dict(f, where) for f in d["factors"]])
    except (KeyError, ValueError) as exc:
        raise ScenarioError(str(exc), where) from exc
    raise ScenarioError(f"unsupported distribution kind {kind!r}", where)


# check implementations: each returns (verdict, inputs echo, samples or None)


def _compacts(ctx, c, net, where, key="compacts"):
    specs = c.get(key)
    if not specs:
        return default_compacts(net.dim, net.domain == "pierced")
    return [ctx.compact(s, f"{where}/{key}/{i}") for i, s in enumerate(specs)]


def _testfns(ctx, c, where, away=False):
    specs = c.get("testfns")
    if not specs:
        return AN.default_testfns(away)
    return [ctx.testfn(s, f"{where}/testfns/{i}") for i, s in enumerate(specs)]


def _query(ctx, c, net, where):
    return HG.HomogeneityQuery(
        float(c.get("alpha", 0.0)), tuple(c.get("scales", DEFAULTS["scales"])),
        _compacts(ctx, c, net, where), float(c.get("m", HOMOG_M)), None,
        ctx.grid, ctx.pairing_grid, ctx.jobs)


def _samples_rows(s):
    return [{"k": int(k), "eps": float(e), "value": float(v)} for k, e, v in zip(s.ks, s.eps, s.values)]


def _net_of(ctx, c, where, key="net"):
    if key not in c:
        raise ScenarioError(f"check needs '{key}'", where)
    return ctx.net(c[key], f"{where}/{key}")


def check_classify(ctx, c, where):
    net = _net_of(ctx, c, where)
    v = A.moderateness(net, _compacts(ctx, c, net, where), ctx.grid, int(c.get("max_order", 0)), ctx.jobs)
    K = _compacts(ctx, c, net, where)[0]
    s = sample_sup(net, K, None, ctx.grid, ctx.jobs)
    return v, {"net": net.describe()}, _samples_rows(s)


def check_equal(ctx, c, where):
    u = _net_of(ctx, c, where)
    w = _net_of(ctx, c, where, "other")
    v = A.equals(u, w, _compacts(ctx, c, u, where), float(c.get("m", HOMOG_M)), ctx.grid, ctx.jobs)
    return v, {"net": u.describe(), "other": w.describe()}, None


def check_eval_point(ctx, c, where):
    net = _net_of(ctx, c, where)
    comps = c.get("point")
    if comps is None:
        raise ScenarioError("eval-point needs 'point'", where)
    if not isinstance(comps, list):
        comps = [comps]
    p = A.GenPoint(tuple(A.GenNumber.of(x if isinstance(x, str) else float(x)) for x in comps))
    val = A.eval_point(net, p, ctx.grid)
    s = val.samples(ctx.grid)
    if "m" in c:
        v = verdict_negligible(s, float(c["m"]))
    elif not np.any(s.values):
        v = DecayVerdict("ExactZero", detail={"all_values_zero": True})
    else:
        v = verdict_moderate(s)
    rows = [{"k": int(k), "eps": float(e), "value": float(x)}
            for k, e, x in zip(ctx.grid.ks, ctx.grid.eps, val.on(ctx.grid))]
    return v, {"net": net.describe(), "point": [str(x) for x in comps]}, rows


def check_order(ctx, c, where):
    net = _net_of(ctx, c, where)
    K = _compacts(ctx, c, net, where)[0]
    deriv = tuple(c.get("deriv", [0] * net.dim))
    s = sample_sup(net, K, deriv, ctx.grid, ctx.jobs)
    fit = fit_order(s)
    v = verdict_negligible(s, float(c["m"])) if "m" in c else verdict_moderate(s)
    v.detail.update({"fit_slope": fit.slope, "fit_intercept": fit.intercept,
                     "fit_residual": fit.residual})
    return v, {"net": net.describe(), "K": K.describe(), "deriv": list(deriv)}, _samples_rows(s)


def check_embed(ctx, c, where):
    dist = c.get("distribution")
    if dist is None:
        raise ScenarioError("embed needs 'distribution'", where)
    w = parse_distribution(dist, where) if isinstance(dist, str) else distribution_from_dict(dist, where)
    net = EM.embed(w, ctx.mollifier)
    v = A.moderateness(net, _compacts(ctx, c, net, where), ctx.grid, 0, ctx.jobs)
    return v, {"distribution": w.describe(), "net": net.describe()}, None


def _gen(v):
    if isinstance(v, dict):
        return A.GenNumber.of(v.get("expr", "0"), v.get("overrides"))
    return A.GenNumber.of(v if isinstance(v, str) else float(v))


def check_integrate(ctx, c, where):
    f = _net_of(ctx, c, where)
    a, b = _gen(c.get("a", 0.0)), _gen(c.get("b", 1.0))
    inputs = {"net": f.describe(), "a": str(c.get("a", 0.0)), "b": str(c.get("b", 1.0))}
    try:
        val = AN.integrate_abs(f, a, b, ctx.grid, ctx.jobs)
    except PreconditionViolated as exc:
        return Outcome("PreconditionViolated", False, {"message": str(exc), **exc.diagnostics}), inputs, None
    s = val.samples(ctx.grid)
    if "m" in c:
        v = verdict_negligible(s, float(c["m"]))
    elif not np.any(s.values):
        v = DecayVerdict("ExactZero")
    else:
        v = verdict_moderate(s)
    return v, inputs, _samples_rows(s)


def check_pair(ctx, c, where):
    net = _net_of(ctx, c, where)
    phi = _testfns(ctx, c, where)[0]
    seq = AN.pair(net, phi, ctx.pairing_grid, ctx.jobs)
    cell = AN.convergence(seq, ctx.pairing_grid)
    v = Outcome("Resolved" if not seq.flagged else "QuadratureFlagged", not seq.flagged, cell)
    rows = [{"k": k, "eps": e, "value": x, "err_estimate": r} for k, e, x, r in seq.rows()]
    return v, {"net": net.describe(), "phi": phi.describe()}, rows


def check_associate(ctx, c, where):
    net = _net_of(ctx, c, where)
    v = AN.associate(net, _testfns(ctx, c, where), ctx.pairing_grid, bool(c.get("to_zero", False)),
                     jobs=ctx.jobs)
    return v, {"net": net.describe(), "to_zero": bool(c.get("to_zero", False))}, None


def check_homog(mode):
    def run(ctx, c, where):
        net = _net_of(ctx, c, where)
        q = _query(ctx, c, net, where)
        inputs = {"net": net.describe(), **q.describe()}
        if mode == "strong":
            v = HG.strong_homogeneity(net, q)
            if net.domain == "whole" and not net.guarded:
                v.detail["degree_gate"] = HG.degree_gate(q.alpha)
        elif mode == "weak":
            q.testfns = _testfns(ctx, c, where, away=True)
            v = HG.weak_homogeneity(net, q)
        else:
            q.testfns = _testfns(ctx, c, where)
            v = HG.associative_homogeneity(net, q)
        return v, inputs, None
    return run


def check_euler(mode):
    def run(ctx, c, where):
        net = _net_of(ctx, c, where)
        alpha = float(c.get("alpha", 0.0))
        if mode == "strong":
            v = HG.euler_strong(net, alpha, _compacts(ctx, c, net, where), float(c.get("m", HOMOG_M)),
                                ctx.grid, ctx.jobs)
        else:
            v = HG.euler_associated(net, alpha, _testfns(ctx, c, where), ctx.pairing_grid, ctx.jobs)
        return v, {"net": net.describe(), "alpha": alpha}, None
    return run


def check_invariance(mode):
    def run(ctx, c, where):
        net = _net_of(ctx, c, where)
        q = _query(ctx, c, net, where)
        if mode == "scale":
            v = HG.scaling_invariance(net, q)
            inputs = {"net": net.describe(), "scales": list(q.scales), "m": q.m}
        else:
            shifts = tuple(float(h) for h in c.get("shifts", (1.0, -0.5)))
            v = HG.translation_invariance(net, shifts, q)
            inputs = {"net": net.describe(), "shifts": list(shifts), "m": q.m}
        if v.passed and v.detail.get("constancy_passed") is False:
            v = Outcome("ConstancyFails", False, v.to_dict())
        return v, inputs, None
    return run


def check_radial(ctx, c, where):
    net = _net_of(ctx, c, where)
    alpha = float(c.get("alpha", 0.0))
    annuli = c.get("compacts")
    annuli = [ctx.compact(s, f"{where}/compacts/{i}") for i, s in enumerate(annuli)] if annuli else None
    v = HG.radial_factorization_check(net, alpha, annuli, float(c.get("m", HOMOG_M)), ctx.grid, ctx.jobs)
    return v, {"net": net.describe(), "alpha": alpha}, None


def check_extend(ctx, c, where):
    net = _net_of(ctx, c, where)
    if net.domain != "pierced":
        net = net.replace(domain="pierced")
    alpha = float(c.get("alpha", 0.0))
    N = float(c.get("N", 0))
    ext = HG.homogeneous_extension(net, alpha)
    Ks = _compacts(ctx, c, ext, where) if c.get("compacts") else None
    mod = HG.extension_moderateness(ext, N, alpha, Ks, ctx.grid, int(c.get("max_order", 0)), ctx.jobs)
    ann = c.get("annulus", [1.0, 2.0])
    restr = HG.extension_restriction(ext, net, alpha, CompactSet.annulus(ann[0], ann[1], net.dim),
                                     ctx.grid, float(c.get("m", HOMOG_M)), ctx.jobs)
    ok = mod.passed and restr.passed
    v = Outcome(mod.outcome if ok else "Fails", ok,
                {"moderateness": mod.to_dict(), "restriction": restr.to_dict(),
                 "extension": ext.text()})
    return v, {"net": net.describe(), "alpha": alpha, "N": N}, None


def check_tempered(ctx, c, where):
    net = _net_of(ctx, c, where)
    N = float(c.get("N", 0))
    inputs = {"net": net.describe(), "N": N}
    if "alpha" in c:
        net = HG.tempered_representative(net, float(c["alpha"]))
        inputs["alpha"] = float(c["alpha"])
    radii = tuple(float(r) for r in c.get("radii", (1.0, 10.0, 100.0)))
    v = HG.tempered_check(net, N, radii, int(c.get("max_order", 2)), ctx.grid, ctx.jobs)
    return v, inputs, None


def check_coeffs(ctx, c, where):
    net = _net_of(ctx, c, where)
    k = int(c.get("degree", 0))
    res = HG.polynomial_coefficients(net, k, None, float(c.get("m", HOMOG_M)), ctx.grid, ctx.jobs)
    v = res.residual
    v.detail["coefficients"] = res.to_dict(ctx.grid)
    return v, {"net": net.describe(), "degree": k}, None


def check_zerodiv(ctx, c, where):
    net = _net_of(ctx, c, where)
    K = _compacts(ctx, c, net, where)[0]
    rho = c.get("rho")
    v = ZD.zero_divisor_verdict(net, K, None if rho is None else float(rho),
                                int(c.get("budget", DEFAULTS["zerodiv_budget"])), ctx.grid, ctx.jobs)
    inputs = {"net": net.describe(), "K": K.describe(), "rho": rho}
    return v, inputs, None


def check_mollifier_info(ctx, c, where):
    M = int(c.get("M", ctx.mollifier.M))
    mol = EM.build_mollifier(M)
    moments = mol.check_moments()
    ok = abs(moments[0] - 1) <= 1e-10 and all(abs(x) <= 1e-9 for x in moments[1:])
    detail = {**mol.describe(), "moments": moments, "rho0_at_0": float(mol.derivative(0, 0.0))}
    cache = EM.cache_path(mol)
    if cache is not None:
        detail["cache"] = str(cache)
    return Outcome("Verified" if ok else "Fails", ok, detail), {"M": M}, None


REGISTRY = {
    "classify": check_classify,
    "equal": check_equal,
    "eval-point": check_eval_point,
    "order": check_order,
    "embed": check_embed,
    "integrate": check_integrate,
    "pair": check_pair,
    "associate": check_associate,
    "homog-strong": check_homog("strong"),
    "homog-weak": check_homog("weak"),
    "homog-assoc": check_homog("assoc"),
    "euler-strong": check_euler("strong"),
    "euler-assoc": check_euler("assoc"),
    "invariance-scale": check_invariance("scale"),
    "invariance-translate": check_invariance("translate"),
    "radial": check_radial,
    "extend": check_extend,
    "tempered": check_tempered,
    "coeffs": check_coeffs,
    "zerodiv": check_zerodiv,
    "mollifier-info": check_mollifier_info,
}


def run_check(ctx, c, index, timings=False):
    where = f"/checks/{index}"
    t0 = time.perf_counter()
    verdict, inputs, samples = REGISTRY[c["check"]](ctx, c, where)
    expect = c.get("expect", "pass")
    passed = bool(verdict.passed)
    vd = verdict.to_dict()
    vd["grid"] = (ctx.pairing_grid if c["check"] in PAIRING_CHECKS else ctx.grid).to_dict()
    vd["tolerance"] = TOLERANCES
    rec = {
        "id": c.get("id", f"{c['check']}-{index}"),
        "check": c["check"],
        "inputs": _jsonable(inputs),
        "verdict": vd,
        "passed": passed,
        "expect": expect,
        "ok": passed == (expect == "pass"),
    }
    if samples is not None:
        rec["samples"] = _jsonable(samples)
    if timings:
        rec["wall_time"] = time.perf_counter() - t0
    return rec


def run_scenario(data, jobs=1, grid=None, moments=None, seed=None, timings=False):
    validate_scenario(data)
    ctx = Context(data, jobs, grid, moments, seed)
    checks = data["checks"]
    if jobs > 1 and len(checks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda ic: run_check(ctx, ic[1], ic[0], timings), enumerate(checks)))
    else:
        records = [run_check(ctx, c, i, timings) for i, c in enumerate(checks)]
    unexpected = [r["id"] for r in records if not r["ok"]]
    report = {
        "schema": "epsnet-report/1",
        "provenance": _jsonable(ctx.provenance()),
        "records": records,
        "summary": {"total": len(records), "ok": len(records) - len(unexpected),
                    "unexpected": unexpected, "exit_status": 1 if unexpected else 0},
    }
    validate_report(report)
    return report


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    validate_scenario(data)
    return data


def shipped_suite():
    text = resources.files("epsnet").joinpath("data/counterexamples.json").read_text(encoding="utf-8")
    return json.loads(text)


def report_json(report):
    return json.dumps(report, indent=2, sort_keys=False, allow_nan=False) + "\n"


def report_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "k", "eps", "value"])
    for r in report["records"]:
        for row in r.get("samples", []):
            w.writerow([r["id"], row["k"], repr(row["eps"]), repr(row["value"])])
    return buf.getvalue()


def emit_report(report, path=None, fmt="json"):
    text = report_json(report) if fmt == "json" else report_csv(report)
    if path is None or path == "-":
        return text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text
