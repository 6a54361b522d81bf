"""Zero-divisor search in one dimension.

f is a zero divisor when, along a subsequence eps_k, |f_{eps_k}| drops below
eps_k^k on windows of half-width eps_k^rho.  The scan looks for such windows
on the eps-grid with a finite order budget, and a positive answer ships a
bump witness g with f g negligible and g not.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import expr as E
from .algebra import Net, combine, equals, zero_net
from .asymptotics import DEFAULT_GRID, _jsonable
from .defaults import DEFAULTS

WINDOW_POINTS = 33
RHO_LADDER = tuple(DEFAULTS["rho_ladder"])


@dataclass
class WindowReport:
    ks: list
    centers: list
    rho: float
    achieved: list
    budget: int
    per_k: dict = field(default_factory=dict)

    @property
    def found(self):
        return len(self.ks) >= 4 and self.achieved[-1] >= self.budget

    def to_dict(self):
        return _jsonable({"found": self.found, "k": self.ks, "centers": self.centers,
                          "rho": self.rho, "achieved": self.achieved, "budget": self.budget})


def _achieved(sup, eps, budget):
    """Largest j <= budget with sup < eps^j, or -1."""
    best = -1
    for j in range(budget + 1):
        if sup < eps ** j:
            best = j
        else:
            break
    return best


def _scan_k(f, K, rho, budget, k, grid):
    eps = grid.eps_at(k)
    h = eps ** rho
    lo, hi = K.bounds[0]
    centers = K.base_lattice[:, 0]
    centers = centers[(centers - h >= lo) & (centers + h <= hi)]
    if len(centers) == 0:
        return -1, None
    offs = np.linspace(-h, h, WINDOW_POINTS)
    pts = (centers[:, None] + offs[None, :]).ravel()
    vals = np.abs(f.evaluate(k, pts, eps)).reshape(len(centers), WINDOW_POINTS)
    sups = vals.max(axis=1)
    orders = np.array([_achieved(s, eps, budget) for s in sups])
    best = int(orders.max())
    tied = centers[orders == best]
    return best, float(tied[len(tied) // 2])


def find_small_windows(f, K, rho=1.0, k_budget=12, grid=DEFAULT_GRID, jobs=1):
    """Longest subsequence whose p-th entry reaches smallness order min(p + 1, budget)."""
    if f.dim != 1:
        raise ValueError("zero-divisor windows are one-dimensional")
    if K.kind != "box":
        raise ValueError("window scan needs an interval")
    if not 0 < rho <= 4:
        raise ValueError("rho must lie in (0, 4]")
    if not 1 <= k_budget <= 12:
        raise ValueError("budget must lie in 1..12")
    ks = [int(k) for k in grid.ks]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scans = list(pool.map(lambda k: _scan_k(f, K, rho, k_budget, k, grid), ks))
    else:
        scans = [_scan_k(f, K, rho, k_budget, k, grid) for k in ks]
    seq, centers, achieved = [], [], []
    for k, (best, c) in zip(ks, scans):
        if c is not None and best >= min(len(seq) + 1, k_budget):
            seq.append(k)
            centers.append(c)
            achieved.append(best)
    per_k = {k: {"achieved": b, "center": c} for k, (b, c) in zip(ks, scans)}
    return WindowReport(seq, centers, rho, achieved, k_budget, per_k)


def build_witness(report, grid=DEFAULT_GRID):
    """e * bump((x - c_k) / eps_k^rho) on the subsequence, 0 elsewhere (unit sup)."""
    if not report.ks:
        raise ValueError("cannot build a witness from an empty window report")
    ov = []
    for k, c in zip(report.ks, report.centers):
        h = grid.eps_at(k) ** report.rho
        arg = E.div(E.sub(E.X, E.const(c)), E.const(h))
        ov.append((k, E.mul(E.const(math.e), E.bump(arg))))
    focus = {k: [(c, grid.eps_at(k) ** report.rho)] for k, c in zip(report.ks, report.centers)}
    return Net(E.ZERO, 1, overrides=tuple(ov), label="witness",
               meta={"rho": report.rho, "subsequence": list(report.ks), "focus": focus})


@dataclass
class ZeroDivVerdict:
    outcome: str
    witness: Net | None = None
    report: WindowReport | None = None
    product: object = None
    witness_check: object = None
    tried: list = field(default_factory=list)

    @property
    def passed(self):
        return self.outcome == "IsZeroDivisor"

    def to_dict(self):
        out = {"outcome": self.outcome, "passed": self.passed, "tried": _jsonable(self.tried)}
        if self.report is not None:
            out["windows"] = self.report.to_dict()
        if self.witness is not None:
            out["witness"] = self.witness.describe()
            out["product_verdict"] = self.product.to_dict()
            out["witness_verdict"] = self.witness_check.to_dict()
        return out

    def __str__(self):
        return self.outcome


def zero_divisor_verdict(f, K, rho=None, budget=12, grid=DEFAULT_GRID, jobs=1):
    """IsZeroDivisor with a checked witness, or NoEvidence within the budget and rho-ladder."""
    ladder = [rho] if rho is not None else list(RHO_LADDER)
    tried = []
    for r in ladder:
        rep = find_small_windows(f, K, r, budget, grid, jobs)
        tried.append({"rho": r, "found": rep.found, "length": len(rep.ks),
                      "max_achieved": max((v["achieved"] for v in rep.per_k.values()), default=-1)})
        if not rep.found:
            continue
        g = build_witness(rep, grid)
        prod = equals(combine(f, g, "mul"), zero_net(1), [K], 12, grid, jobs)
        nonzero = equals(g, zero_net(1), [K], budget, grid, jobs)
        if prod.passed and not nonzero.passed:
            return ZeroDivVerdict("IsZeroDivisor", g, rep, prod, nonzero, tried)
        tried[-1]["witness_rejected"] = True
    return ZeroDivVerdict("NoEvidence", tried=tried)
