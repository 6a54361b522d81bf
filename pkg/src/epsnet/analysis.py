"""Integrals of nets between generalized bounds, pairings with test functions, association.

Quadrature is breadth-first adaptive Gauss-Legendre: every live interval is
integrated with a 10- and a 21-point rule in one vectorised evaluation, and
intervals whose two estimates disagree are bisected.  Accepted contributions
are summed with ``math.fsum`` in interval order, so results do not depend on
evaluation scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import expr as E
from .algebra import GenNumber, as_gen_number, strictly_positive
from .asymptotics import DEFAULT_GRID, DecaySamples, _jsonable, fit_order
from .defaults import ASSOC_RATE, ASSOC_TOL, PAIRING_K_MAX, DEFAULTS
from .errors import EvaluationError, InsufficientData, PreconditionViolated

_GL_LO = np.polynomial.legendre.leggauss(10)
_GL_HI = np.polynomial.legendre.leggauss(21)
QUAD_TOL = DEFAULTS["quad_tol"]
_EPS_MACH = np.finfo(float).eps
PAIRING_GRID = DEFAULT_GRID.truncate(PAIRING_K_MAX)


@dataclass
class QuadResult:
    value: float
    error: float
    intervals: int
    converged: bool


def adaptive_gl(f, breakpoints, tol=1e-15, max_rounds=40, max_intervals=200_000):
    """Integrate a vectorised ``f`` over [breakpoints[0], breakpoints[-1]]."""
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    if len(bp) < 2:
        return QuadResult(0.0, 0.0, 0, True)
    total_len = bp[-1] - bp[0]
    live = np.stack([bp[:-1], bp[1:]], axis=1)
    done = []
    converged = True
    scale = 0.0
    for _ in range(max_rounds):
        if len(live) == 0:
            break
        a, b = live[:, 0:1], live[:, 1:2]
        mid, half = (a + b) / 2, (b - a) / 2
        xs_lo = mid + half * _GL_LO[0]
        xs_hi = mid + half * _GL_HI[0]
        vals = f(np.concatenate([xs_lo.ravel(), xs_hi.ravel()]))
        n_lo = xs_lo.size
        v_lo = vals[:n_lo].reshape(xs_lo.shape)
        v_hi = vals[n_lo:].reshape(xs_hi.shape)
        i_lo = (v_lo @ _GL_LO[1]) * half[:, 0]
        i_hi = (v_hi @ _GL_HI[1]) * half[:, 0]
        i_abs = (np.abs(v_hi) @ _GL_HI[1]) * half[:, 0]
        err = np.abs(i_hi - i_lo)
        scale = max(scale, float(np.sum(i_abs)))
        # the round-off term stops refinement once the two rules agree to working precision
        budget = np.maximum(tol * max(1.0, scale) * (2 * half[:, 0]) / total_len, 100 * _EPS_MACH * i_abs)
        ok = (err <= budget) | (half[:, 0] < 1e-14 * max(1.0, abs(mid).max()))
        for lo, val, e in zip(live[ok, 0], i_hi[ok], err[ok]):
            done.append((lo, val, e))
        bad = live[~ok]
        if len(bad) == 0:
            live = bad
            break
        if len(done) + 2 * len(bad) > max_intervals:
            for (lo, hi), val, e in zip(bad, i_hi[~ok], err[~ok]):
                done.append((lo, val, e))
            converged = False
            live = bad[:0]
            break
        m = (bad[:, 0] + bad[:, 1]) / 2
        live = np.concatenate([np.stack([bad[:, 0], m], 1), np.stack([m, bad[:, 1]], 1)])
    else:
        converged = False
    done.sort(key=lambda t: t[0])
    value = math.fsum(v for _, v, _ in done)
    error = math.fsum(e for _, _, e in done)
    return QuadResult(value, error, len(done), converged)


def eps_breakpoints(lo, hi, eps, center=0.0):
    """Uniform breakpoints of spacing eps/4 inside |x - center| <= 8 eps, clipped to [lo, hi]."""
    hw = DEFAULTS["local_halfwidth"]
    pts = center + np.arange(-4 * hw, 4 * hw + 1) * (eps / 4)
    pts = pts[(pts > lo) & (pts < hi)]
    return np.concatenate([[lo], pts, [hi]])


@dataclass(frozen=True)
class TestFunction:
    """phi(x) = Z q(x) bump((x - c)/r) with unit mass (product over axes for d > 1)."""

    __test__ = False

    center: tuple
    radius: float
    modulation: tuple = (1.0,)

    def __post_init__(self):
        c = self.center if isinstance(self.center, tuple) else (float(self.center),)
        object.__setattr__(self, "center", tuple(float(v) for v in c))
        if self.radius <= 0:
            raise ValueError("test function radius must be positive")

    @property
    def dim(self):
        return len(self.center)

    @property
    def away_from_zero(self):
        return float(np.linalg.norm(self.center)) > self.radius * math.sqrt(self.dim)

    def support(self, axis=0):
        c = self.center[axis]
        return c - self.radius, c + self.radius

    def _shape(self):
        factors = []
        for i, c in enumerate(self.center):
            factors.append(E.bump(E.div(E.sub(E.var(i), E.const(c)), E.const(self.radius))))
        q = E.add(*[E.mul(E.const(a), E.pow_(E.var(0), j)) for j, a in enumerate(self.modulation)])
        return E.mul(q, *factors)

    @cached_property
    def normalization(self):
        if self.dim != 1:
            return 1.0 / (self.radius * E.BUMP_MASS) ** self.dim
        lo, hi = self.support()
        shape = self._shape()
        res = adaptive_gl(lambda x: E.evaluate_array(shape, x[:, None], 1.0), [lo, self.center[0], hi])
        if abs(res.value) < 1e-8 * self.radius:
            raise ValueError("modulated bump has (nearly) zero mass and cannot be normalized")
        return 1.0 / res.value

    @cached_property
    def expr(self):
        return E.mul(E.const(self.normalization), self._shape())

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return E.evaluate_array(self.expr, x[:, None] if x.ndim == 1 else x, 1.0)

    def describe(self):
        return {"center": list(self.center), "radius": self.radius,
                "modulation": list(self.modulation), "away_from_zero": self.away_from_zero}


def default_testfns(away_from_zero=False):
    if away_from_zero:
        return [TestFunction((1.5,), 1.0), TestFunction((-2.0,), 0.75, (1.0, -0.25))]
    return [TestFunction((0.0,), 1.0), TestFunction((0.3,), 0.8, (1.0, 0.5))]


@dataclass
class PairingSequence:
    ks: np.ndarray
    eps: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    flagged: list = field(default_factory=list)

    def rows(self):
        return [(int(k), float(e), float(v), float(r))
                for k, e, v, r in zip(self.ks, self.eps, self.values, self.errors)]

    def to_dict(self):
        return {"k": self.ks.tolist(), "eps": self.eps.tolist(),
                "values": [float(v) for v in self.values],
                "err_estimate": [float(v) for v in self.errors], "flagged": self.flagged}


def _integrand_breaks(e, lo, hi, eps):
    if E.uses_mollifier(e) or E.has_eps(e):
        return eps_breakpoints(lo, hi, eps)
    return np.array([lo, (lo + hi) / 2, hi])


def pair(u, phi, grid=PAIRING_GRID, jobs=1):
    """v_k = <u_{eps_k}, phi> by adaptive quadrature resolving the eps scale near 0."""
    if u.dim != 1 or phi.dim != 1:
        raise ValueError("pairings are implemented for d = 1")
    lo, hi = phi.support()
    if u.domain == "pierced" and not (lo > 0 or hi < 0):
        raise PreconditionViolated("pierced net paired with a test function whose support meets 0",
                                   {"support": [lo, hi]})
    if u.domain == "pierced" and min(abs(lo), abs(hi)) < u.exclusion_radius(grid.eps_at(grid.k_min)):
        raise PreconditionViolated("test function support enters the exclusion radius")
    phi_e = phi.expr

    def one(k):
        eps = grid.eps_at(k)
        e = E.mul(u.expr_at(k), phi_e)
        if e.is_const(0.0):
            return 0.0, 0.0, True
        res = adaptive_gl(lambda x: E.evaluate_array(e, x[:, None], eps, u.mollifier),
                          _integrand_breaks(e, lo, hi, eps))
        return res.value, res.error, res.converged

    ks = [int(k) for k in grid.ks]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(one, ks))
    else:
        out = [one(k) for k in ks]
    vals = np.array([o[0] for o in out])
    errs = np.array([o[1] for o in out])
    flagged = [k for k, (v, r, ok) in zip(ks, out) if not ok or r > QUAD_TOL * (1 + abs(v))]
    return PairingSequence(grid.ks, grid.eps, vals, errs, flagged)


def integrate_abs(f, a, b, grid=DEFAULT_GRID, jobs=1):
    """int_{a_eps}^{b_eps} |f_eps| dx as a tabulated generalized number; requires a << b."""
    if f.dim != 1:
        raise ValueError("integrate_abs is one-dimensional")
    a, b = as_gen_number(a), as_gen_number(b)
    av, bv = a.on(grid), b.on(grid)

    def one(k, lo, hi):
        eps = grid.eps_at(k)
        if hi <= lo:
            return 0.0
        e = E.abs_(f.expr_at(k))
        breaks = _integrand_breaks(e, lo, hi, eps)
        return adaptive_gl(lambda x: f.check_points(x[:, None], eps)
                           or E.evaluate_array(e, x[:, None], eps, f.mollifier), breaks).value

    args = [(int(k), float(lo), float(hi)) for k, lo, hi in zip(grid.ks, av, bv)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(lambda t: one(*t), args))
    else:
        raw = [one(*t) for t in args]

    gate = strictly_positive(b - a, 12, grid)
    if not gate.passed:
        lo, hi = float(np.min(av)), float(np.max(bv))
        probe = np.linspace(lo, hi, 9)[1:-1] if hi > lo else np.array([lo])
        interior = [float(np.max(np.abs(f.evaluate(int(k), probe, grid.eps_at(k)))))
                    for k in grid.ks]
        raise PreconditionViolated(
            "lower bound is not strictly below the upper bound (a << b fails)",
            {"raw_integral": raw, "interior_sup_abs_f": interior,
             "max_interior_value": max(interior)})
    return GenNumber.tabulated(raw, grid)


@dataclass
class AssocVerdict:
    outcome: str
    limit: float | None = None
    cells: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.outcome == "Converges"

    def __str__(self):
        if self.passed:
            return f"Converges({self.limit:.6g})"
        return self.outcome

    def to_dict(self):
        return {"outcome": self.outcome, "limit": self.limit, "passed": self.passed,
                "detail": _jsonable(self.detail), "cells": [_jsonable(c) for c in self.cells]}


def _decay_slope(values, grid):
    vals = np.abs(np.asarray(values, dtype=float))
    if len(vals) < 8:
        return None
    g = DecaySamples(grid.ks[-len(vals):], grid.eps[-len(vals):], vals)
    try:
        return fit_order(g).slope
    except InsufficientData:
        return None


def convergence(seq, grid=PAIRING_GRID, tol=ASSOC_TOL, rate=ASSOC_RATE, to_zero=False):
    """Cauchy gate on one pairing sequence; returns a cell dict."""
    v = np.asarray(seq.values, dtype=float)
    n = len(v)
    tail = v[n - max(2, math.ceil(n / 4)):]
    osc = float(np.max(tail) - np.min(tail))
    inc_slope = _decay_slope(np.diff(v), grid)
    cauchy = osc < tol or (inc_slope is not None and inc_slope >= rate)
    limit = float(v[-1])
    cell = {"limit": limit, "tail_oscillation": osc, "increment_slope": inc_slope,
            "cauchy": bool(cauchy), "flagged": list(seq.flagged)}
    ok = cauchy
    if to_zero:
        zslope = _decay_slope(v, grid)
        cell["zero_slope"] = zslope
        ok = ok and (abs(limit) < tol or (zslope is not None and zslope >= rate))
    cell["passed"] = bool(ok)
    return cell


def associate(u, testfns, grid=PAIRING_GRID, to_zero=False, tol=ASSOC_TOL, jobs=1):
    """Converges when every pairing sequence is Cauchy on the grid tail."""
    if not testfns:
        raise ValueError("associate needs at least one test function")
    cells = []
    for phi in testfns:
        seq = pair(u, phi, grid, jobs)
        cell = convergence(seq, grid, tol, to_zero=to_zero)
        cell["phi"] = phi.describe()
        cells.append(cell)
    if all(c["passed"] for c in cells):
        return AssocVerdict("Converges", 0.0 if to_zero else cells[0]["limit"], cells)
    return AssocVerdict("NotConvergent", None, cells)


def associate_sequences(seqs, grid=PAIRING_GRID, to_zero=True, tol=ASSOC_TOL):
    """Association gate on precomputed residual sequences (homogeneity residuals)."""
    cells = [convergence(s, grid, tol, to_zero=to_zero) for s in seqs]
    if all(c["passed"] for c in cells):
        return AssocVerdict("Converges", 0.0 if to_zero else cells[0]["limit"], cells)
    return AssocVerdict("NotConvergent", None, cells)
