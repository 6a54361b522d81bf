"""Homogeneity detectors and constructions.

Strong homogeneity compares u(lambda x) with lambda^alpha u(x) as nets, weak
homogeneity compares the pairings of both sides with test functions supported
away from 0, and associative homogeneity only asks the pairing residual to
tend to 0.  Every detector checks a finite scale set; reports carry it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from . import expr as E
from .algebra import (
    GenNumber,
    GenPoint,
    Net,
    combine,
    derive,
    dilate,
    eval_point,
    moderateness,
    multi_indices,
    negligibility,
    scale,
    substitute_net,
    translate,
)
from .analysis import PAIRING_GRID, associate, associate_sequences, default_testfns, pair
from .asymptotics import (
    DEFAULT_GRID,
    CompactSet,
    DecaySamples,
    DecayVerdict,
    default_compacts,
    exact_zero,
    sample_sup,
    verdict_moderate,
    verdict_negligible,
    worst_of,
)
from .defaults import DEFAULTS, HOMOG_M, SCALES
from .errors import EpsnetError, PreconditionViolated
from .normal import is_zero


@dataclass
class HomogeneityQuery:
    alpha: float = 0.0
    scales: tuple = SCALES
    Ks: list | None = None
    m: float = HOMOG_M
    testfns: list | None = None
    grid: object = DEFAULT_GRID
    pairing_grid: object = PAIRING_GRID
    jobs: int = 1

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError("homogeneity degree must be finite")
        self.scales = tuple(float(s) for s in self.scales)
        if any(s <= 0 for s in self.scales):
            raise ValueError("scales must be positive")
        if any(s == 1.0 for s in self.scales):
            raise ValueError("the trivial scale 1 is not a test")

    def compacts(self, u):
        return self.Ks or default_compacts(u.dim, u.domain == "pierced")

    def describe(self):
        return {"alpha": self.alpha, "scales": list(self.scales), "m": self.m}


def _power(lam, alpha):
    return E.const(float(lam) ** float(alpha))


def _residual_verdict(nets, q, u, labels, max_order=0):
    cells = []
    for net, label in zip(nets, labels):
        v = negligibility(net, q.compacts(u), q.m, q.grid, max_order, q.jobs)
        v.detail.update(label)
        cells.append(v)
    out = worst_of(cells)
    out.detail.update(q.describe())
    return out


def _constancy(u, q):
    """sup_K |u_eps(x) - u_eps(0)|, whole-space nets only."""
    if u.domain == "pierced":
        return None
    at0 = substitute_net(u, {i: E.ZERO for i in range(u.dim)})
    return negligibility(combine(u, at0, "sub"), q.compacts(u), q.m, q.grid, 0, q.jobs)


def scaling_invariance(u, q=None):
    q = q or HomogeneityQuery(0.0)
    nets = [combine(dilate(u, lam), u, "sub") for lam in q.scales]
    v = _residual_verdict(nets, q, u, [{"lambda": lam} for lam in q.scales])
    if v.passed:
        c = _constancy(u, q)
        if c is not None:
            v.detail["constancy"] = c.to_dict()
            v.detail["constancy_passed"] = c.passed
    return v


def translation_invariance(u, shifts=(1.0, -0.5), q=None):
    q = q or HomogeneityQuery(0.0)
    nets = [combine(translate(u, h), u, "sub") for h in shifts]
    v = _residual_verdict(nets, q, u, [{"shift": h} for h in shifts])
    v.detail["shifts"] = list(shifts)
    if v.passed:
        c = _constancy(u, q)
        if c is not None:
            v.detail["constancy"] = c.to_dict()
            v.detail["constancy_passed"] = c.passed
    return v


def strong_residual(u, lam, alpha):
    return combine(dilate(u, lam), scale(u, _power(lam, alpha)), "sub")


def strong_homogeneity(u, q):
    nets = [strong_residual(u, lam, q.alpha) for lam in q.scales]
    return _residual_verdict(nets, q, u, [{"lambda": lam} for lam in q.scales])


def _pairing_residuals(u, q, testfns):
    out = []
    for lam in q.scales:
        ul = dilate(u, lam)
        w = float(lam) ** float(q.alpha)
        for phi in testfns:
            a = pair(ul, phi, q.pairing_grid, q.jobs)
            b = pair(u, phi, q.pairing_grid, q.jobs)
            a.values = a.values - w * b.values
            a.errors = a.errors + abs(w) * b.errors
            a.flagged = sorted(set(a.flagged) | set(b.flagged))
            out.append((lam, phi, a))
    return out


def weak_homogeneity(u, q):
    """Pairing residual <u(lambda x), phi> - lambda^alpha <u, phi> negligible to order m."""
    testfns = q.testfns or default_testfns(away_from_zero=True)
    near = [phi.describe() for phi in testfns if not phi.away_from_zero]
    if near:
        raise PreconditionViolated("weak homogeneity needs test functions supported away from 0",
                                   {"offending": near})
    cells = []
    for lam, phi, seq in _pairing_residuals(u, q, testfns):
        s = DecaySamples(seq.ks, seq.eps, np.abs(seq.values))
        v = verdict_negligible(s, q.m)
        v.detail.update({"lambda": lam, "phi": phi.describe(), "flagged": seq.flagged})
        cells.append(v)
    out = worst_of(cells)
    out.detail.update(q.describe())
    return out


def associative_homogeneity(u, q):
    testfns = q.testfns or default_testfns()
    res = _pairing_residuals(u, q, testfns)
    v = associate_sequences([s for _, _, s in res], q.pairing_grid, to_zero=True)
    for (lam, phi, _), cell in zip(res, v.cells):
        cell["lambda"] = lam
        cell["phi"] = phi.describe()
    v.detail.update(q.describe())
    return v


def euler_residual(u, alpha):
    """sum_i x_i d_i u - alpha u."""
    acc = None
    for i in range(u.dim):
        du = derive(u, i)
        xi = Net(E.var(i), u.dim)
        part = combine(xi, du, "mul")
        acc = part if acc is None else combine(acc, part, "add")
    return combine(acc, scale(u, E.const(float(alpha))), "sub")


def euler_strong(u, alpha, Ks=None, m=HOMOG_M, grid=DEFAULT_GRID, jobs=1):
    return negligibility(euler_residual(u, alpha), Ks, m, grid, 2, jobs)


def euler_associated(u, alpha, testfns=None, grid=PAIRING_GRID, jobs=1):
    return associate(euler_residual(u, alpha), testfns or default_testfns(), grid,
                     to_zero=True, jobs=jobs)


def _direction(dim):
    r = E.norm(dim)
    return {i: E.div(E.var(i), r) for i in range(dim)}


def radial_form(u, alpha):
    """u(x/|x|) |x|^alpha, a pierced net."""
    radial = E.pow_(E.norm(u.dim), alpha)
    d = _direction(u.dim)
    ov = tuple((k, E.mul(E.substitute(e, d), radial)) for k, e in u.overrides)
    return u.replace(E.mul(E.substitute(u.expr, d), radial), ov, domain="pierced",
                     guarded=False, label=f"radial({u.label}, {alpha:g})")


def radial_factorization_check(u, alpha, annuli=None, m=HOMOG_M, grid=DEFAULT_GRID, jobs=1):
    if u.domain != "pierced":
        u = u.replace(domain="pierced")
    annuli = annuli or default_compacts(u.dim, True)
    for K in annuli:
        if K.kind != "annulus":
            raise PreconditionViolated("radial factorization is checked on annuli only")
    return negligibility(combine(u, radial_form(u, alpha), "sub"), annuli, m, grid, 0, jobs)


def cutoff_outside(scale_expr, dim):
    """rho(x) = 1 - sigma(|x| / s): 0 on |x| <= s, 1 on |x| >= 2 s, smooth and abs-free."""
    t2 = E.div(E.norm2(dim), E.pow_(scale_expr, 2))
    return E.step(E.div(E.sub(E.mul(E.const(2.0), t2), E.const(5.0)), E.const(3.0)))


def homogeneous_extension(u, alpha, provenance=None):
    """rho_eps(x) u(x/|x|) |x|^alpha, smooth on the whole space."""
    if not math.isfinite(alpha):
        raise ValueError("degenerate homogeneity degree")
    cut = cutoff_outside(E.EPS, u.dim)
    rad = radial_form(u, alpha)
    ov = tuple((k, E.mul(cut, e)) for k, e in rad.overrides)
    meta = dict(u.meta)
    meta.update({"extension_of": u.label, "alpha": alpha,
                 "homogeneity_verdict": provenance or "not supplied"})
    return rad.replace(E.mul(cut, rad.expr), ov, domain="whole", guarded=True,
                       label=f"ext({u.label}, {alpha:g})", meta=meta)


def extension_moderateness(ext, N=0, alpha=0.0, Ks=None, grid=DEFAULT_GRID, max_order=0, jobs=1):
    """Per derivative order |beta|, the extension must be Moderate with order <= N + |alpha| + |beta| + 1/2."""
    Ks = Ks or [CompactSet.box([(-1.0, 1.0)] * ext.dim)]
    cells = []
    for K in Ks:
        for mi in multi_indices(ext.dim, max_order):
            v = verdict_moderate(sample_sup(ext, K, mi, grid, jobs))
            bound = N + abs(alpha) + sum(mi) + 0.5
            ok = v.passed and v.order <= bound
            v.detail.update({"K": K.describe(), "deriv": list(mi), "bound": bound, "within_bound": ok})
            if not ok and v.passed:
                v = DecayVerdict("Fails", None, v.slope, v.intercept, v.residual, v.window, v.detail)
            cells.append(v)
    return worst_of(cells)


def extension_restriction(ext, u, alpha, annulus, grid=DEFAULT_GRID, m=HOMOG_M, jobs=1):
    """Compare the extension with u on an annulus where the cutoff is identically 1."""
    if annulus.kind != "annulus":
        raise ValueError("restriction is checked on an annulus")
    if 2 * grid.eps_at(grid.k_min) > annulus.r_in:
        raise PreconditionViolated("cutoff not identically 1 on the annulus for every grid eps",
                                   {"r_in": annulus.r_in, "eps_max": grid.eps_at(grid.k_min)})
    pierced = u if u.domain == "pierced" else u.replace(domain="pierced")
    # on the annulus the cutoff is 1, so the extension is the radial form there
    diff = combine(radial_form(pierced, alpha), pierced, "sub")
    if all(is_zero(e) for e in diff.exprs()):
        v = exact_zero({"structural": True})
    else:
        v = negligibility(diff, [annulus], m, grid, 0, jobs)
    numeric = combine(ext.replace(domain="pierced", guarded=False), pierced, "sub")
    s = sample_sup(numeric, annulus, None, grid, jobs)
    v.detail["numeric_sup"] = float(s.values.max())
    return v


def tempered_representative(u, alpha):
    """u sigma + u(x/|x|) |x|^alpha (1 - sigma), sigma = 1 on |x| <= 1 and 0 on |x| >= 2."""
    base = homogeneous_extension(u, alpha) if u.domain == "pierced" else u
    outside = cutoff_outside(E.ONE, u.dim)
    inside = E.sub(E.ONE, outside)
    rad = radial_form(u if u.domain == "pierced" else u.replace(domain="pierced"), alpha)
    keys = sorted({k for k, _ in base.overrides} | {k for k, _ in rad.overrides})
    blend = lambda a, b: E.add(E.mul(a, inside), E.mul(b, outside))
    ov = tuple((k, blend(base.expr_at(k), rad.expr_at(k))) for k in keys)
    return base.replace(blend(base.expr, rad.expr), ov, domain="whole", guarded=True,
                        label=f"tempered({u.label}, {alpha:g})")


class _Weighted:
    """Adapter exposing (1+|x|)^(-N) d^beta v to sample_sup."""

    def __init__(self, v, N):
        self.v = v
        self.dim = v.dim
        self.mollifier = v.mollifier
        self.weight = E.pow_(E.add(E.ONE, E.sqrt(E.norm2(v.dim))), -N)

    def check_points(self, pts, eps):
        self.v.check_points(pts, eps)

    def derivative_at(self, k, multi):
        return E.mul(self.weight, self.v.derivative_at(k, multi))


def tempered_check(v, N, radii=(1.0, 10.0, 100.0), max_order=2, grid=DEFAULT_GRID, jobs=1):
    """Weighted sups must be Moderate of order <= N + |beta| and saturate as the box grows."""
    w = _Weighted(v, N)
    cells = []
    for mi in multi_indices(v.dim, max_order):
        sups = []
        for R in radii:
            K = CompactSet.box([(-R, R)] * v.dim)
            s = sample_sup(w, K, mi, grid, jobs)
            verdict = verdict_moderate(s)
            bound = N + sum(mi)
            ok = verdict.passed and verdict.order <= bound
            sups.append(float(np.max(s.values)))
            verdict.detail.update({"R": R, "deriv": list(mi), "bound": bound})
            if not ok:
                verdict = DecayVerdict("Fails", None, verdict.slope, verdict.intercept,
                                       verdict.residual, verdict.window, verdict.detail)
            cells.append(verdict)
        # growth in x: the weighted sup must not keep increasing with the box
        if len(sups) >= 2 and not (sups[-1] <= 10.0 * max(sups[-2], 1e-300)):
            cells.append(DecayVerdict("Fails", None, detail={
                "deriv": list(mi), "reason": "weighted sup grows with the box", "sups": sups}))
    out = worst_of(cells)
    out.detail.update({"N": N, "radii": list(radii)})
    return out


# polynomial coefficients

_LATTICE_2D = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (1, 3), (3, 2), (2, 3)]


def coefficient_lattice(dim):
    if dim == 2:
        return np.array(_LATTICE_2D, dtype=float)
    grid = np.stack(np.meshgrid(*([np.arange(4.0)] * dim), indexing="ij"), -1).reshape(-1, dim)
    return grid[np.any(grid != 0, axis=1)]


def monomials(dim, k):
    out = []
    for combo in combinations_with_replacement(range(dim), k):
        out.append(tuple(combo.count(i) for i in range(dim)))
    return sorted(out, reverse=True)


def _monomial_expr(beta):
    return E.mul(*[E.pow_(E.var(i), p) for i, p in enumerate(beta)])


@dataclass
class CoefficientResult:
    monomials: list
    coefficients: list
    residual: DecayVerdict
    condition: float | None = None

    def to_dict(self, grid=DEFAULT_GRID):
        return {"monomials": [list(b) for b in self.monomials],
                "coefficients": [c.to_dict(grid) for c in self.coefficients],
                "condition": self.condition, "residual": self.residual.to_dict()}


def _gen_at(u, point):
    mapping = {i: E.const(float(c)) for i, c in enumerate(point)}
    e = E.substitute(u.expr, mapping)
    ov = tuple((k, E.substitute(x, mapping)) for k, x in u.overrides)
    return e, ov


def polynomial_coefficients(u, k, Ks=None, m=HOMOG_M, grid=DEFAULT_GRID, jobs=1):
    if not 0 <= k <= 6:
        raise ValueError("degree must lie in 0..6")
    betas = monomials(u.dim, k)
    cond = None
    if any(E.uses_mollifier(e) for e in u.exprs()):
        pts = coefficient_lattice(u.dim) if u.dim > 1 else np.array([[1.0]])
        vals = np.array([eval_point(u, GenPoint.standard(*p), grid).on(grid) for p in pts])
        A = np.array([[np.prod(p ** np.array(b)) for b in betas] for p in pts])
        cond = float(np.linalg.cond(A))
        _check_cond(cond)
        coefs = np.linalg.lstsq(A, vals, rcond=None)[0]
        gens = [GenNumber.tabulated(c, grid) for c in coefs]
        poly = None
    elif u.dim == 1:
        e, ov = _gen_at(u, (1.0,))
        gens = [GenNumber(e, ov)]
    else:
        pts = coefficient_lattice(u.dim)
        A = np.array([[np.prod(p ** np.array(b)) for b in betas] for p in pts])
        cond = float(np.linalg.cond(A))
        _check_cond(cond)
        W = np.linalg.pinv(A)
        at = [_gen_at(u, p) for p in pts]
        keys = sorted({kk for _, ov in at for kk, _ in ov})
        gens = []
        for row in W:
            combo = lambda j: E.add(*[E.mul(E.const(w), j(i)) for i, w in enumerate(row)])
            base = combo(lambda i: at[i][0])
            ov = tuple((kk, combo(lambda i: dict(at[i][1]).get(kk, at[i][0]))) for kk in keys)
            gens.append(GenNumber(base, ov))
    if all(g.expr is not None for g in gens):
        keys = sorted({kk for g in gens for kk, _ in g.overrides} | {kk for kk, _ in u.overrides})
        poly = lambda at: E.add(*[E.mul(g.expr_at(at) if at is not None else g.expr,
                                        _monomial_expr(b)) for g, b in zip(gens, betas)])
        model = u.replace(poly(None), tuple((kk, poly(kk)) for kk in keys), label="sum c_b x^b")
        residual = negligibility(combine(u, model, "sub"), Ks, m, grid, 2, jobs)
    else:
        residual = _tabulated_residual(u, gens, betas, Ks, m, grid, jobs)
    return CoefficientResult(betas, gens, residual, cond)


def _check_cond(cond):
    if not cond < DEFAULTS["vandermonde_cond_max"]:
        raise EpsnetError(f"coefficient lattice ill-conditioned (cond = {cond:.3g})")


def _tabulated_residual(u, gens, betas, Ks, m, grid, jobs):
    Ks = Ks or default_compacts(u.dim)
    cells = []
    for K in Ks:
        vals = []
        for i, kk in enumerate(grid.ks):
            eps = grid.eps_at(kk)
            pts = K.lattice(eps)
            model = sum(g.on(grid)[i] * np.prod(pts ** np.array(b), axis=1) for g, b in zip(gens, betas))
            vals.append(float(np.max(np.abs(u.evaluate(int(kk), pts, eps) - model))))
        cells.append(verdict_negligible(DecaySamples(grid.ks, grid.eps, vals), m))
    return worst_of(cells)


def degree_gate(alpha, tol=1e-9):
    """alpha is a non-negative integer (within tol)."""
    r = round(alpha)
    return abs(alpha - r) <= tol and r >= 0
