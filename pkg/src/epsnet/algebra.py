"""Generalized functions, numbers and points as eps-indexed representatives.

A :class:`Net` is one closed-form expression in x and eps plus optional
per-grid-index overrides, which is how subsequence constructions (a value on
even k and another elsewhere, say) are stored.  Equality is negligibility of
the difference, decided on the eps-grid by :mod:`epsnet.asymptotics`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import expr as E
from .asymptotics import (
    DEFAULT_GRID,
    DecaySamples,
    DecayVerdict,
    default_compacts,
    exact_zero,
    sample_sup,
    verdict_moderate,
    verdict_negligible,
    worst_of,
)
from .defaults import HOMOG_M, PIERCED_DELTA
from .errors import CBoundednessViolation, EvaluationError, GridMismatch
from .normal import is_zero
from .parse import parse


@dataclass(frozen=True, eq=False)
class Net:
    """Representative (u_eps) of a generalized function on R^d or R^d minus 0.

    ``domain`` is "whole" or "pierced".  A whole-space net may still contain
    singular factors when ``guarded`` is set: a smooth cutoff vanishing near
    the origin multiplies them, and evaluation treats 0 * anything as 0.
    """

    expr: E.Expr
    dim: int = 1
    domain: str = ""
    overrides: tuple = ()
    mollifier: object = None
    label: str = ""
    delta: float = PIERCED_DELTA
    guarded: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.domain:
            object.__setattr__(self, "domain", "pierced" if self._any_pierced() else "whole")
        if self.domain not in ("whole", "pierced"):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.domain == "whole" and self._any_pierced() and not self.guarded:
            raise ValueError("singular expression on a whole-space net without a cutoff guard")
        ov = dict(self.overrides)
        if len(ov) != len(self.overrides):
            raise ValueError("overlapping overrides")
        object.__setattr__(self, "overrides", tuple(sorted(ov.items())))
        if max(E.max_var(e) for e in self.exprs()) >= self.dim:
            raise ValueError(f"expression uses variables beyond dimension {self.dim}")
        if self.mollifier is None and any(E.uses_mollifier(e) for e in self.exprs()):
            raise ValueError("net references rho/Rho/I but no mollifier was given")
        object.__setattr__(self, "_dcache", {})

    def _any_pierced(self):
        return any(e.pierced for e in self.exprs())

    def exprs(self):
        yield self.expr
        for _, e in self.overrides:
            yield e

    @classmethod
    def from_text(cls, text, dim=1, overrides=None, mollifier=None, **kw):
        ov = tuple((int(k), parse(s, dim)) for k, s in (overrides or {}).items())
        return cls(parse(text, dim), dim=dim, overrides=ov, mollifier=mollifier,
                   label=kw.pop("label", text), **kw)

    def replace(self, expr=None, overrides=None, **kw):
        fields = dict(expr=self.expr if expr is None else expr, dim=self.dim,
                      domain=self.domain, overrides=self.overrides if overrides is None else overrides,
                      mollifier=self.mollifier, label=self.label, delta=self.delta,
                      guarded=self.guarded, meta=dict(self.meta))
        fields.update(kw)
        return Net(**fields)

    @property
    def diff_domain(self):
        return "pierced" if (self.domain == "pierced" or self.guarded) else "whole"

    def expr_at(self, k):
        for kk, e in self.overrides:
            if kk == k:
                return e
        return self.expr

    def derivative_at(self, k, multi):
        e = self.expr_at(k)
        multi = tuple(multi)
        if not any(multi):
            return e
        key = (e, multi)
        hit = self._dcache.get(key)
        if hit is None:
            hit = E.derivative(e, multi, self.diff_domain)
            self._dcache[key] = hit
        return hit

    def focus_points(self, k, K):
        """Extra sample points resolving narrow features registered in ``meta["focus"]``."""
        spots = self.meta.get("focus", {}).get(k)
        if not spots:
            return None
        pts = np.concatenate([c + np.linspace(-h, h, 65) for c, h in spots])[:, None]
        return pts[K.contains(pts)]

    def exclusion_radius(self, eps):
        return max(eps, self.delta) if self.domain == "pierced" else 0.0

    def check_points(self, pts, eps):
        if self.domain != "pierced":
            return
        pts = np.atleast_2d(pts)
        r = np.linalg.norm(pts, axis=1)
        bad = r < self.exclusion_radius(eps)
        if bad.any():
            p = pts[int(np.argmax(bad))].tolist()
            raise EvaluationError(
                f"pierced net sampled inside the exclusion radius at {p}, eps={eps}", location=p)

    def evaluate(self, k, points, eps=None, grid=DEFAULT_GRID):
        eps = grid.eps_at(k) if eps is None else eps
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None] if self.dim == 1 else pts[None, :]
        self.check_points(pts, eps)
        return E.evaluate_array(self.expr_at(k), pts, eps, self.mollifier)

    def text(self):
        return E.to_text(self.expr, self.dim)

    def describe(self):
        out = {"expr": self.text(), "dim": self.dim, "domain": self.domain}
        if self.overrides:
            out["overrides"] = {str(k): E.to_text(e, self.dim) for k, e in self.overrides}
        if self.mollifier is not None:
            out["mollifier"] = self.mollifier.fingerprint
        if self.meta:
            out["meta"] = self.meta
        return out

    def __repr__(self):
        ov = f", overrides={len(self.overrides)}" if self.overrides else ""
        return f"Net({self.text()!r}, dim={self.dim}, domain={self.domain}{ov})"


def zero_net(dim=1):
    return Net(E.ZERO, dim)


def const_net(c, dim=1):
    return Net(E.as_expr(c), dim)


def _mollifier_of(a, b):
    if a.mollifier is not None and b.mollifier is not None:
        if a.mollifier.fingerprint != b.mollifier.fingerprint:
            raise ValueError("operands embedded with different mollifiers")
    return a.mollifier if a.mollifier is not None else b.mollifier


_OPS = {"add": E.add, "sub": E.sub, "mul": E.mul}


def combine(a, b, op):
    """Pointwise ring operation on representatives; overrides merge by union of indices."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} vs {b.dim}")
    f = _OPS[op]
    keys = sorted({k for k, _ in a.overrides} | {k for k, _ in b.overrides})
    ov = tuple((k, f(a.expr_at(k), b.expr_at(k))) for k in keys)
    pierced = "pierced" if "pierced" in (a.domain, b.domain) else ""
    meta = {}
    focus = _merge_focus(a, b)
    if focus:
        meta["focus"] = focus
    return Net(f(a.expr, b.expr), a.dim, pierced, ov, _mollifier_of(a, b),
               f"({a.label}) {op} ({b.label})", min(a.delta, b.delta), a.guarded or b.guarded, meta)


def _merge_focus(a, b):
    out = {}
    for n in (a, b):
        for k, spots in n.meta.get("focus", {}).items():
            out.setdefault(k, []).extend(spots)
    return out


def scale(a, c):
    """c * a for a closed-form generalized number c."""
    c = as_gen_number(c)
    if c.values is not None:
        raise ValueError("scale needs a closed-form generalized number")
    keys = sorted({k for k, _ in a.overrides} | {k for k, _ in c.overrides})
    ov = tuple((k, E.mul(c.expr_at(k), a.expr_at(k))) for k in keys)
    return a.replace(E.mul(c.expr, a.expr), ov, label=f"({c.text()})*({a.label})")


def derive(a, axis=0):
    if not 0 <= axis < a.dim:
        raise ValueError(f"axis {axis} outside dimension {a.dim}")
    d = tuple(1 if i == axis else 0 for i in range(a.dim))
    ov = tuple((k, E.derivative(e, d, a.diff_domain)) for k, e in a.overrides)
    return a.replace(E.derivative(a.expr, d, a.diff_domain), ov, label=f"d{axis}({a.label})")


def substitute_net(a, mapping, label=None):
    """Compose representatives with a coordinate map given as {axis: Expr}."""
    ov = tuple((k, E.substitute(e, mapping)) for k, e in a.overrides)
    return a.replace(E.substitute(a.expr, mapping), ov, label=label or a.label)


def dilate(a, lam):
    lam = float(lam)
    return substitute_net(a, {i: E.mul(E.const(lam), E.var(i)) for i in range(a.dim)},
                          f"({a.label})(x*{lam:g})")


def translate(a, h):
    h = np.broadcast_to(np.asarray(h, dtype=float), (a.dim,))
    return substitute_net(a, {i: E.add(E.var(i), E.const(h[i])) for i in range(a.dim)},
                          f"({a.label})(x+{h.tolist()})")


def multi_indices(dim, order):
    return [m for m in product(range(order + 1), repeat=dim) if sum(m) <= order]


def structural_zero(n):
    return all(is_zero(e) for e in n.exprs())


def negligibility(n, Ks=None, m=HOMOG_M, grid=DEFAULT_GRID, max_order=2, jobs=1):
    """Worst verdict_negligible over compacts and derivative multi-indices."""
    if structural_zero(n):
        return exact_zero({"structural": True})
    Ks = Ks or default_compacts(n.dim, n.domain == "pierced")
    cells = []
    for K in Ks:
        for mi in multi_indices(n.dim, max_order):
            v = verdict_negligible(sample_sup(n, K, mi, grid, jobs), m)
            v.detail.update({"K": K.describe(), "deriv": list(mi)})
            cells.append(v)
    return worst_of(cells)


def moderateness(n, Ks=None, grid=DEFAULT_GRID, max_order=0, jobs=1):
    Ks = Ks or default_compacts(n.dim, n.domain == "pierced")
    cells = []
    for K in Ks:
        for mi in multi_indices(n.dim, max_order):
            v = verdict_moderate(sample_sup(n, K, mi, grid, jobs))
            v.detail.update({"K": K.describe(), "deriv": list(mi)})
            cells.append(v)
    return worst_of(cells)


def equals(u, v, Ks=None, m=HOMOG_M, grid=DEFAULT_GRID, jobs=1):
    return negligibility(combine(u, v, "sub"), Ks, m, grid, 2, jobs)


# generalized numbers


@dataclass(frozen=True, eq=False)
class GenNumber:
    """Closed-form expression in eps (plus overrides) or values tabulated on a grid."""

    expr: E.Expr | None = None
    overrides: tuple = ()
    values: np.ndarray | None = None
    grid: object = None

    def __post_init__(self):
        if (self.expr is None) == (self.values is None):
            raise ValueError("GenNumber needs exactly one of expr or values")
        if self.expr is not None:
            for e in [self.expr] + [o for _, o in self.overrides]:
                if E.max_var(e) >= 0:
                    raise ValueError("a generalized number may depend on eps only")
        else:
            vals = np.asarray(self.values, dtype=float)
            if self.grid is None or len(vals) != len(self.grid):
                raise ValueError("tabulated GenNumber needs one value per grid point")
            object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, text_or_value, overrides=None):
        if isinstance(text_or_value, str):
            e = parse(text_or_value, 1)
        else:
            e = E.as_expr(text_or_value)
        ov = tuple(sorted((int(k), E.as_expr(parse(s, 1) if isinstance(s, str) else s))
                          for k, s in (overrides or {}).items()))
        return cls(e, ov)

    @classmethod
    def tabulated(cls, values, grid=DEFAULT_GRID):
        return cls(values=np.asarray(values, dtype=float), grid=grid)

    def expr_at(self, k):
        for kk, e in self.overrides:
            if kk == k:
                return e
        return self.expr

    def on(self, grid=DEFAULT_GRID):
        if self.values is not None:
            if self.grid != grid:
                raise GridMismatch("tabulated generalized number lives on a different grid")
            return self.values
        out = []
        for k in grid.ks:
            e = self.expr_at(int(k))
            out.append(E.evaluate_array(e, np.zeros((1, 1)), grid.eps_at(k))[0])
        return np.array(out)

    def text(self):
        if self.expr is None:
            return "<tabulated>"
        return E.to_text(self.expr, 1)

    def _binary(self, other, f, npf):
        other = as_gen_number(other)
        if self.expr is not None and other.expr is not None:
            keys = sorted({k for k, _ in self.overrides} | {k for k, _ in other.overrides})
            ov = tuple((k, f(self.expr_at(k), other.expr_at(k))) for k in keys)
            return GenNumber(f(self.expr, other.expr), ov)
        grid = self.grid if self.values is not None else other.grid
        if self.values is not None and other.values is not None and self.grid != other.grid:
            raise GridMismatch("tabulated operands on different grids")
        return GenNumber.tabulated(npf(self.on(grid), other.on(grid)), grid)

    def __add__(self, o):
        return self._binary(o, E.add, np.add)

    def __sub__(self, o):
        return self._binary(o, E.sub, np.subtract)

    def __mul__(self, o):
        return self._binary(o, E.mul, np.multiply)

    __radd__ = __add__
    __rmul__ = __mul__

    def samples(self, grid=DEFAULT_GRID):
        return DecaySamples(grid.ks, grid.eps, np.abs(self.on(grid)))

    def to_dict(self, grid=DEFAULT_GRID):
        out = {"values": [float(v) for v in self.on(grid)]}
        if self.expr is not None:
            out["expr"] = self.text()
        return out


def as_gen_number(c):
    if isinstance(c, GenNumber):
        return c
    return GenNumber.of(c)


@dataclass(frozen=True, eq=False)
class GenPoint:
    """Compactly supported generalized point: d generalized numbers staying in K."""

    components: tuple
    container: object = None

    @classmethod
    def standard(cls, *coords):
        return cls(tuple(GenNumber.of(float(c)) for c in coords))

    @property
    def dim(self):
        return len(self.components)

    def on(self, grid=DEFAULT_GRID):
        pts = np.stack([as_gen_number(c).on(grid) for c in self.components], axis=1)
        if self.container is not None:
            inside = self.container.contains(pts)
            if not inside.all():
                k = int(grid.ks[int(np.argmin(inside))])
                raise ValueError(f"generalized point leaves its container at k={k}")
        return pts


def eval_point(u, p, grid=DEFAULT_GRID):
    """Tabulated generalized number u_eps(p_eps)."""
    if p.dim != u.dim:
        raise ValueError("point dimension differs from net dimension")
    pts = p.on(grid)
    vals = []
    for i, k in enumerate(grid.ks):
        vals.append(u.evaluate(int(k), pts[i:i + 1], grid.eps_at(k))[0])
    return GenNumber.tabulated(vals, grid)


def nonneg_consistent(a, m, grid=DEFAULT_GRID):
    vals = as_gen_number(a).on(grid)
    neg = np.maximum(0.0, -vals)
    if not neg.any():
        return exact_zero({"negative_part": "identically 0"})
    return verdict_negligible(DecaySamples(grid.ks, grid.eps, neg), m)


def strictly_positive(a, m_budget=12, grid=DEFAULT_GRID):
    """Least m0 with a_eps > eps^m0 on the grid tail."""
    if m_budget > 12:
        raise ValueError("m_budget above 12")
    vals = as_gen_number(a).on(grid)
    tail = slice(len(grid) - (len(grid) + 1) // 2, len(grid))
    v, eps = vals[tail], grid.eps[tail]
    for m0 in range(m_budget + 1):
        if np.all(v > eps ** m0):
            return DecayVerdict("Positive", m0, detail={"m0": m0})
    return DecayVerdict("Fails", None, detail={"m_budget": m_budget})


def compose(u, g, K, grid=DEFAULT_GRID):
    """u o g for a coordinate map g (a Net for d = 1 or a list of component Nets).

    The image of K under every g_eps must stay in a fixed compact subset of
    u's domain; for pierced u that means bounded away from the origin.
    """
    comps = list(g) if isinstance(g, (list, tuple)) else [g]
    if len(comps) != u.dim:
        raise ValueError("map has the wrong number of components")
    margin = None
    hulls = []
    for k in grid.ks:
        eps = grid.eps_at(k)
        pts = K.lattice(eps)
        img = np.stack([c.evaluate(int(k), pts, eps) for c in comps], axis=1)
        r = np.linalg.norm(img, axis=1)
        hulls.append(float(r.max()))
        if u.domain == "pierced":
            i = int(np.argmin(r))
            margin = r[i] if margin is None else min(margin, r[i])
            if r[i] <= u.exclusion_radius(grid.eps_at(grid.k_min)):
                raise CBoundednessViolation(
                    f"image of K under the map reaches the excluded origin (|g| = {r[i]:.3g})",
                    eps=eps, point=pts[i].tolist())
    growth = verdict_moderate(DecaySamples(grid.ks, grid.eps, hulls))
    if not growth.passed or growth.order > 0:
        raise CBoundednessViolation("image of K is not contained in a fixed compact set")
    mapping = {i: c.expr for i, c in enumerate(comps)}
    keys = sorted({k for k, _ in u.overrides} | {k for c in comps for k, _ in c.overrides})
    ov = tuple((k, E.substitute(u.expr_at(k), {i: c.expr_at(k) for i, c in enumerate(comps)}))
               for k in keys)
    # singularities of u now sit outside the image of K
    domain, guarded = ("whole", True) if u.domain == "pierced" else (u.domain, u.guarded)
    out = u.replace(E.substitute(u.expr, mapping), ov, label=f"({u.label}) o g",
                    domain=domain, guarded=guarded)
    out.meta["image_hull_radius"] = max(hulls)
    out.meta["valid_on"] = K.describe()
    if margin is not None:
        out.meta["image_min_radius"] = float(margin)
    return out
