"""Mollifiers with vanishing moments and the embedding of a small distribution catalog.

The kernel is rho(t) = exp(-t^2) P(t) / sqrt(pi) with P even of degree M,
chosen so that rho has unit mass and vanishing moments of orders 1..M.  Every
quantity the evaluator needs (derivatives, the primitive R and the incomplete
moments I_j) has the closed form

    A * erfc(-t) / 2 + exp(-t^2) * S(t)

with A rational and S a polynomial, so nothing is splined.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from pathlib import Path

import numpy as np
from numpy.polynomial import hermite, polynomial as npoly
from scipy.special import erfc

from . import expr as E
from .errors import MollifierError

SQRT_PI = math.sqrt(math.pi)
MAX_M = 12
_TAIL = 40.0


def gaussian_moment(n):
    """int t^n exp(-t^2) dt / sqrt(pi) as an exact rational."""
    if n % 2:
        return Fraction(0)
    k = n // 2
    num = 1
    for i in range(1, 2 * k, 2):
        num *= i
    return Fraction(num, 2 ** k)


def _solve(a, b):
    """Gauss-Jordan elimination over the rationals."""
    n = len(b)
    rows = [list(r) + [v] for r, v in zip(a, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if rows[r][c] != 0), None)
        if piv is None:
            raise MollifierError("singular moment system")
        rows[c], rows[piv] = rows[piv], rows[c]
        p = rows[c][c]
        rows[c] = [v / p for v in rows[c]]
        for r in range(n):
            if r != c and rows[r][c] != 0:
                f = rows[r][c]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[c])]
    return [rows[i][n] for i in range(n)]


def _poly_mul_t(coeffs, j):
    return [Fraction(0)] * j + list(coeffs)


def _gauss_antiderivative(q):
    """(A, sigma) with int_{-inf}^t exp(-s^2) q(s) ds / sqrt(pi) = A erfc(-t)/2 + exp(-t^2) sigma(t)/sqrt(pi)."""
    q = list(q)
    while len(q) > 1 and q[-1] == 0:
        q.pop()
    deg = len(q) - 1
    if deg == 0:
        return q[0], [Fraction(0)]
    s = [Fraction(0)] * (deg + 2)
    for n in range(deg, 0, -1):
        s[n - 1] = ((n + 1) * s[n + 1] - q[n]) / 2
    return q[0] - s[1], s[:deg]


def _derivative_poly(q):
    """Q_{k+1} = Q_k' - 2 t Q_k for d/dt of exp(-t^2) Q_k(t)."""
    out = [Fraction(0)] * (len(q) + 1)
    for i, c in enumerate(q):
        if i:
            out[i - 1] += i * c
        out[i + 1] -= 2 * c
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


@dataclass(frozen=True, eq=False)
class Mollifier:
    M: int
    coeffs: tuple
    deriv_polys: tuple = field(repr=False)
    prim: tuple = field(repr=False)
    moments: tuple = field(repr=False)

    @property
    def fingerprint(self):
        payload = json.dumps({"kind": "gauss-poly", "M": self.M,
                              "coeffs": [str(c) for c in self.coeffs]}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def _closed(self, A, sigma, t):
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, -_TAIL, _TAIL)
        with np.errstate(under="ignore"):
            g = np.exp(-tc * tc) * npoly.polyval(tc, sigma) / SQRT_PI
        base = A * erfc(-tc) / 2.0
        out = base + g
        out = np.where(t > _TAIL, A, out)
        out = np.where(t < -_TAIL, 0.0, out)
        return np.where(np.isnan(t), np.nan, out)

    def derivative(self, k, t):
        """rho^(k)(t)."""
        if not 0 <= k < len(self.deriv_polys):
            raise MollifierError(f"derivative order {k} not available")
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, -_TAIL, _TAIL)
        with np.errstate(under="ignore"):
            v = np.exp(-tc * tc) * npoly.polyval(tc, self.deriv_polys[k]) / SQRT_PI
        return np.where(np.abs(t) > _TAIL, 0.0, v)

    def primitive(self, t):
        A, sigma = self.prim
        return self._closed(A, sigma, t)

    def incomplete_moment(self, j, t):
        """I_j(t) = int_{-inf}^t s^j rho(s) ds."""
        if j == 0:
            return self.primitive(t)
        if not 1 <= j <= E.MAX_MOMENT:
            raise MollifierError(f"moment order {j} not available")
        A, sigma = self.moments[j - 1]
        return self._closed(A, sigma, t)

    def __call__(self, t):
        return self.derivative(0, t)

    def check_moments(self, upto=None):
        """Moments of rho by Gauss-Hermite quadrature (exact for these integrands)."""
        upto = self.M if upto is None else upto
        nodes, weights = hermite.hermgauss(64)
        p = npoly.polyval(nodes, [float(c) for c in self._full_poly()])
        return [float(np.sum(weights * nodes ** j * p) / SQRT_PI) for j in range(upto + 1)]

    def _full_poly(self):
        full = [Fraction(0)] * (self.M + 1)
        for i, a in enumerate(self.coeffs):
            full[2 * i] = a
        return full

    def table(self, lo=-12.0, hi=12.0, n=4801):
        """Primitive and incomplete moments on a uniform grid (cache/export format)."""
        t = np.linspace(lo, hi, n)
        data = {"t": t, "R": self.primitive(t)}
        for j in range(1, 7):
            data[f"I{j}"] = self.incomplete_moment(j, t)
        return data

    def describe(self):
        return {"kind": "gauss-poly", "M": self.M, "fingerprint": self.fingerprint,
                "coeffs": [str(c) for c in self.coeffs]}


_BUILT = {}


def build_mollifier(M=4):
    """Gaussian-polynomial kernel with unit mass and vanishing moments 1..M."""
    if not isinstance(M, int) or M < 0 or M % 2:
        raise MollifierError(f"moment order must be an even integer >= 0, got {M}")
    if M > MAX_M:
        raise MollifierError(f"moment order {M} exceeds {MAX_M}: Hankel system too ill-conditioned")
    hit = _BUILT.get(M)
    if hit is not None:
        _write_cache(hit)
        return hit
    n = M // 2 + 1
    hankel = [[gaussian_moment(2 * (r + c)) for c in range(n)] for r in range(n)]
    rhs = [Fraction(1)] + [Fraction(0)] * (n - 1)
    coeffs = tuple(_solve(hankel, rhs))

    full = [Fraction(0)] * (M + 1)
    for i, a in enumerate(coeffs):
        full[2 * i] = a
    polys = [full]
    for _ in range(E.MAX_RHO_ORDER):
        polys.append(_derivative_poly(polys[-1]))
    A, sigma = _gauss_antiderivative(full)
    moms = [_gauss_antiderivative(_poly_mul_t(full, j)) for j in range(1, E.MAX_MOMENT + 1)]

    def floats(p):
        return np.array([float(c) for c in p])

    mol = Mollifier(
        M,
        coeffs,
        tuple(floats(p) for p in polys),
        (float(A), floats(sigma)),
        tuple((float(a), floats(s)) for a, s in moms),
    )
    got = mol.check_moments()
    if abs(got[0] - 1.0) > 1e-10 or any(abs(v) > 1e-9 for v in got[1:]):
        raise MollifierError(f"moment verification failed: {got}")
    _BUILT[M] = mol
    _write_cache(mol)
    return mol


def _write_cache(mol):
    root = os.environ.get("EPSNET_CACHE")
    if not root:
        return None
    path = Path(root) / f"mollifier_M{mol.M}_{mol.fingerprint}.npz"
    if not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(path, **mol.table())
    return path


def cache_path(mol):
    root = os.environ.get("EPSNET_CACHE")
    if not root:
        return None
    return Path(root) / f"mollifier_M{mol.M}_{mol.fingerprint}.npz"


# distribution catalog

_KINDS = ("delta", "heaviside", "xplus", "polynomial", "tensor", "sum")


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    order: int = 0
    coeffs: tuple = ()
    factors: tuple = ()
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unsupported distribution kind {self.kind!r}")
        if self.kind == "delta" and not 0 <= self.order <= 6:
            raise ValueError("delta derivative order must lie in 0..6")
        if self.kind == "xplus" and not 0 <= self.order <= 6:
            raise ValueError("x_+ power must lie in 0..6")
        if self.kind == "tensor":
            for f in self.factors:
                if f.kind in ("tensor", "sum"):
                    raise ValueError("tensor factors must be one-dimensional catalog kinds")

    @property
    def dim(self):
        return len(self.factors) if self.kind == "tensor" else 1

    def describe(self):
        if self.kind in ("delta", "xplus"):
            return f"{self.kind}({self.order})"
        if self.kind == "polynomial":
            return f"polynomial({', '.join(f'{c:g}' for c in self.coeffs)})"
        if self.kind == "tensor":
            return " x ".join(f.describe() for f in self.factors)
        if self.kind == "sum":
            return " + ".join(f"{c:g}*{w.describe()}" for c, w in self.terms)
        return self.kind


def delta(j=0):
    return DistributionSpec("delta", j)


def heaviside():
    return DistributionSpec("heaviside")


def xplus(n):
    return DistributionSpec("xplus", n)


def polynomial(coeffs):
    return DistributionSpec("polynomial", coeffs=tuple(float(c) for c in coeffs))


def tensor(*factors):
    return DistributionSpec("tensor", factors=tuple(factors))


def linear(*terms):
    """sum of c * w over (c, w) pairs."""
    return DistributionSpec("sum", terms=tuple((float(c), w) for c, w in terms))


def _embed_expr(w, axis, mol):
    x = E.var(axis)
    t = E.div(x, E.EPS)
    if w.kind == "delta":
        return E.mul(E.rho(w.order, t), E.pow_(E.EPS, -1 - w.order))
    if w.kind == "heaviside":
        return E.Rho(t)
    if w.kind == "polynomial":
        return E.add(*[E.mul(E.const(c), E.pow_(x, i)) for i, c in enumerate(w.coeffs)])
    if w.kind == "xplus":
        n = w.order
        terms = []
        for j in range(n + 1):
            moment = E.Rho(t) if j == 0 else E.mom(j, t)
            terms.append(E.mul(E.const(comb(n, j) * (-1) ** j), E.pow_(x, n - j),
                               E.pow_(E.EPS, j), moment))
        return E.add(*terms)
    if w.kind == "tensor":
        return E.mul(*[_embed_expr(f, i, mol) for i, f in enumerate(w.factors)])
    if w.kind == "sum":
        return E.add(*[E.mul(E.const(c), _embed_expr(f, axis, mol)) for c, f in w.terms])
    raise ValueError(f"unsupported distribution kind {w.kind!r}")


def _poly_degree(w):
    if w.kind == "polynomial":
        nz = [i for i, c in enumerate(w.coeffs) if c != 0]
        return max(nz) if nz else 0
    if w.kind == "tensor":
        return sum(_poly_degree(f) for f in w.factors)
    if w.kind == "sum":
        return max(_poly_degree(f) for _, f in w.terms)
    return 0


def embed(w, mol=None):
    """Net of the mollified distribution w * rho_eps, in closed form."""
    from .algebra import Net

    mol = mol or build_mollifier()
    dim = w.dim if w.kind != "sum" else max(f.dim for _, f in w.terms)
    e = _embed_expr(w, 0, mol)
    meta = {"embedded": w.describe(), "mollifier": mol.fingerprint}
    deg = _poly_degree(w)
    if w.kind == "polynomial" or deg:
        # moments 1..M vanish, so convolution reproduces polynomials up to degree M
        meta["discrepancy_order"] = None if deg <= mol.M else mol.M + 1
    return Net(e, dim=dim, mollifier=mol, label=f"iota({w.describe()})", meta=meta)
