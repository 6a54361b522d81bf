"""Immutable expression trees over spatial variables and the smoothing parameter eps.

Every generalized-function representative in epsnet is built from these
nodes.  Construction goes through the smart constructors below (``add``,
``mul``, ``pow_`` ...), which apply a small fixed set of local folds so that
structurally equal inputs always produce structurally equal trees.

Node kinds
----------
const, var (spatial index), eps, neg, add (n-ary), sub, mul (n-ary), div,
pow (rational exponent), and the unary functions listed in ``UNARY_FUNCS``
plus the mollifier-bound families ``rho`` (k-th derivative), ``Rho``
(primitive) and ``mom`` (incomplete moment I_j).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DifferentiationError, EvaluationError

UNARY_FUNCS = ("sin", "cos", "exp", "log", "sqrt", "abs", "bump", "step")
MOLLIFIER_FUNCS = ("rho", "Rho", "mom")
# nodes that are not smooth where their argument reaches 0
PIERCING = frozenset({"log", "sqrt", "abs"})

MAX_RHO_ORDER = 16
MAX_MOMENT = 12
RATIONAL_TOL = 1e-12


class Expr:
    __slots__ = ("op", "args", "value", "_hash", "_pierced")

    def __init__(self, op, args=(), value=None):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "_hash", hash((op, self.args, value)))
        pierced = op in PIERCING or (op == "pow" and value.denominator != 1)
        pierced = pierced or any(a._pierced for a in self.args)
        object.__setattr__(self, "_pierced", pierced)

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr) or self._hash != other._hash:
            return False
        return self.op == other.op and self.value == other.value and self.args == other.args

    def __repr__(self):
        return f"Expr({to_text(self)!r})"

    @property
    def pierced(self):
        """True when the tree contains log/sqrt/abs or a non-integer power."""
        return self._pierced

    def is_const(self, v=None):
        return self.op == "const" and (v is None or self.value == v)

    # operator sugar, mostly for tests and internal builders
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, q):
        return pow_(self, q)


def as_expr(v):
    if isinstance(v, Expr):
        return v
    return const(v)


# ---------------------------------------------------------------------------
# smart constructors


def const(v):
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite constant {v}")
    if v == 0.0:
        v = 0.0  # normalise -0.0
    return Expr("const", (), v)


ZERO = const(0.0)
ONE = const(1.0)
EPS = Expr("eps")


def var(i=0):
    return Expr("var", (), int(i))


X = var(0)


def neg(a):
    if a.op == "const":
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def add(*terms):
    flat = []
    for t in terms:
        t = as_expr(t)
        if t.op == "add":
            flat.extend(t.args)
        else:
            flat.append(t)
    c = 0.0
    nc = 0
    rest = []
    for t in flat:
        if t.op == "const":
            c += t.value
            nc += 1
        else:
            rest.append(t)
    if nc and c != 0.0:
        rest.append(const(c))
    if not rest:
        return ZERO if not nc else const(c)
    if len(rest) == 1:
        return rest[0]
    return Expr("add", rest)


def sub(a, b):
    a, b = as_expr(a), as_expr(b)
    if a == b:
        return ZERO
    if b.is_const(0.0):
        return a
    if a.is_const(0.0):
        return neg(b)
    if a.op == "const" and b.op == "const":
        return const(a.value - b.value)
    return Expr("sub", (a, b))


def mul(*factors):
    flat = []
    for f in factors:
        f = as_expr(f)
        if f.op == "mul":
            flat.extend(f.args)
        else:
            flat.append(f)
    c = 1.0
    nc = 0
    rest = []
    for f in flat:
        if f.op == "const":
            c *= f.value
            nc += 1
        else:
            rest.append(f)
    if nc and c == 0.0:
        return ZERO
    if not rest:
        return const(c)
    if c != 1.0:
        rest.insert(0, const(c))
    if len(rest) == 1:
        return rest[0]
    return Expr("mul", rest)


def div(a, b):
    a, b = as_expr(a), as_expr(b)
    if b.op == "const":
        if b.value == 0.0:
            raise EvaluationError("division by literal zero", node=b)
        if b.value == 1.0:
            return a
        if a.op == "const":
            return const(a.value / b.value)
    if a.is_const(0.0):
        return ZERO
    return Expr("div", (a, b))


def to_fraction(q):
    """Exact rational for ``q``; floats are matched by a convergent within 1e-12."""
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, str):
        return Fraction(q)
    q = float(q)
    if not math.isfinite(q):
        raise ValueError(f"non-finite exponent {q}")
    bound = 16
    while True:
        f = Fraction(q).limit_denominator(bound)
        if abs(float(f) - q) <= RATIONAL_TOL or bound > 10**15:
            return f
        bound *= 16


def pow_(a, q):
    a = as_expr(a)
    q = to_fraction(q)
    if q == 0:
        return ONE
    if q == 1:
        return a
    if a.op == "const":
        v = a.value
        if q.denominator == 1:
            if v == 0.0 and q < 0:
                raise EvaluationError("0 raised to a negative power", node=a)
            return const(v ** int(q))
        if v > 0 or (v == 0 and q > 0):
            return const(v ** float(q))
    if a.op == "pow" and q.denominator == 1 and a.value.denominator == 1:
        return pow_(a.args[0], a.value * q)
    return Expr("pow", (a,), q)


_CONST_FOLD = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": lambda v: math.log(v) if v > 0 else None,
    "sqrt": lambda v: math.sqrt(v) if v >= 0 else None,
    "abs": abs,
    "bump": lambda v: math.exp(-1.0 / (1.0 - v * v)) if abs(v) < 1 else 0.0,
}


def func(name, a, k=None):
    """Apply a unary function node; ``k`` is the order for rho/mom."""
    a = as_expr(a)
    if name in MOLLIFIER_FUNCS:
        if name == "rho":
            if not 0 <= k <= MAX_RHO_ORDER:
                raise ValueError(f"rho order {k} out of range")
            return Expr("rho", (a,), int(k))
        if name == "mom":
            if not 1 <= k <= MAX_MOMENT:
                raise ValueError(f"moment order {k} out of range")
            return Expr("mom", (a,), int(k))
        return Expr("Rho", (a,))
    if name not in UNARY_FUNCS:
        raise ValueError(f"unknown function {name}")
    if a.op == "const" and name in _CONST_FOLD:
        try:
            v = _CONST_FOLD[name](a.value)
        except OverflowError:
            v = None
        if v is not None and math.isfinite(v):
            return const(v)
    if name == "abs" and a.op == "abs":
        return a
    return Expr(name, (a,))


def sin(a):
    return func("sin", a)


def cos(a):
    return func("cos", a)


def exp(a):
    return func("exp", a)


def log(a):
    return func("log", a)


def sqrt(a):
    return func("sqrt", a)


def abs_(a):
    return func("abs", a)


def bump(a):
    return func("bump", a)


def step(a):
    return func("step", a)


def rho(k, a):
    return func("rho", a, k)


def Rho(a):
    return func("Rho", a)


def mom(j, a):
    return func("mom", a, j)


def norm2(dim):
    """Squared Euclidean norm x1^2 + ... + xd^2 as an expression."""
    return add(*[pow_(var(i), 2) for i in range(dim)])


def norm(dim):
    if dim == 1:
        return abs_(X)
    return sqrt(norm2(dim))


# ---------------------------------------------------------------------------
# structural queries


def walk(e):
    stack = [e]
    seen = set()
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        yield n
        stack.extend(n.args)


def uses_mollifier(e):
    return any(n.op in MOLLIFIER_FUNCS for n in walk(e))


def max_var(e):
    return max((n.value for n in walk(e) if n.op == "var"), default=-1)


def has_eps(e):
    return any(n.op == "eps" for n in walk(e))


@lru_cache(maxsize=200_000)
def depends_on(e, axis):
    if e.op == "var":
        return e.value == axis
    return any(depends_on(a, axis) for a in e.args)


def substitute(e, mapping):
    """Replace var(i) by ``mapping[i]`` everywhere (composition on representatives)."""
    memo = {}

    def go(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        if n.op == "var":
            r = mapping.get(n.value, n)
        elif n.op in ("const", "eps"):
            r = n
        else:
            r = rebuild(n, [go(a) for a in n.args])
        memo[n] = r
        return r

    return go(e)


def substitute_eps(e, value):
    memo = {}

    def go(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        if n.op == "eps":
            r = value
        elif not n.args:
            r = n
        else:
            r = rebuild(n, [go(a) for a in n.args])
        memo[n] = r
        return r

    return go(as_expr(e))


def rebuild(n, args):
    """Re-run the smart constructor of ``n`` on new children."""
    op = n.op
    if op == "add":
        return add(*args)
    if op == "mul":
        return mul(*args)
    if op == "sub":
        return sub(*args)
    if op == "div":
        return div(*args)
    if op == "neg":
        return neg(args[0])
    if op == "pow":
        return pow_(args[0], n.value)
    if op in ("rho", "mom"):
        return func(op, args[0], n.value)
    return func(op, args[0])


# ---------------------------------------------------------------------------
# printing


_ATOMIC = {"var", "eps"} | set(UNARY_FUNCS) | set(MOLLIFIER_FUNCS)


def _fmt_const(v):
    s = repr(float(v))
    return s


def _var_name(i, dim):
    if dim == 1 and i == 0:
        return "x"
    return f"x{i + 1}"


def to_text(e, dim=None):
    """Render ``e`` in the input grammar; ``parse(to_text(e), d) == e``."""
    if dim is None:
        dim = max(1, max_var(e) + 1)
        if dim == 1:
            dim = 1

    def wrap(n):
        s = go(n)
        if n.op in _ATOMIC or (n.op == "const" and n.value >= 0):
            return s
        return f"({s})"

    def go(n):
        op = n.op
        if op == "const":
            return _fmt_const(n.value)
        if op == "var":
            return _var_name(n.value, dim)
        if op == "eps":
            return "eps"
        if op == "neg":
            return f"-{wrap(n.args[0])}"
        if op == "add":
            return " + ".join(wrap(a) for a in n.args)
        if op == "sub":
            return f"{wrap(n.args[0])} - {wrap(n.args[1])}"
        if op == "mul":
            return " * ".join(wrap(a) for a in n.args)
        if op == "div":
            return f"{wrap(n.args[0])} / {wrap(n.args[1])}"
        if op == "pow":
            q = n.value
            if q.denominator == 1:
                qs = str(q.numerator)
            else:
                qs = f"({q.numerator}/{q.denominator})"
            return f"{wrap(n.args[0])}^{qs}"
        if op == "rho":
            return f"rho{n.value}({go(n.args[0])})"
        if op == "mom":
            return f"I{n.value}({go(n.args[0])})"
        return f"{op}({go(n.args[0])})"

    return go(e)


# ---------------------------------------------------------------------------
# differentiation

# integral of bump over [-1, 1]; the step node is its normalised primitive
BUMP_MASS = 0.44399381616807943


def differentiate(e, axis, domain="pierced"):
    """Exact symbolic partial derivative along ``axis``.

    On a whole-space domain, differentiating ``abs`` or a non-integer power
    whose argument depends on ``axis`` is rejected.
    """
    memo = {}

    def d(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        r = _d(n)
        memo[n] = r
        return r

    def _d(n):
        if not depends_on(n, axis):
            return ZERO
        op = n.op
        if op == "var":
            return ONE
        if op == "neg":
            return neg(d(n.args[0]))
        if op == "add":
            return add(*[d(a) for a in n.args])
        if op == "sub":
            return sub(d(n.args[0]), d(n.args[1]))
        if op == "mul":
            terms = []
            for i, a in enumerate(n.args):
                da = d(a)
                if da.is_const(0.0):
                    continue
                terms.append(mul(*n.args[:i], da, *n.args[i + 1:]))
            return add(*terms)
        if op == "div":
            a, b = n.args
            if not depends_on(b, axis):
                return mul(d(a), pow_(b, -1))
            return div(sub(mul(d(a), b), mul(a, d(b))), pow_(b, 2))
        a = n.args[0]
        da = d(a)
        if op == "pow":
            q = n.value
            if q.denominator != 1 and domain == "whole":
                raise DifferentiationError(
                    f"non-integer power {to_text(n)} is not differentiable on the whole space"
                )
            return mul(const(float(q)), pow_(a, q - 1), da)
        if op == "sin":
            return mul(cos(a), da)
        if op == "cos":
            return neg(mul(sin(a), da))
        if op == "exp":
            return mul(n, da)
        if op == "log":
            return div(da, a)
        if op == "sqrt":
            return div(da, mul(const(2.0), n))
        if op == "abs":
            if domain == "whole":
                raise DifferentiationError(f"abs is not differentiable on the whole space: {to_text(n)}")
            return mul(da, div(a, n))
        if op == "bump":
            return mul(n, const(-2.0), a, pow_(sub(ONE, pow_(a, 2)), -2), da)
        if op == "step":
            return mul(const(1.0 / BUMP_MASS), bump(a), da)
        if op == "rho":
            return mul(rho(n.value + 1, a), da)
        if op == "Rho":
            return mul(rho(0, a), da)
        if op == "mom":
            return mul(pow_(a, n.value), rho(0, a), da)
        raise DifferentiationError(f"cannot differentiate node {op}")

    return d(e)


def derivative(e, multi_index, domain="pierced"):
    for axis, count in enumerate(multi_index):
        for _ in range(count):
            e = differentiate(e, axis, domain)
    return e


# ---------------------------------------------------------------------------
# evaluation

_GL_STEP_NODES, _GL_STEP_WEIGHTS = np.polynomial.legendre.leggauss(80)


def _bump_np(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti * ti))
    return out


def _step_lower(s):
    # int_{-1}^{s} bump / BUMP_MASS for s in (-1, 0]
    half = 0.5 * (s + 1.0)
    nodes = -1.0 + half[:, None] * (_GL_STEP_NODES[None, :] + 1.0)
    return half * (_bump_np(nodes) @ _GL_STEP_WEIGHTS) / BUMP_MASS


def _step_np(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    out[s >= 1.0] = 1.0
    lo = (s > -1.0) & (s <= 0.0)
    hi = (s > 0.0) & (s < 1.0)
    if lo.any():
        out[lo] = _step_lower(s[lo])
    if hi.any():
        out[hi] = 1.0 - _step_lower(-s[hi])
    nan = np.isnan(s)
    out[nan] = np.nan
    return out


class _EvalContext:
    __slots__ = ("violations",)

    def __init__(self):
        self.violations = []

    def flag(self, node, mask):
        if np.any(mask):
            self.violations.append((node, int(np.argmax(mask))))


def evaluate_array(e, points, eps, mollifier=None):
    """Vectorised evaluation at ``points`` (shape (n, d) or (n,)) for one eps.

    Domain violations produce NaN internally; a product containing an exact
    zero factor is zero regardless of the other factors, so smooth cutoffs
    annihilate singular factors they vanish on.  Any NaN surviving to the
    root raises :class:`EvaluationError` carrying the offending node.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if not (0.0 < eps <= 1.0):
        raise EvaluationError(f"eps={eps} outside (0, 1]")
    ctx = _EvalContext()
    n = pts.shape[0]
    memo = {}

    def ev(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        r = _ev(node)
        memo[node] = r
        return r

    def _ev(node):
        op = node.op
        if op == "const":
            return np.full(n, node.value)
        if op == "var":
            if node.value >= pts.shape[1]:
                raise EvaluationError(f"variable x{node.value + 1} outside dimension", node=node)
            return pts[:, node.value]
        if op == "eps":
            return np.full(n, float(eps))
        if op == "add":
            acc = ev(node.args[0])
            for a in node.args[1:]:
                acc = acc + ev(a)
            return acc
        if op == "sub":
            return ev(node.args[0]) - ev(node.args[1])
        if op == "neg":
            return -ev(node.args[0])
        if op == "mul":
            vals = [ev(a) for a in node.args]
            acc = vals[0]
            zero = vals[0] == 0.0
            for v in vals[1:]:
                acc = acc * v
                zero |= v == 0.0
            if zero.any():
                acc = np.where(zero, 0.0, acc)
            return acc
        if op == "div":
            a = ev(node.args[0])
            b = ev(node.args[1])
            bad = (b == 0.0) & ~(np.isnan(a))
            ctx.flag(node, bad & (a != 0.0))
            ctx.flag(node, bad & (a == 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(b == 0.0, np.nan, a / np.where(b == 0.0, 1.0, b))
            r = np.where((a == 0.0) & (b != 0.0), 0.0, r)
            r = np.where((a == 0.0) & np.isnan(b), 0.0, r)
            return r
        a = ev(node.args[0])
        if op == "pow":
            q = node.value
            if q.denominator == 1:
                k = int(q)
                if k < 0:
                    bad = a == 0.0
                    ctx.flag(node, bad)
                    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                        r = np.where(bad, np.nan, np.power(np.where(bad, 1.0, a), float(k)))
                    return r
                with np.errstate(over="ignore", invalid="ignore"):
                    return a ** k
            bad = (a < 0.0) | ((a == 0.0) & (q < 0))
            ctx.flag(node, bad)
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                return np.where(bad, np.nan, np.power(np.where(bad, 1.0, a), float(q)))
        if op == "sin":
            return np.sin(a)
        if op == "cos":
            return np.cos(a)
        if op == "exp":
            with np.errstate(over="ignore"):
                return np.exp(a)
        if op == "log":
            bad = a <= 0.0
            ctx.flag(node, bad)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(bad, np.nan, np.log(np.where(bad, 1.0, a)))
        if op == "sqrt":
            bad = a < 0.0
            ctx.flag(node, bad)
            return np.where(bad, np.nan, np.sqrt(np.where(bad, 0.0, a)))
        if op == "abs":
            return np.abs(a)
        if op == "bump":
            r = _bump_np(np.nan_to_num(a, nan=0.0))
            return np.where(np.isnan(a), np.nan, r)
        if op == "step":
            return _step_np(a)
        if op in MOLLIFIER_FUNCS:
            if mollifier is None:
                raise EvaluationError(f"{op} requires a mollifier handle", node=node)
            if op == "rho":
                return mollifier.derivative(node.value, a)
            if op == "Rho":
                return mollifier.primitive(a)
            return mollifier.incomplete_moment(node.value, a)
        raise EvaluationError(f"unknown node {op}", node=node)

    out = np.asarray(ev(e), dtype=float)
    if out.shape != (n,):
        out = np.broadcast_to(out, (n,)).copy()
    nan = np.isnan(out)
    if nan.any():
        idx = int(np.argmax(nan))
        culprit = ctx.violations[0][0] if ctx.violations else e
        raise EvaluationError(
            f"domain violation in {to_text(culprit)} at point {pts[idx].tolist()}, eps={eps}",
            node=culprit,
            location=pts[idx].tolist(),
        )
    return out


class VarBinding:
    """A spatial point together with a value of eps in (0, 1]."""

    __slots__ = ("point", "eps")

    def __init__(self, point, eps):
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        if not (0.0 < eps <= 1.0):
            raise ValueError(f"eps must lie in (0, 1], got {eps}")
        self.point = pt
        self.eps = float(eps)


def evaluate(e, binding, mollifier=None, dim=None):
    if dim is not None and binding.point.shape[0] != dim:
        raise EvaluationError(f"binding has {binding.point.shape[0]} coordinates, expected {dim}")
    if max_var(e) >= binding.point.shape[0]:
        raise EvaluationError("binding dimension smaller than expression dimension")
    return float(evaluate_array(e, binding.point[None, :], binding.eps, mollifier)[0])
