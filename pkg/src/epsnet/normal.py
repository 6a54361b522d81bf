"""Exact zero recognition by expansion into a canonical Laurent-polynomial form.

The rewrite set is fixed and deliberately small:

* constant folding with exact rational coefficients; a float constant that
  is the correctly rounded value of a rational with denominator <= 1e6 is
  taken to be that rational (so 3^-1 cancels against 1/3);
* expansion of sums, products and non-negative integer powers (x - x -> 0,
  0 * e -> 0, commutativity and associativity come out of the canonical
  ordering);
* monomials over atoms with rational exponents, so x^a * x^b = x^(a+b);
* ``abs`` of a single term distributes over its factors, ``abs(a)^2 = a^2``
  and ``eps``, ``exp``, ``bump``, ``step`` and fractional powers count as
  non-negative.

Anything else (functions of non-constant arguments, inverses of sums) is an
opaque atom keyed by the canonical form of its argument.  ``is_zero`` never
claims non-vanishing: a False answer only means the rewrites did not reach 0.
"""

import math
from fractions import Fraction

from . import expr as E

MAX_TERMS = 4000
_MAX_EXPAND_POWER = 16
_NONNEG = {"exp", "bump", "step"}


class _TooBig(Exception):
    pass


def _key(obj):
    return repr(obj)


def _mono(items):
    """Canonical monomial tuple from {atom: exponent}."""
    return tuple(sorted(((a, p) for a, p in items.items() if p != 0), key=_key))


def _nf_key(nf):
    return tuple(sorted(nf.items(), key=_key))


def _exact(v):
    """A float that is the correctly rounded value of a small rational becomes that rational."""
    if isinstance(v, Fraction):
        return v
    f = Fraction(v)
    if f.denominator > 1:
        g = f.limit_denominator(10**6)
        if float(g) == v:
            return g
    return f


def _const_nf(c):
    c = _exact(c)
    return {(): c} if c != 0 else {}


def _atom_nf(atom, p=Fraction(1)):
    return _canon({atom: Fraction(p)}, Fraction(1))


def _add(a, b):
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + c
        if v == 0:
            out.pop(m, None)
        else:
            out[m] = v
    return out


def _scale(a, s):
    if s == 0:
        return {}
    return {m: c * s for m, c in a.items()}


def _mul(a, b):
    if len(a) * len(b) > MAX_TERMS:
        raise _TooBig
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            exps = dict(ma)
            for atom, p in mb:
                exps[atom] = exps.get(atom, 0) + p
            for m, c in _canon(exps, ca * cb).items():
                v = out.get(m, 0) + c
                if v == 0:
                    out.pop(m, None)
                else:
                    out[m] = v
    return out


def _single(nf):
    if len(nf) == 1:
        (m, c), = nf.items()
        return m, c
    return None


def _abs_of_var(atom):
    """Index i when ``atom`` is abs(x_i), else None."""
    if atom[0] != "abs" or len(atom[1]) != 1:
        return None
    mono, c = atom[1][0]
    if c != 1 or len(mono) != 1:
        return None
    (inner, p), = mono
    if inner[0] == "x" and p == 1:
        return inner[1]
    return None


def _canon(exps, coef):
    """Reduce abs atoms with integer exponents; returns a normal form.

    An even power of x_i next to a fractional power of abs(x_i) is folded
    into the latter, so x^2 * abs(x)^(-3/2) becomes abs(x)^(1/2).
    """
    exps = {a: p for a, p in exps.items() if p != 0}
    for atom, p in list(exps.items()):
        i = _abs_of_var(atom)
        if i is None or p.denominator == 1:
            continue
        xp = exps.get(("x", i))
        if xp is not None and xp.denominator == 1 and int(xp) % 2 == 0:
            exps[atom] = p + xp
            del exps[("x", i)]
    for atom, p in list(exps.items()):
        if atom[0] == "abs" and p.denominator == 1:
            inner = dict(atom[1])
            n = int(p)
            keep = n % 2
            rest = n - keep
            s = _single(inner)
            if rest == 0:
                continue
            if s is None and rest < 0:
                continue
            del exps[atom]
            if keep:
                exps[atom] = Fraction(1)
            base = _mul({_mono(exps): coef}, _pow_int(inner, rest))
            return base
    return {_mono(exps): coef}


def _content(nf):
    """Split a sum as c * P with the leading coefficient of P equal to 1 (c > 0 only)."""
    lead = _nf_key(nf)[0][1]
    if lead > 0:
        return lead, _scale(nf, 1 / lead)
    return Fraction(1), nf


def _poly_power(nf, q):
    c, p = _content(nf)
    atom = _atom_nf(("poly", _nf_key(p)), q)
    if c == 1:
        return atom
    cq = c ** q if q.denominator == 1 else _exact(float(c) ** float(q))
    return _scale(atom, cq)


def _pow_int(nf, n):
    if n == 0:
        return _const_nf(1)
    if n < 0:
        s = _single(nf)
        if s is None:
            return _poly_power(nf, Fraction(n))
        m, c = s
        return _canon({a: p * n for a, p in m}, c ** n)
    if n > _MAX_EXPAND_POWER:
        raise _TooBig
    out = _const_nf(1)
    for _ in range(n):
        out = _mul(out, nf)
    return out


def _pow(nf, q):
    if q.denominator == 1:
        return _pow_int(nf, int(q))
    if not nf:
        return {} if q > 0 else _atom_nf(("poly", ()), q)
    s = _single(nf)
    if s is not None:
        m, c = s
        if c > 0:
            cq = _exact(float(c) ** float(q))
            if m == ():
                return _const_nf(cq)
            return _canon({a: p * q for a, p in m}, cq)
    return _poly_power(nf, q)


def _is_nonneg_factor(atom, p):
    if p.denominator != 1:
        return True
    if int(p) % 2 == 0:
        return True
    kind = atom[0]
    return kind in ("eps", "abs") or (kind == "fn" and atom[1] in _NONNEG)


def _abs(nf):
    if not nf:
        return {}
    s = _single(nf)
    if s is None:
        return _atom_nf(("abs", _nf_key(nf)))
    m, c = s
    out = _const_nf(abs(c))
    for atom, p in m:
        if _is_nonneg_factor(atom, p):
            out = _mul(out, _atom_nf(atom, p))
        else:
            inner = {((atom, Fraction(1)),): Fraction(1)}
            out = _mul(out, _atom_nf(("abs", _nf_key(inner)), p))
    return out


def _fold(name, arg, order):
    (m, c), = arg.items() if arg else (((), Fraction(0)),)
    v = float(c)
    try:
        if name == "sin":
            r = math.sin(v)
        elif name == "cos":
            r = math.cos(v)
        elif name == "exp":
            r = math.exp(v)
        elif name == "log":
            r = math.log(v) if v > 0 else None
        elif name == "sqrt":
            r = math.sqrt(v) if v >= 0 else None
        elif name == "bump":
            r = math.exp(-1.0 / (1.0 - v * v)) if abs(v) < 1 else 0.0
        else:
            r = None
    except OverflowError:
        r = None
    if r is None or not math.isfinite(r):
        return None
    return _const_nf(r)


def normal_form(e):
    memo = {}

    def go(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        r = _go(n)
        memo[n] = r
        return r

    def _go(n):
        op = n.op
        if op == "const":
            return _const_nf(n.value)
        if op == "var":
            return _atom_nf(("x", n.value))
        if op == "eps":
            return _atom_nf(("eps",))
        if op == "neg":
            return _scale(go(n.args[0]), -1)
        if op == "add":
            out = {}
            for a in n.args:
                out = _add(out, go(a))
            return out
        if op == "sub":
            return _add(go(n.args[0]), _scale(go(n.args[1]), -1))
        if op == "mul":
            out = _const_nf(1)
            for a in n.args:
                out = _mul(out, go(a))
                if not out:
                    return {}
            return out
        if op == "div":
            num = go(n.args[0])
            if not num:
                return {}
            return _mul(num, _pow(go(n.args[1]), Fraction(-1)))
        if op == "pow":
            return _pow(go(n.args[0]), n.value)
        arg = go(n.args[0])
        if op == "abs":
            return _abs(arg)
        if op == "sqrt":
            return _pow(arg, Fraction(1, 2))
        is_const = not arg or (len(arg) == 1 and () in arg)
        if is_const and op in ("sin", "cos", "exp", "log", "bump"):
            folded = _fold(op, arg, n.value)
            if folded is not None:
                return folded
        return _atom_nf(("fn", op, n.value, _nf_key(arg)))

    return go(e)


def is_zero(e):
    """True only if ``e`` reduces to the literal 0 under the rewrite set."""
    if e.is_const(0.0):
        return True
    try:
        return not normal_form(e)
    except _TooBig:
        return False


def equivalent(a, b):
    return is_zero(E.sub(a, b))
