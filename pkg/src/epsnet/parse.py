"""Recursive-descent parser for the expression language.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := base ("^" signed_rational)?
    base   := number | "eps" | var | fn "(" expr ("," expr)* ")" | "(" expr ")" | "-" base
    signed_rational := ["-"] number | "(" ["-"] number ["/" number] ")"
    var    := "x" (d = 1) | "x1" .. "x9"
    fn     := sin cos exp log sqrt abs bump step rho0..rho16 Rho I1..I12

``step`` and ``I<j>`` extend the base function set: ``step`` is the
normalised primitive of ``bump`` used for smooth cutoffs, ``I<j>`` the
incomplete j-th moment of the active mollifier.
"""

import re
from fractions import Fraction

from . import expr as E
from .errors import DimensionMismatch, ExprSyntaxError, UnknownIdentifier

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def tokenize(src):
    pos = 0
    out = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos,
                                  ["number", "identifier", "operator"])
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


_RHO = re.compile(r"rho(\d+)$")
_MOM = re.compile(r"I(\d+)$")
_VAR = re.compile(r"x(\d*)$")


class _Parser:
    def __init__(self, src, dim):
        self.src = src
        self.dim = dim
        self.toks = tokenize(src)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        t = self.tok
        if t[1] != value or t[0] not in ("op",):
            raise ExprSyntaxError(f"unexpected {t[1] or 'end of input'!r}", t[2], [repr(value)])
        return self.take()

    def parse(self):
        e = self.expr()
        t = self.tok
        if t[0] != "end":
            raise ExprSyntaxError(f"unexpected {t[1]!r}", t[2], ["'+'", "'-'", "'*'", "'/'", "end of input"])
        return e

    def expr(self):
        e = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            e = E.add(e, rhs) if op == "+" else E.sub(e, rhs)
        return e

    def term(self):
        e = self.factor()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.take()[1]
            rhs = self.factor()
            e = E.mul(e, rhs) if op == "*" else E.div(e, rhs)
        return e

    def factor(self):
        b = self.base()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.take()
            q = self.signed_rational()
            return E.pow_(b, q)
        return b

    def number(self):
        t = self.tok
        if t[0] != "num":
            raise ExprSyntaxError(f"unexpected {t[1] or 'end of input'!r}", t[2], ["number"])
        self.take()
        return t[1]

    def signed_rational(self):
        t = self.tok
        if t[0] == "op" and t[1] == "(":
            self.take()
            sign = 1
            if self.tok[1] == "-" and self.tok[0] == "op":
                self.take()
                sign = -1
            num = Fraction(self.number())
            if self.tok[0] == "op" and self.tok[1] == "/":
                self.take()
                den = Fraction(self.number())
                if den == 0:
                    raise ExprSyntaxError("zero denominator in exponent", self.tok[2])
                num = num / den
            self.expect(")")
            return sign * num
        sign = 1
        if t[0] == "op" and t[1] == "-":
            self.take()
            sign = -1
        if self.tok[0] != "num":
            raise ExprSyntaxError(f"unexpected {self.tok[1] or 'end of input'!r}", self.tok[2],
                                  ["number", "'-'", "'('"])
        return sign * Fraction(self.number())

    def base(self):
        t = self.tok
        kind, text, pos = t
        if kind == "num":
            self.take()
            return E.const(float(text))
        if kind == "op" and text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if kind == "op" and text == "-":
            self.take()
            return E.neg(self.base())
        if kind == "ident":
            self.take()
            if text == "eps":
                return E.EPS
            vm = _VAR.match(text)
            if vm:
                return self.variable(vm.group(1), pos)
            return self.call(text, pos)
        raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", pos,
                              ["number", "'eps'", "variable", "function", "'('", "'-'"])

    def variable(self, digits, pos):
        if digits == "":
            if self.dim != 1:
                raise DimensionMismatch(f"bare 'x' used in dimension {self.dim} (offset {pos})")
            return E.var(0)
        i = int(digits)
        if not 1 <= i <= 9:
            raise UnknownIdentifier(f"unknown variable x{digits}", pos)
        if i > self.dim:
            raise DimensionMismatch(f"variable x{i} exceeds dimension {self.dim} (offset {pos})")
        return E.var(i - 1)

    def call(self, name, pos):
        k = None
        m = _RHO.match(name)
        mm = _MOM.match(name)
        if m:
            k = int(m.group(1))
            kind = "rho"
            if k > E.MAX_RHO_ORDER:
                raise UnknownIdentifier(f"unknown function {name}", pos)
        elif mm:
            k = int(mm.group(1))
            kind = "mom"
            if not 1 <= k <= E.MAX_MOMENT:
                raise UnknownIdentifier(f"unknown function {name}", pos)
        elif name in E.UNARY_FUNCS or name == "Rho":
            kind = name
        else:
            raise UnknownIdentifier(f"unknown identifier {name!r}", pos)
        self.expect("(")
        args = [self.expr()]
        while self.tok[0] == "op" and self.tok[1] == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        if len(args) != 1:
            raise ExprSyntaxError(f"{name} takes exactly one argument", pos)
        return E.func(kind, args[0], k)


def parse(source, dimension=1):
    """Parse ``source`` into an :class:`Expr` over ``dimension`` spatial variables."""
    if dimension < 1:
        raise DimensionMismatch("dimension must be positive")
    return _Parser(source, dimension).parse()
