import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epsnet import expr as E
from epsnet.errors import DimensionMismatch, ExprSyntaxError, UnknownIdentifier
from epsnet.normal import equivalent, is_zero
from epsnet.parse import parse

from helpers import fd_agreement, random_expr


def ev(text, x, eps=0.1, dim=1):
    pts = np.atleast_2d(np.asarray(x, dtype=float)).reshape(-1, dim)
    return E.evaluate_array(parse(text, dim), pts, eps)


def test_precedence_and_unary_minus():
    assert ev("1 + 2*3^2", [0.0])[0] == 19.0
    # unary minus binds to the base, so the exponent applies to -x
    assert ev("-x^2", [3.0])[0] == 9.0
    assert ev("-(x^2)", [3.0])[0] == -9.0
    assert ev("2^-1", [0.0])[0] == 0.5
    assert ev("x^(1/2)", [4.0])[0] == pytest.approx(2.0)


def test_eps_and_variables():
    assert ev("eps^-1 * x", [0.5], eps=0.25)[0] == 2.0
    assert ev("x1*x2 + x2^2", [[2.0, 3.0]], dim=2)[0] == 15.0


def test_bump_is_compactly_supported():
    vals = ev("bump(x)", [-1.0, -0.999, 0.0, 1.0, 1.5])
    assert vals[0] == 0.0 and vals[-1] == 0.0 and vals[-2] == 0.0
    assert vals[2] == pytest.approx(math.exp(-1))
    assert 0 < vals[1] < 1e-200 or vals[1] == 0.0


def test_step_is_smooth_switch():
    vals = ev("step(x)", [-2.0, -1.0, 0.0, 1.0, 3.0])
    assert vals[0] == 0.0 and vals[1] == 0.0
    assert vals[2] == pytest.approx(0.5)
    assert vals[3] == pytest.approx(1.0) and vals[4] == 1.0


@pytest.mark.parametrize(
    "src, offset",
    [("x^^2", 2), ("sin(x", 5), ("1 +", 3), ("x ) ", 2), ("2 3", 2)],
)
def test_syntax_errors_carry_offset(src, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(src)
    assert info.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse("tan(x)")
    with pytest.raises(UnknownIdentifier):
        parse("y + 1")


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        parse("x3", 2)
    with pytest.raises((DimensionMismatch, UnknownIdentifier)):
        parse("x", 2)


def test_log_domain_is_pierced():
    assert parse("log(abs(x))").pierced
    assert parse("abs(x)^(1/2)").pierced
    assert not parse("x^2 + sin(x)").pierced


def test_symbolic_rules():
    x = E.X
    assert equivalent(E.derivative(parse("x^3"), (1,)), parse("3*x^2"))
    assert equivalent(E.derivative(parse("sin(eps*x)"), (1,)), parse("eps*cos(eps*x)"))
    assert is_zero(E.derivative(parse("eps^2 + 3"), (1,)))
    d2 = E.derivative(parse("x1^2*x2", 2), (1, 1))
    assert equivalent(d2, parse("2*x1", 2))
    assert equivalent(E.derivative(x / parse("1 + eps"), (1,)), parse("(1 + eps)^-1"))


def test_symbolic_derivative_matches_finite_differences():
    assert fd_agreement(np.random.default_rng(7), 50) <= 1e-6
    assert fd_agreement(np.random.default_rng(8), 20, dim=2) <= 1e-6


def test_substitute():
    e = E.substitute(parse("x^2 + x"), {0: parse("2*x")})
    assert ev(E.to_text(e), [1.5])[0] == pytest.approx(12.0)


_exprs = st.integers(0, 10_000).map(lambda s: random_expr(np.random.default_rng(s), 3))


@settings(max_examples=80, deadline=None)
@given(_exprs, st.floats(-0.9, 0.9), st.floats(0.01, 1.0))
def test_text_round_trip(e, x, eps):
    back = parse(E.to_text(e))
    a = E.evaluate_array(e, np.array([[x]]), eps)[0]
    b = E.evaluate_array(back, np.array([[x]]), eps)[0]
    assert b == pytest.approx(a, rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(_exprs)
def test_round_trip_is_a_fixed_point(e):
    once = E.to_text(e)
    assert E.to_text(parse(once)) == once


def test_normal_form_identities():
    assert is_zero(parse("(x + eps)^2 - x^2 - 2*eps*x - eps^2"))
    assert is_zero(parse("abs(x)^3 - x^2*abs(x)"))
    assert is_zero(parse("((3*x1)^2 + (3*x2)^2)^(1/2) - 3*(x1^2 + x2^2)^(1/2)", 2))
    assert not is_zero(parse("x^2 - x"))
