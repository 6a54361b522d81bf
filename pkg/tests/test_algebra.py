import math

import numpy as np
import pytest

from epsnet import expr as E
from epsnet.algebra import (
    GenNumber,
    GenPoint,
    Net,
    combine,
    compose,
    const_net,
    derive,
    equals,
    eval_point,
    nonneg_consistent,
    scale,
    strictly_positive,
    structural_zero,
    translate,
    zero_net,
)
from epsnet.asymptotics import DEFAULT_GRID, CompactSet
from epsnet.embedding import delta, embed, heaviside
from epsnet.errors import CBoundednessViolation
from epsnet.normal import is_zero

G = DEFAULT_GRID
I1 = CompactSet.interval(-1, 1)
SPIKE = "eps^-1 * bump((x - eps)/eps)"


def net(text, dim=1, **kw):
    return Net.from_text(text, dim, **kw)


def test_difference_drops_the_common_part():
    d = combine(net("x^2 + eps"), net("x^2"), "sub")
    assert is_zero(E.sub(d.expr, E.EPS))


def test_scale_by_generalized_constant():
    u = scale(net("x^3"), GenNumber.of("2 + eps"))
    assert is_zero(E.sub(u.expr, E.mul(E.add(E.const(2.0), E.EPS), E.pow_(E.X, 3))))


def test_overrides_merge_by_union():
    a = net("x", overrides={"6": "0"})
    b = net("1", overrides={"8": "2"})
    s = combine(a, b, "add")
    assert [k for k, _ in s.overrides] == [6, 8]
    assert s.evaluate(6, np.array([[0.5]]), G.eps_at(6))[0] == 1.0
    assert s.evaluate(8, np.array([[0.5]]), G.eps_at(8))[0] == 2.5
    assert s.evaluate(7, np.array([[0.5]]), G.eps_at(7))[0] == 1.5


def test_spike_is_not_zero():
    v = equals(net(SPIKE), zero_net(), [CompactSet.interval(-2, 2)])
    assert v.outcome == "Fails" and v.slope == pytest.approx(-1.0, abs=0.1)


def test_equals_self_is_exact():
    u = net("sin(x/eps)*exp(-x^2)")
    assert equals(u, u).outcome == "ExactZero"


def test_drift_is_not_the_embedded_parabola():
    v = equals(net("x^2 + eps"), net("x^2"), [I1], 2)
    assert v.outcome == "Fails" and v.slope == pytest.approx(1.0, abs=0.1)


def test_equals_is_symmetric():
    a, b = net("x + eps^3"), net("x")
    assert str(equals(a, b, [I1], 2)) == str(equals(b, a, [I1], 2))


@pytest.mark.parametrize("x", [-1.0, 0.0, 1.0, 2.0])
def test_spike_vanishes_at_standard_points(x):
    vals = eval_point(net(SPIKE), GenPoint.standard(x)).on(G)
    half = len(G) // 2
    assert not np.any(vals[half:])


def test_spike_at_generalized_point():
    p = GenPoint((GenNumber.of("eps"),))
    vals = eval_point(net(SPIKE), p).on(G)
    assert np.allclose(vals * G.eps, math.exp(-1), rtol=1e-14)


def test_constant_at_any_point():
    vals = eval_point(const_net(5.0), GenPoint((GenNumber.of("eps^2 - 0.3"),))).on(G)
    assert np.all(vals == 5.0)


def test_point_container_is_checked():
    p = GenPoint((GenNumber.of("1/eps"),), CompactSet.interval(-2, 2))
    with pytest.raises(ValueError):
        p.on(G)


def test_eval_point_commutes_with_combine():
    u, v = net("sin(x) + eps"), net("x^2*exp(-eps)")
    p = GenPoint((GenNumber.of("0.5 + eps"),))
    lhs = eval_point(combine(u, v, "mul"), p).on(G)
    rhs = eval_point(u, p).on(G) * eval_point(v, p).on(G)
    # products are flattened, so only the association order of roundings differs
    assert np.allclose(lhs, rhs, rtol=1e-15, atol=0)


def test_nonnegativity_examples():
    assert nonneg_consistent(GenNumber.of("eps^2"), 12).passed
    assert not nonneg_consistent(GenNumber.of("-(eps^2)"), 3).passed
    assert nonneg_consistent(GenNumber.of("-exp(-1/eps)"), 12).passed


def test_strict_positivity_witness():
    assert strictly_positive(GenNumber.of("eps^2")).order == 3
    assert strictly_positive(GenNumber.of("1")).order == 1
    assert not strictly_positive(GenNumber.of("exp(-1/eps)")).passed


def test_compose_with_dilation():
    u = net("sin(x) + eps*x")
    out = compose(u, net("2*x"), I1)
    ref = u.evaluate(9, np.array([[0.6]]), G.eps_at(9))[0]
    assert out.evaluate(9, np.array([[0.3]]), G.eps_at(9))[0] == pytest.approx(ref, rel=1e-15)


def test_compose_checks_c_boundedness():
    inv = net("abs(x)^-1")
    shifted = compose(inv, net("x + 3"), I1)
    assert shifted.evaluate(10, np.array([[-1.0]]), G.eps_at(10))[0] == pytest.approx(0.5)
    with pytest.raises(CBoundednessViolation) as info:
        compose(inv, net("x"), I1)
    assert info.value.eps is not None
    with pytest.raises(CBoundednessViolation):
        compose(net("x"), net("x/eps"), I1)


def test_ring_laws_at_representation_level():
    u, v, w = net("sin(x)"), net("eps*x^2"), net("exp(-x)")
    pts = np.linspace(-1, 1, 11)[:, None]
    lhs = combine(combine(u, v, "add"), w, "add").evaluate(8, pts, G.eps_at(8))
    rhs = combine(u, combine(v, w, "add"), "add").evaluate(8, pts, G.eps_at(8))
    assert np.allclose(lhs, rhs, rtol=1e-15, atol=0)
    assert structural_zero(combine(combine(u, v, "mul"), combine(v, u, "mul"), "sub"))


def test_derive_commutes_with_translation():
    u = net("sin(x/eps)*x^3")
    a = derive(translate(u, 0.25))
    b = translate(derive(u), 0.25)
    assert is_zero(E.sub(a.expr, b.expr))


def test_derive_heaviside_embedding():
    assert derive(embed(heaviside())).expr == embed(delta(0)).expr


def test_singular_expression_needs_pierced_domain():
    with pytest.raises(ValueError):
        Net.from_text("abs(x)^-1", domain="whole")
    assert net("abs(x)^-1").domain == "pierced"


def test_pierced_exclusion_radius():
    u = net("log(abs(x))")
    assert u.exclusion_radius(2.0 ** -6) == 2.0 ** -6
    assert u.exclusion_radius(2.0 ** -30) == 2.0 ** -20
