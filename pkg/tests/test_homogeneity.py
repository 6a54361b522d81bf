import numpy as np
import pytest

from epsnet.algebra import Net, eval_point, GenPoint
from epsnet.analysis import default_testfns
from epsnet.asymptotics import CompactSet, DEFAULT_GRID
from epsnet.errors import PreconditionViolated
from epsnet.embedding import delta, embed, heaviside, xplus
from epsnet.homogeneity import (
    HomogeneityQuery,
    associative_homogeneity,
    degree_gate,
    euler_associated,
    euler_strong,
    extension_moderateness,
    extension_restriction,
    homogeneous_extension,
    polynomial_coefficients,
    radial_factorization_check,
    scaling_invariance,
    strong_homogeneity,
    tempered_check,
    tempered_representative,
    translation_invariance,
    weak_homogeneity,
)

G = DEFAULT_GRID
I1 = CompactSet.interval(-1, 1)
A12 = CompactSet.annulus(1.0, 2.0)


def q(alpha=0.0, **kw):
    return HomogeneityQuery(alpha, **kw)


def weak_q(alpha):
    return HomogeneityQuery(alpha, testfns=default_testfns(True))


def assoc_q(alpha):
    return HomogeneityQuery(alpha, testfns=default_testfns())


def n(text, **kw):
    return Net.from_text(text, **kw)


def test_query_rejects_trivial_scale():
    with pytest.raises(ValueError):
        HomogeneityQuery(0.0, scales=(1.0, 2.0))


def test_scaling_invariance_examples():
    assert scaling_invariance(n("1"), q()).outcome == "ExactZero"
    v = scaling_invariance(embed(heaviside()), q(Ks=[I1]))
    assert v.outcome == "Fails" and v.slope == pytest.approx(0.0, abs=0.15)
    w = scaling_invariance(n("2 + exp(-1/eps)*sin(x)"), q())
    assert w.outcome == "NegligibleTo" and w.detail["constancy_passed"]


def test_translation_invariance_examples():
    assert translation_invariance(n("1 + eps"), q=q()).outcome == "ExactZero"
    assert translation_invariance(n("x^2"), q=q()).outcome == "Fails"
    w = translation_invariance(n("3 + eps^20*cos(x)"), q=q())
    assert w.outcome == "NegligibleTo" and w.detail["constancy_passed"]


def test_non_constant_negligible_perturbation_fails_constancy():
    # u(lambda x) - u(x) is negligible but u is not constant in x
    v = scaling_invariance(n("x^2 + 1"), q())
    assert not v.passed


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_monomials_are_exactly_homogeneous(k):
    u = n(f"(2 + eps)*x^{k}")
    assert strong_homogeneity(u, q(k)).outcome == "ExactZero"
    assert strong_homogeneity(u, q(k + 1)).outcome == "Fails"
    assert strong_homogeneity(u, q(k - 1)).outcome == "Fails"


def test_embedded_ramp_is_homogeneous_only_off_origin():
    u = embed(xplus(1))
    assert strong_homogeneity(u, q(1)).outcome == "Fails"
    v = strong_homogeneity(u, q(1, Ks=[A12]))
    assert v.outcome == "NegligibleTo" and v.order == 8


def test_weak_homogeneity_examples():
    assert weak_homogeneity(embed(delta(0)), weak_q(-1)).outcome == "NegligibleTo"
    v = weak_homogeneity(n("x^2 + eps"), weak_q(2))
    assert v.outcome == "Fails" and v.slope == pytest.approx(1.0, abs=0.1)
    assert weak_homogeneity(embed(heaviside()), weak_q(0)).outcome == "NegligibleTo"


@pytest.mark.parametrize("j", [1, 2, 3])
def test_embedded_ramps_are_weakly_homogeneous(j):
    assert weak_homogeneity(embed(xplus(j)), weak_q(j)).passed


def test_weak_mode_requires_away_from_zero_test_functions():
    with pytest.raises(PreconditionViolated):
        weak_homogeneity(embed(delta(0)), HomogeneityQuery(-1.0, testfns=default_testfns()))


def test_associative_homogeneity_examples():
    assert associative_homogeneity(n("x^2 + eps"), assoc_q(2)).passed
    assert associative_homogeneity(n("x^2 + eps"), assoc_q(1)).outcome == "NotConvergent"
    assert associative_homogeneity(embed(delta(0)), assoc_q(-1)).passed


def test_consistency_ladder():
    cases = [(n("3*x^2"), 2), (embed(heaviside()), 0), (n("x^2 + eps"), 2), (embed(delta(0)), -1)]
    for u, a in cases:
        s = strong_homogeneity(u, q(a)).passed
        w = weak_homogeneity(u, weak_q(a)).passed
        c = associative_homogeneity(u, assoc_q(a)).passed
        assert (not s or w) and (not w or c)


def test_euler_examples():
    assert euler_strong(n("3*x^4"), 4).outcome == "ExactZero"
    H = embed(heaviside())
    v = euler_strong(H, 0)
    assert v.outcome == "Fails" and v.slope == pytest.approx(0.0, abs=0.15)
    assert euler_associated(H, 0).passed
    d = euler_strong(n("x^2 + eps"), 2)
    assert d.outcome == "Fails" and d.slope == pytest.approx(1.0, abs=0.1)
    assert euler_associated(n("x^2 + eps"), 2).passed


def test_radial_factorization_examples():
    assert radial_factorization_check(n("abs(x)^-1"), -1).outcome == "ExactZero"
    assert radial_factorization_check(n("x/abs(x)"), 0).outcome == "ExactZero"
    assert radial_factorization_check(n("abs(x)^(1/2)"), 0.5).outcome == "ExactZero"
    u2 = Net.from_text("(x1^2 + x2^2)^(-1/2)", 2)
    # folding sum-of-squares quotients is beyond the normalizer; samples sit at round-off
    assert radial_factorization_check(u2, -1).passed
    v = radial_factorization_check(n("abs(x)^(1/2)*(1 + eps*sin(abs(x)))"), 0.5, m=2)
    assert v.outcome == "Fails" and v.slope == pytest.approx(1.0, abs=0.1)


def test_extension_of_inverse_distance():
    u = n("abs(x)^-1")
    ext = homogeneous_extension(u, -1)
    assert ext.domain == "whole"
    v = extension_moderateness(ext, 0, -1)
    assert v.outcome == "Moderate" and v.order <= 1.5
    assert extension_restriction(ext, u, -1, A12).outcome == "ExactZero"


def test_extension_of_pierced_parabola_restricts_exactly():
    u = n("x^2", domain="pierced")
    ext = homogeneous_extension(u, 2)
    assert extension_restriction(ext, u, 2, A12).outcome == "ExactZero"
    assert strong_homogeneity(ext, q(3, Ks=[A12])).outcome == "Fails"


def test_extension_of_square_root():
    ext = homogeneous_extension(n("abs(x)^(1/2)"), 0.5)
    v = extension_moderateness(ext, 0, 0.5, max_order=1)
    assert v.outcome == "Moderate" and v.order == 1


def test_tempered_representatives():
    v = tempered_representative(n("x^2"), 2)
    assert tempered_check(v, 2).passed
    pts = np.array([[2.5], [-3.0], [7.0]])
    assert np.allclose(v.evaluate(10, pts, G.eps_at(10)), pts[:, 0] ** 2, rtol=1e-14)
    assert tempered_check(tempered_representative(n("abs(x)^-1"), -1), 1).passed
    assert not tempered_check(n("exp(x)"), 5).passed


def test_polynomial_coefficients_one_dimensional():
    r = polynomial_coefficients(n("(2 + eps)*x^3"), 3)
    assert np.allclose(r.coefficients[0].on(G), 2 + G.eps, rtol=1e-15)
    assert r.residual.outcome == "ExactZero"
    d = polynomial_coefficients(n("x^2 + eps"), 2)
    assert np.allclose(d.coefficients[0].on(G), 1 + G.eps, rtol=1e-15)
    assert d.residual.outcome == "Fails" and d.residual.slope == pytest.approx(1.0, abs=0.1)


def test_polynomial_coefficients_two_dimensional():
    r = polynomial_coefficients(Net.from_text("x1*x2 + x1^2", 2), 2)
    got = {tuple(b): c.on(G)[-1] for b, c in zip(r.monomials, r.coefficients)}
    assert got[(2, 0)] == pytest.approx(1.0, abs=1e-10)
    assert got[(1, 1)] == pytest.approx(1.0, abs=1e-10)
    assert got[(0, 2)] == pytest.approx(0.0, abs=1e-10)
    assert r.condition < 1e8
    assert r.residual.passed


def test_coefficients_of_embedded_polynomial_use_tabulated_path():
    from epsnet.embedding import polynomial
    r = polynomial_coefficients(embed(polynomial([0, 0, 3.0])), 2)
    assert np.allclose(r.coefficients[0].on(G), 3.0, rtol=1e-12)
    assert r.residual.passed


@pytest.mark.parametrize("alpha, ok", [(3, True), (0, True), (-1, False), (0.5, False), (2.0000000001, True)])
def test_degree_gate(alpha, ok):
    assert degree_gate(alpha) is ok
