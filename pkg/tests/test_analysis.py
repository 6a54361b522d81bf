import math

import numpy as np
import pytest
from scipy import integrate

from epsnet.algebra import GenNumber, GenPoint, Net, combine, eval_point, scale, zero_net
from epsnet.analysis import (
    PAIRING_GRID,
    TestFunction,
    adaptive_gl,
    associate,
    default_testfns,
    integrate_abs,
    pair,
)
from epsnet.asymptotics import DEFAULT_GRID, verdict_negligible
from epsnet.embedding import build_mollifier, delta, embed
from epsnet.errors import PreconditionViolated

from helpers import NEGLIGIBLE_INTEGRALS, subsequence_nets

G = DEFAULT_GRID
PHI0 = TestFunction((0.0,), 1.0)


def test_gauss_legendre_on_smooth_and_peaked_integrands():
    r = adaptive_gl(np.sin, [0.0, math.pi])
    assert r.value == pytest.approx(2.0, abs=1e-14)
    eps = 1e-4
    r = adaptive_gl(lambda x: np.exp(-(x / eps) ** 2) / (eps * math.sqrt(math.pi)),
                    [-1.0, -8 * eps, 0.0, 8 * eps, 1.0])
    assert r.value == pytest.approx(1.0, abs=1e-12)


def test_test_function_has_unit_mass_and_support():
    for phi in default_testfns() + default_testfns(True):
        lo, hi = phi.support()
        mass = integrate.quad(lambda x: phi(np.array([x]))[0], lo, hi, epsabs=1e-14)[0]
        assert mass == pytest.approx(1.0, abs=1e-10)
        assert phi(np.array([lo - 1e-9, hi + 1e-9])).tolist() == [0.0, 0.0]
    assert all(p.away_from_zero for p in default_testfns(True))
    assert not PHI0.away_from_zero


def test_unit_integrand():
    vals = integrate_abs(Net.from_text("1"), GenNumber.of(0.0), GenNumber.of(1.0)).on(G)
    assert np.allclose(vals, 1.0, atol=1e-14)


def test_exponentially_small_integrand():
    vals = integrate_abs(Net.from_text("exp(-1/eps)*sin(x)^2"), GenNumber.of(0.0),
                         GenNumber.of(1.0)).on(G)
    ref = (1 - math.sin(2) / 2) / 2 * np.exp(-1 / G.eps)
    assert np.allclose(vals, ref, rtol=1e-10)
    assert verdict_negligible(integrate_abs(Net.from_text("exp(-1/eps)*sin(x)^2"),
                                            GenNumber.of(0.0), GenNumber.of(1.0)).samples(G), 12).passed


def test_generalized_bounds_follow_eps():
    vals = integrate_abs(Net.from_text("x"), GenNumber.of("eps"), GenNumber.of("1 + eps")).on(G)
    assert np.allclose(vals, ((1 + G.eps) ** 2 - G.eps ** 2) / 2, rtol=1e-13)


def test_subsequence_nets_break_the_precondition():
    a, (b, b_ov), (f, f_ov) = subsequence_nets(G)
    with pytest.raises(PreconditionViolated) as info:
        integrate_abs(Net.from_text(f, overrides=f_ov), GenNumber.of(a), GenNumber.of(b, b_ov))
    diag = info.value.diagnostics
    assert all(v == 0.0 for v in diag["raw_integral"])
    assert diag["max_interior_value"] > 0


@pytest.mark.parametrize("f, a, b", NEGLIGIBLE_INTEGRALS)
def test_negligible_integral_forces_negligible_midpoint_values(f, a, b):
    u = Net.from_text(f)
    A, B = GenNumber.of(a), GenNumber.of(b)
    assert verdict_negligible(integrate_abs(u, A, B).samples(G), 12).passed
    mid = GenPoint((GenNumber.tabulated((A.on(G) + B.on(G)) / 2, G),))
    assert verdict_negligible(eval_point(u, mid).samples(G), 10).passed


def test_integrate_is_monotone_under_domination():
    f, g = Net.from_text("x*cos(x + eps)"), Net.from_text("x^2 + 1")
    a, b = GenNumber.of(-1.0), GenNumber.of(1.0)
    assert np.all(integrate_abs(f, a, b).on(G) <= integrate_abs(g, a, b).on(G) + 1e-12)


def test_delta_pairing_matches_direct_quadrature():
    mol = build_mollifier(4)
    seq = pair(embed(delta(0), mol), PHI0)
    for i in (0, 4, 8):
        eps = seq.eps[i]
        f = lambda x: float(mol(x / eps)) / eps * PHI0(np.array([x]))[0]
        ref = integrate.quad(f, -1, 1, points=[-8 * eps, 0.0, 8 * eps], epsabs=1e-14, limit=400)[0]
        assert seq.values[i] == pytest.approx(ref, abs=1e-11)
    assert abs(seq.values[-1] - PHI0(np.array([0.0]))[0]) < 1e-10


def test_drift_pairing_shifts_by_eps():
    phi = default_testfns()[1]
    base = integrate.quad(lambda x: x * x * phi(np.array([x]))[0], *phi.support(), epsabs=1e-14)[0]
    seq = pair(Net.from_text("x^2 + eps"), phi)
    assert np.allclose(seq.values, base + seq.eps, atol=1e-11)


def test_zero_net_pairs_to_zero():
    assert not np.any(pair(zero_net(), PHI0).values)


def test_pairing_is_linear():
    u, v = Net.from_text("sin(x/eps)"), embed(delta(1))
    lhs = pair(combine(scale(u, 2.0), scale(v, -3.0), "add"), PHI0).values
    rhs = 2 * pair(u, PHI0).values - 3 * pair(v, PHI0).values
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_association_examples():
    d = embed(delta(0))
    v = associate(combine(d, d, "sub"), default_testfns(), to_zero=True)
    assert v.passed and v.limit == 0.0
    assert associate(Net.from_text("eps"), default_testfns(), to_zero=True).passed
    flicker = Net.from_text("0", overrides={str(k): "1" for k in PAIRING_GRID.ks if k % 2 == 0})
    assert associate(flicker, default_testfns()).outcome == "NotConvergent"


def test_pierced_net_needs_away_from_zero_test_functions():
    with pytest.raises(PreconditionViolated):
        pair(Net.from_text("abs(x)^-1"), PHI0)
    assert associate(Net.from_text("abs(x)^-1"), default_testfns(True)).passed


def test_zero_mass_modulation_is_rejected():
    with pytest.raises(ValueError):
        TestFunction((0.0,), 1.0, (0.0, 1.0)).normalization
