import math

import numpy as np
import pytest

from epsnet.algebra import Net, combine, dilate, zero_net, negligibility, moderateness
from epsnet.asymptotics import (
    DEFAULT_GRID,
    CompactSet,
    DecaySamples,
    EpsGrid,
    fit_order,
    sample_sup,
    verdict_moderate,
    verdict_negligible,
    worst_of,
)
from epsnet.embedding import build_mollifier, embed, heaviside
from epsnet.errors import InsufficientData

G = DEFAULT_GRID
I1 = CompactSet.interval(-1, 1)


def powers(a, grid=G):
    return DecaySamples(grid.ks, grid.eps, grid.eps ** a)


def test_grid_defaults():
    assert list(G.ks) == list(range(6, 21))
    assert G.eps[0] == 2.0 ** -6 and G.eps[-1] == 2.0 ** -20
    assert np.all(np.diff(G.eps) < 0)
    with pytest.raises(ValueError):
        EpsGrid(2.0, 6, 10)


def test_sup_of_shifted_parabola():
    s = sample_sup(Net.from_text("x^2 + eps"), I1)
    assert np.allclose(s.values, 1 + G.eps, rtol=0, atol=1e-15)


def test_sup_of_spike_uses_bump_maximum():
    s = sample_sup(Net.from_text("eps^-1 * bump((x - eps)/eps)"), CompactSet.interval(-2, 2))
    assert np.allclose(s.values * G.eps, math.exp(-1), rtol=1e-12)


def test_zero_net_samples_vanish():
    assert not np.any(sample_sup(zero_net(), I1).values)


def test_fit_exact_power_laws():
    assert fit_order(powers(2)).slope == pytest.approx(2.0, abs=1e-9)
    assert fit_order(powers(-1)).slope == pytest.approx(-1.0, abs=1e-9)
    assert fit_order(DecaySamples(G.ks, G.eps, np.zeros(len(G)))).slope == math.inf


def test_fit_needs_nonzero_tail():
    vals = np.zeros(len(G))
    vals[:10] = 1.0
    with pytest.raises(InsufficientData):
        fit_order(DecaySamples(G.ks, G.eps, vals))


def test_mollified_heaviside_dilation_slope_is_flat():
    H = embed(heaviside(), build_mollifier(4))
    s = sample_sup(combine(dilate(H, 2.0), H, "sub"), I1)
    assert fit_order(s).slope == pytest.approx(0.0, abs=0.1)


def test_negligible_examples():
    u = Net.from_text("x*sin(eps)")
    assert str(negligibility(combine(u, u, "sub"), [I1])) == "ExactZero"
    v = verdict_negligible(sample_sup(Net.from_text("exp(-1/eps)"), I1), 12)
    assert v.outcome == "NegligibleTo" and v.order == 12
    w = verdict_negligible(sample_sup(Net.from_text("eps*sin(x)"), I1), 2)
    assert w.outcome == "Fails" and w.slope == pytest.approx(1.0, abs=1e-9)


def test_moderate_examples():
    spike = moderateness(Net.from_text("eps^-1 * bump((x - eps)/eps)"), [CompactSet.interval(-2, 2)])
    assert spike.outcome == "Moderate" and spike.order == 1
    assert spike.slope == pytest.approx(-1.0, abs=0.1)
    para = moderateness(Net.from_text("x^2"), [I1])
    assert para.order == 0
    assert not moderateness(Net.from_text("exp(1/eps)"), [I1]).passed


def test_negligible_is_monotone_in_m():
    s = DecaySamples(G.ks, G.eps, 1e12 * G.eps ** 5)
    assert verdict_negligible(s, 5).passed
    assert all(verdict_negligible(s, m).passed for m in range(6))
    assert not verdict_negligible(s, 6).passed


def test_scaling_equivariance_of_slope():
    base = sample_sup(Net.from_text("sin(x) + eps*x^2"), I1)
    shifted = sample_sup(Net.from_text("eps^3*(sin(x) + eps*x^2)"), I1)
    assert fit_order(shifted).slope - fit_order(base).slope == pytest.approx(3.0, abs=1e-9)


def test_refined_lattice_never_lowers_sup():
    u = Net.from_text("sin(7*x)*bump(3*x - eps)")
    coarse = sample_sup(u, CompactSet.interval(-1, 1, samples=129))
    fine = sample_sup(u, CompactSet.interval(-1, 1, samples=257))
    assert np.all(fine.values >= coarse.values)


def test_worst_of_orders_outcomes():
    ok = verdict_negligible(powers(9), 8)
    bad = verdict_negligible(powers(1), 8)
    assert worst_of([ok, bad]).outcome == "Fails"
    assert worst_of([ok, ok]).outcome == "NegligibleTo"


def test_parallel_sampling_is_identical():
    u = Net.from_text("eps^-2*sin(x/eps)^2 + x")
    a = sample_sup(u, I1, jobs=1).values
    b = sample_sup(u, I1, jobs=8).values
    assert np.array_equal(a, b)


def test_annulus_lattice_stays_off_origin():
    A = CompactSet.annulus(0.5, 2.0, dim=2)
    pts = A.lattice(G.eps[-1])
    r = np.linalg.norm(pts, axis=1)
    assert r.min() >= 0.5 - 1e-12 and r.max() <= 2.0 + 1e-12
