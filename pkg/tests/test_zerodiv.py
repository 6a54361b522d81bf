import numpy as np
import pytest

from epsnet.algebra import Net, combine, equals, structural_zero, zero_net
from epsnet.asymptotics import DEFAULT_GRID, CompactSet
from epsnet.zerodiv import WindowReport, build_witness, find_small_windows, zero_divisor_verdict

G = DEFAULT_GRID
K = CompactSet.interval(-1, 1)
# smooth, identically 0 on [-1, 0] and positive on (0, 1]
ONE_SIDED = "bump(x - 1)"


def test_one_sided_net_has_windows_on_its_flat_side():
    rep = find_small_windows(Net.from_text(ONE_SIDED), K, 1.0, 12)
    assert rep.found
    assert rep.ks == list(G.ks)
    assert all(-1 <= c <= 0 for c in rep.centers)
    assert rep.achieved[-1] == 12


def test_one_sided_net_is_a_zero_divisor():
    f = Net.from_text(ONE_SIDED)
    v = zero_divisor_verdict(f, K)
    assert v.outcome == "IsZeroDivisor"
    assert v.product.passed and v.product.order == 12
    assert not v.witness_check.passed
    # re-verify the witness independently of the verdict
    g = v.witness
    assert equals(combine(f, g, "mul"), zero_net(), [K], 12).passed
    assert equals(g, zero_net(), [K], 12).outcome == "Fails"


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
def test_powers_of_x_show_no_evidence(k, rho):
    v = zero_divisor_verdict(Net.from_text(f"x^{k}"), K, rho, 12)
    assert v.outcome == "NoEvidence"


def test_powers_of_x_across_the_whole_ladder():
    assert zero_divisor_verdict(Net.from_text("x^2"), K).outcome == "NoEvidence"


def test_override_net_windows_on_even_indices():
    f = Net.from_text("1", overrides={str(k): "0" for k in G.ks if k % 2 == 0})
    v = zero_divisor_verdict(f, K, 1.0)
    assert v.passed
    assert v.report.ks == [k for k in G.ks if k % 2 == 0]
    prod = combine(f, v.witness, "mul")
    assert structural_zero(prod)


def test_window_search_is_monotone_in_budget():
    f = Net.from_text(ONE_SIDED)
    hi = find_small_windows(f, K, 1.0, 12)
    for b in (4, 8, 11):
        lo = find_small_windows(f, K, 1.0, b)
        assert lo.found and set(lo.ks) >= set(hi.ks)


def test_witness_needs_windows():
    with pytest.raises(ValueError):
        build_witness(WindowReport([], [], 1.0, [], 12))


def test_preconditions():
    with pytest.raises(ValueError):
        find_small_windows(Net.from_text("x1", 2), CompactSet.box([(-1, 1), (-1, 1)]))
    with pytest.raises(ValueError):
        find_small_windows(Net.from_text("x"), K, 5.0)
    with pytest.raises(ValueError):
        find_small_windows(Net.from_text("x"), K, 1.0, 13)


def test_parallel_scan_matches_serial():
    f = Net.from_text(ONE_SIDED)
    a = find_small_windows(f, K, 0.5, 12, jobs=1)
    b = find_small_windows(f, K, 0.5, 12, jobs=8)
    assert a.to_dict() == b.to_dict()
