import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irgraph.deviations import (chernoff_bounds, g_below_one_above, g_below_one_interval,
                                g_function, gamma, lower_tail_bound, ratio, ratio_max,
                                simulate_z, upper_tail_bound)
from irgraph.errors import DegenerateInput, DomainError
from irgraph.rng import stream
from oracles import scan_ratio_max


def test_gamma_examples():
    assert gamma(1.0) == 0.0
    assert gamma(2.0) == pytest.approx(2 * math.log(2) - 1)
    assert gamma(0.5) == pytest.approx(0.1534264, abs=1e-7)
    with pytest.raises(DomainError):
        gamma(0.0)


def test_gamma_positive_and_convex():
    xs = np.linspace(0.01, 5, 2000)
    g = np.array([gamma(x) for x in xs])
    assert np.all(g[np.abs(xs - 1) > 1e-9] > 0)
    assert np.all(np.diff(g, 2) >= -1e-12)


def test_ratio_max_unit_difference():
    rm = ratio_max(0.0, 1.0)
    p_scan, v_scan = scan_ratio_max(0.0, 1.0)
    assert rm.p0 == pytest.approx(p_scan, abs=1e-6)
    assert rm.value == pytest.approx(v_scan, abs=1e-6)
    # closed form at b - a = 1
    assert rm.p0 == pytest.approx(1 / (1 - math.exp(-1)) - 1, abs=1e-12)


def test_ratio_max_mirror():
    assert ratio_max(1.0, 0.0).p0 == pytest.approx(1 - ratio_max(0.0, 1.0).p0, abs=1e-12)
    assert ratio_max(1.0, 0.0).value == pytest.approx(ratio_max(0.0, 1.0).value, abs=1e-12)


def test_ratio_max_degenerate_and_limit():
    with pytest.raises(DegenerateInput):
        ratio_max(0.3, 0.3)
    rm = ratio_max(0.0, 1e-9)
    assert rm.p0 == pytest.approx(0.5, abs=1e-9) and rm.value == pytest.approx(1.0, abs=1e-12)
    # the series branch and the closed form join smoothly at the cutoff
    lo, hi = ratio_max(0.0, 0.999e-6), ratio_max(0.0, 1.001e-6)
    assert abs(lo.p0 - hi.p0) < 1e-8 and abs(lo.value - hi.value) < 1e-12


def test_ratio_max_large_difference():
    assert ratio_max(0.0, 500.0).value > 1e200
    assert ratio_max(0.0, 800.0).value == math.inf


@given(st.floats(-5, 5), st.floats(0.01, 10), st.booleans())
@settings(max_examples=100, deadline=None)
def test_ratio_max_matches_scan(a, gap, flip):
    b = a - gap if flip else a + gap
    rm = ratio_max(a, b)
    p_scan, v_scan = scan_ratio_max(a, b)
    assert rm.value >= 1.0
    assert rm.p0 == pytest.approx(p_scan, abs=1e-6)
    assert rm.value == pytest.approx(v_scan, rel=1e-6, abs=1e-6)
    assert float(ratio(rm.p0, a, b)) == pytest.approx(rm.value, rel=1e-12)


def test_g_function_examples():
    assert g_function(0.5, 1.0, 1.0) == pytest.approx(math.exp(-gamma(0.5)), abs=1e-12)
    assert g_function(0.5, 1.0, 1.0) == pytest.approx(0.8577639, abs=1e-7)
    for A, B in [(1, 1), (2, 1), (5, 0.3)]:
        assert g_function(1.0, A, B) == 1.0
    x, A, B = 0.9, 2.0, 1.0
    direct = math.exp(-gamma(x) * B) * scan_ratio_max(A * (x - 1), B * (x - 1))[1]
    g = g_function(x, A, B)
    assert g < 1 and g == pytest.approx(direct, abs=1e-9)


def test_g_function_domain():
    with pytest.raises(DomainError):
        g_function(0.5, 1.0, 2.0)
    with pytest.raises(DomainError):
        g_function(-1.0, 2.0, 1.0)


@pytest.mark.parametrize("A,B", [(2.0, 1.0), (1.0, 0.2), (3.0, 2.9)])
def test_g_below_one_scanners(A, B):
    iv = g_below_one_interval(A, B, grid=2000)
    assert iv is not None and iv[1] == 1.0 and iv[0] < 1.0
    for x in np.linspace(iv[0], 1.0, 50)[:-1]:
        assert g_function(float(x), A, B) < 1.0
    y0 = g_below_one_above(A, B, grid=2000)
    if y0 is not None:
        for y in np.geomspace(y0, 1e3, 50):
            assert g_function(float(y), A, B) < 1.0


def test_chernoff_examples():
    # mu lambda (1 - delta) u t = 10
    lo, hi = chernoff_bounds(0.5, 2.0, 0.5, 1.0, 1.0, 10)
    assert hi is None and lo == pytest.approx(math.exp(-10 * gamma(0.5)), rel=1e-12)
    assert lo == pytest.approx(0.2156143, abs=1e-7)
    assert chernoff_bounds(1 - 1e-9, 2.0, 0.0, 1.0, 1.0, 10)[0] == pytest.approx(1.0)
    assert chernoff_bounds(1.0, 2.0, 0.0, 1.0, 1.0, 10) == (1.0, 1.0)
    lo, hi = chernoff_bounds(2.0, 1.0, 0.0, 0.5, 1.0, 3)
    assert lo is None and hi == pytest.approx(math.exp(-3 * gamma(2.0)))


@pytest.mark.parametrize("call", [
    lambda: lower_tail_bound(1.0, 1.0, 0.0, 1.0, 1),
    lambda: upper_tail_bound(1.0, 1.0, 0.0, 1.0, 1),
    lambda: lower_tail_bound(0.5, 0.0, 0.0, 1.0, 1),
    lambda: lower_tail_bound(0.5, 1.0, 1.0, 1.0, 1),
    lambda: lower_tail_bound(0.5, 1.0, 0.0, 1.0, 0),
])
def test_chernoff_domain(call):
    with pytest.raises(DomainError):
        call()


def test_simulate_z_mean():
    counts = np.array([300, 700])
    probs = np.array([[0.006, 0.002], [0.002, 0.004]])
    u = np.array([1.0, 0.6])
    w = np.array([0.3, 0.7])
    z = simulate_z(counts, probs, u, w, 20, 5000, stream(1), delta=0.2)
    trials = np.floor(0.8 * counts)
    per_type_mean = probs @ (trials * u)
    mean = 20 * float(w @ per_type_mean)
    assert abs(z.mean() - mean) <= 3 * z.std(ddof=1) / math.sqrt(z.size)
