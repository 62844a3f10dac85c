import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lclab import (DegenerateCovectorError, characteristic_roots,
                   characteristic_roots_screened, class_membership_estimate,
                   difference_symbol, difference_symbol_expanded, eta_symbol,
                   flat_chart, flat_ntd_symbol, flat_transmission_symbol,
                   linear_chart, make_symbol, ntd_symbol, product_symbol,
                   tau_symbol, transmission_symbol, IDENTITY_SYMBOL)
from lclab.symbols import SymbolClass


def normal_polynomial(chart, xp, xip, z, lam=0.0):
    """Independent residual oracle: A_nn z^2 + 2 i z (A_n. xi) - (|xi|^2+lam)."""
    from lclab import metric_matrix
    a = metric_matrix(chart, xp)
    xip = np.atleast_1d(xip)
    cross = float(a[-1, :-1] @ xip)
    return a[-1, -1] * z * z + 2j * z * cross - (float(xip @ xip) + lam)


FLAT = flat_chart(support_radius=10.0)
SLOPED = linear_chart(0.5, support_radius=10.0)


def test_flat_roots_are_plus_minus_xi():
    zm, zp = characteristic_roots(FLAT, 0.0, 2.5)
    assert zm == pytest.approx(-2.5) and zp == pytest.approx(2.5)


def test_sloped_roots_match_hand_value():
    zm, zp = characteristic_roots(SLOPED, 0.0, 1.0)
    assert zm == pytest.approx((-1 + 0.5j) / 1.25)
    assert zp == pytest.approx((1 + 0.5j) / 1.25)


def test_screened_roots_reduce_to_free_at_lam_zero():
    zm, zp = characteristic_roots(SLOPED, 0.0, 1.7)
    wm, wp = characteristic_roots_screened(SLOPED, 0.0, 1.7, 0.0)
    assert wm == zm and wp == zp


def test_degenerate_covector_raises():
    with pytest.raises(DegenerateCovectorError):
        characteristic_roots(FLAT, 0.0, 0.0)
    with pytest.raises(DegenerateCovectorError):
        characteristic_roots_screened(FLAT, 0.0, 0.0, 0.0)


@settings(max_examples=150, deadline=None)
@given(slope=st.floats(-2.0, 2.0), xi=st.floats(0.01, 50.0),
       lam=st.floats(0.0, 1e6), sign=st.sampled_from([-1.0, 1.0]))
def test_roots_solve_their_polynomials(slope, xi, lam, sign):
    chart = linear_chart(slope, support_radius=10.0)
    xi = sign * xi
    zm, zp = characteristic_roots(chart, 0.0, xi)
    assert zm.real < 0 < zp.real
    scale = max(abs(xi) ** 2, 1.0)
    for z in (zm, zp):
        assert abs(normal_polynomial(chart, 0.0, xi, z)) <= 1e-10 * scale
    wm, wp = characteristic_roots_screened(chart, 0.0, xi, lam)
    assert wm.real < 0 < wp.real
    scale = max(abs(xi) ** 2 + lam, 1.0)
    for w in (wm, wp):
        assert abs(normal_polynomial(chart, 0.0, xi, w, lam)) <= 1e-10 * scale


def test_homogeneity_of_roots(rng):
    for _ in range(200):
        slope = rng.uniform(-1.5, 1.5)
        chart = linear_chart(slope, support_radius=10.0)
        xi = rng.uniform(0.1, 10.0) * rng.choice([-1, 1])
        lam = rng.uniform(0.0, 100.0)
        for t in (2.0, 10.0):
            zm, zp = characteristic_roots(chart, 0.0, xi)
            zms, zps = characteristic_roots(chart, 0.0, t * xi)
            assert abs(zms - t * zm) <= 1e-12 * t * abs(zm)
            assert abs(zps - t * zp) <= 1e-12 * t * abs(zp)
            wm, _ = characteristic_roots_screened(chart, 0.0, xi, lam)
            wms, _ = characteristic_roots_screened(chart, 0.0, t * xi,
                                                   t * t * lam)
            assert abs(wms - t * wm) <= 1e-12 * t * abs(wm)


def test_flat_ntd_symbol_values():
    assert ntd_symbol(FLAT, 0.0, 1.0, 3.0) == pytest.approx(-1.0 / 2.0)
    assert ntd_symbol(FLAT, 0.0, 0.0, 100.0) == pytest.approx(-0.1)
    sym = flat_ntd_symbol()
    assert sym(0.0, 1.0, 3.0) == pytest.approx(-0.5)


def test_ntd_symbol_ellipticity_window(rng):
    # |symbol| * (|xi| + sqrt(lam)) bounded above and below over a sample grid
    ratios = []
    for _ in range(300):
        slope = rng.uniform(-1.0, 1.0)
        chart = linear_chart(slope, support_radius=10.0)
        xi = rng.uniform(0.0, 30.0)
        lam = rng.uniform(1.0, 1e6)
        val = abs(ntd_symbol(chart, 0.0, xi, lam))
        ratios.append(val * (abs(xi) + math.sqrt(lam)))
    assert 0.5 <= min(ratios) and max(ratios) <= 2.5


def test_transmission_symbol_flat_formula(rng):
    for _ in range(50):
        xi, lam = rng.uniform(0, 10), rng.uniform(1, 1e4)
        expected = 1.0 + abs(xi) / math.sqrt(xi * xi + lam)
        assert transmission_symbol(FLAT, 0.0, xi, lam) == pytest.approx(expected)
        assert flat_transmission_symbol()(0.0, xi, lam) == pytest.approx(expected)
    assert transmission_symbol(FLAT, 0.0, 0.0, 77.0) == pytest.approx(1.0)


def test_transmission_symbol_bounded_below(rng):
    # flat-chart samples sit above 1; sloped charts stay away from zero
    for _ in range(200):
        xi, lam = rng.uniform(0, 100), rng.uniform(1, 1e6)
        assert abs(transmission_symbol(FLAT, 0.0, xi, lam)) >= 1.0
        chart = linear_chart(rng.uniform(-1, 1), support_radius=10.0)
        assert abs(transmission_symbol(chart, 0.0, xi, lam)) >= 0.5


def test_difference_symbol_flat_values():
    assert difference_symbol(FLAT, 0.0, 3.0, 7.0) == pytest.approx(
        1.0 / (3.0 + 4.0))
    assert difference_symbol(FLAT, 0.0, 0.0, 100.0) == pytest.approx(0.1)


def test_difference_symbol_two_forms_agree(rng):
    for _ in range(1000):
        chart = linear_chart(rng.uniform(-1.5, 1.5), support_radius=10.0)
        xi = rng.uniform(0.01, 50.0) * rng.choice([-1, 1])
        lam = rng.uniform(1.0, 1e6)
        a = difference_symbol(chart, 0.0, xi, lam)
        b = difference_symbol_expanded(chart, 0.0, xi, lam)
        assert a > 0
        assert abs(a - b) <= 1e-12 * abs(a)


def test_eta_and_tau_are_the_designated_roots():
    assert tau_symbol(SLOPED, 0.0, 1.0) == characteristic_roots(
        SLOPED, 0.0, 1.0)[1]
    assert eta_symbol(SLOPED, 0.0, 1.0, 5.0) == characteristic_roots_screened(
        SLOPED, 0.0, 1.0, 5.0)[0]


# ---------------------------------------------------------------------------
# class calculus


def test_product_symbol_tags():
    tau = make_symbol(lambda xp, xip, lam: tau_symbol(FLAT, xp, xip), 1.0,
                      kind="S")
    ntd = flat_ntd_symbol()
    prod = product_symbol(tau, ntd)
    assert prod.class_tag == SymbolClass("P", 0.0, 1)
    low = make_symbol(lambda xp, xip, lam: 1.0 / (xip * xip + lam), -2.0,
                      kind="P")
    assert product_symbol(tau, low).class_tag == SymbolClass("P", -1.0, 1)


def test_product_with_one_returns_other_factor():
    ntd = flat_ntd_symbol()
    assert product_symbol(IDENTITY_SYMBOL, ntd) is ntd
    assert product_symbol(ntd, IDENTITY_SYMBOL) is ntd


@settings(max_examples=60, deadline=None)
@given(xi=st.floats(0.1, 30.0), lam=st.floats(1.0, 1e5))
def test_product_symbol_pointwise_algebra(xi, lam):
    a = make_symbol(lambda xp, xip, lam_: xip + 1j, 1.0, kind="S")
    b = flat_ntd_symbol()
    c = make_symbol(lambda xp, xip, lam_: 1.0 / (1.0 + xip * xip), -2.0,
                    kind="S")
    ab = product_symbol(a, b)(0.0, xi, lam)
    ba = product_symbol(b, a)(0.0, xi, lam)
    assert ab == pytest.approx(ba)
    lhs = product_symbol(product_symbol(a, b), product_symbol(c, IDENTITY_SYMBOL))
    rhs = product_symbol(a, product_symbol(b, c))
    assert lhs(0.0, xi, lam) == pytest.approx(rhs(0.0, xi, lam))


def test_class_membership_certifies_interface_symbols():
    assert class_membership_estimate(flat_ntd_symbol(), -1.0, 2).passed
    assert class_membership_estimate(flat_transmission_symbol(), 0.0, 1).passed


def test_class_membership_rejects_wrong_order():
    eta = make_symbol(lambda xp, xip, lam: eta_symbol(FLAT, xp, xip, lam),
                      1.0, kind="P", x_support_radius=0.0)
    assert class_membership_estimate(eta, 1.0, 2).passed
    report = class_membership_estimate(eta, 0.0, 1)
    assert not report.passed
    assert max(report.growth_slopes.values()) > 0.5  # degree-1 growth seen
