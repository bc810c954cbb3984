import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bo_molecule.specfun import (
    QuadratureError,
    RootFindingError,
    airy,
    airy_ai,
    airy_ai_prime,
    airy_prime_zero,
    airy_zero,
    bessel_k0,
    bessel_k0e,
    bessel_k1,
    bessel_k1e,
    find_root_bracketed,
    fit_power_law,
    integrate,
    integrate_semi_infinite,
    richardson,
)

mp.mp.dps = 30


def ai_ray_integral(x):
    """Ai(x) = (1/pi) Im int_0^inf e^{i pi/3} exp(-r^3/3 - x r e^{i pi/3}) dr.

    The Airy contour integral taken along the ray arg t = pi/3, where the
    integrand decays like exp(-r^3/3) for every real x; beyond r = 12 it is
    below exp(-500) for the arguments tested.
    """
    w = mp.expjpi(mp.mpf(1) / 3)
    x = mp.mpf(x)
    f = lambda r: w * mp.exp(-(r**3) / 3 - x * r * w)
    return mp.im(mp.quad(f, [0, 1, 3, 6, 12])) / mp.pi


def ai_prime_integral(x):
    w = mp.expjpi(mp.mpf(1) / 3)
    x = mp.mpf(x)
    f = lambda r: -r * w * w * mp.exp(-(r**3) / 3 - x * r * w)
    return mp.im(mp.quad(f, [0, 1, 3, 6, 12])) / mp.pi


def k_cosh_integral(nu, x):
    """K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt."""
    x = mp.mpf(x)
    top = mp.acosh(800 / x)  # integrand below exp(-790) beyond
    return mp.quad(lambda t: mp.exp(-x * mp.cosh(t)) * mp.cosh(nu * t), mp.linspace(0, top, 8))


# ---------------------------------------------------------------------------
# Airy functions
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("x", [-12.5, -7.3, -3.0, -1.0188, -0.4, 0.0, 0.7, 2.5, 5.0])
def test_airy_matches_oscillatory_integral(x):
    ai, aip = airy(x)
    assert ai == pytest.approx(float(ai_ray_integral(x)), abs=1e-10)
    assert aip == pytest.approx(float(ai_prime_integral(x)), abs=1e-10)


@pytest.mark.parametrize("x", np.linspace(-30.0, 25.0, 111))
def test_airy_matches_mpmath(x):
    ai, aip = airy(x)
    ref, refp = float(mp.airyai(x)), float(mp.airyai(x, derivative=1))
    scale = max(1.0, abs(x)) ** 0.25
    assert abs(ai - ref) <= 1e-12 * max(abs(ref), 1e-300) + 1e-14 * scale
    assert abs(aip - refp) <= 1e-12 * max(abs(refp), 1e-300) + 1e-14 * scale * max(1.0, math.sqrt(abs(x)))


def test_airy_vectorised_agrees_with_scalar():
    xs = np.linspace(-20, 12, 33)
    ai, aip = airy(xs)
    assert ai.shape == xs.shape
    for x, a, b in zip(xs, ai, aip):
        assert (a, b) == airy(float(x))
    assert airy_ai(1.0) == airy(1.0)[0]
    assert airy_ai_prime(1.0) == airy(1.0)[1]


@pytest.mark.parametrize("k", range(1, 6))
def test_airy_zeros(k):
    assert airy_zero(k) == pytest.approx(float(mp.airyaizero(k)), abs=1e-11)
    assert airy_prime_zero(k) == pytest.approx(float(mp.airyaizero(k, derivative=1)), abs=1e-11)


def test_airy_zero_index_validated():
    with pytest.raises(ValueError):
        airy_zero(0)


@given(st.floats(-15.0, 8.0))
def test_airy_equation_holds(x):
    # d/dx Ai'(x) = x Ai(x), by a 4th-order central difference
    h = 1e-3
    d = (-airy(x + 2 * h)[1] + 8 * airy(x + h)[1] - 8 * airy(x - h)[1] + airy(x - 2 * h)[1]) / (12 * h)
    assert d == pytest.approx(x * airy(x)[0], abs=1e-8 * max(1.0, abs(x)))


@given(st.floats(0.0, 10.0))
def test_airy_positive_and_decreasing_on_positive_axis(x):
    ai, aip = airy(x)
    assert ai > 0 and aip < 0


# ---------------------------------------------------------------------------
# Bessel K
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("x", [1e-6, 1e-3, 0.1, 0.5, 1.0, 1.9, 2.1, 5.0, 12.0, 19.9, 20.1, 35.0, 60.0])
def test_bessel_k_matches_cosh_integral(x):
    k0 = float(k_cosh_integral(0, x))
    k1 = float(k_cosh_integral(1, x))
    assert bessel_k0(x) == pytest.approx(k0, rel=1e-10)
    assert bessel_k1(x) == pytest.approx(k1, rel=1e-10)


@pytest.mark.parametrize("x", [1e-8, 0.3, 3.0, 30.0, 300.0, 700.0])
def test_scaled_bessel_matches_mpmath(x):
    assert bessel_k0e(x) == pytest.approx(float(mp.besselk(0, x) * mp.exp(x)), rel=1e-12)
    assert bessel_k1e(x) == pytest.approx(float(mp.besselk(1, x) * mp.exp(x)), rel=1e-12)


def test_bessel_agrees_with_scipy():
    special = pytest.importorskip("scipy.special")
    x = np.geomspace(1e-5, 80, 200)
    np.testing.assert_allclose(bessel_k0(x), special.k0(x), rtol=1e-12)
    np.testing.assert_allclose(bessel_k1(x), special.k1(x), rtol=1e-12)
    ai, aip, _, _ = special.airy(np.linspace(-10, 10, 101))
    np.testing.assert_allclose(airy(np.linspace(-10, 10, 101))[0], ai, atol=1e-13)
    np.testing.assert_allclose(airy(np.linspace(-10, 10, 101))[1], aip, atol=1e-13)


def test_bessel_rejects_nonpositive():
    with pytest.raises(ValueError):
        bessel_k0(0.0)
    with pytest.raises(ValueError):
        bessel_k1(-1.0)


@given(st.floats(0.01, 50.0))
def test_k0_derivative_is_minus_k1(x):
    h = 1e-5 * x
    d = (bessel_k0e(x + h) * math.exp(-h) - bessel_k0e(x - h) * math.exp(h)) / (2 * h)
    assert d == pytest.approx(-bessel_k1e(x), rel=1e-6)


@given(st.floats(0.01, 50.0))
def test_k_ordering(x):
    # K1 > K0 > 0 for every positive argument
    assert bessel_k1e(x) > bessel_k0e(x) > 0


# ---------------------------------------------------------------------------
# quadrature, roots, extrapolation
# ---------------------------------------------------------------------------


def test_integrate_log_singularity():
    r = integrate(lambda t: np.log(t), 0.0, 1.0, tol=1e-14)
    assert r.value == pytest.approx(-1.0, abs=1e-13)


def test_integrate_semi_infinite_gaussian():
    r = integrate_semi_infinite(lambda t: np.exp(-t * t), 0.0, tol=1e-14)
    assert r.value == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-14)


def test_integrate_with_kink():
    r = integrate(lambda t: np.abs(t - 0.3), 0.0, 1.0, tol=1e-14, points=(0.3,))
    assert r.value == pytest.approx(0.5 * 0.09 + 0.5 * 0.49, abs=1e-14)


def test_integrate_k0_moment():
    # int_0^inf K0 = pi/2 (log singularity at 0)
    r = integrate(lambda t: bessel_k0e(t) * np.exp(-t), 0.0, math.inf, tol=1e-13, points=(1.0,))
    assert r.value == pytest.approx(math.pi / 2, abs=1e-12)


def test_integrate_reports_failure():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda t: np.sin(1.0 / t) / t, 0.0, 1.0, tol=1e-15, max_depth=1)
    assert math.isfinite(info.value.best.value)


def test_integrate_rejects_empty_interval():
    with pytest.raises(ValueError):
        integrate(np.sin, 1.0, 1.0)


def test_brent_finds_root():
    r = find_root_bracketed(lambda x: math.cos(x) - x, 0.0, 1.0, tol=0.0)
    assert r.root == pytest.approx(0.7390851332151607, abs=1e-15)


def test_brent_bad_bracket():
    with pytest.raises(RootFindingError):
        find_root_bracketed(lambda x: x * x + 1, -1.0, 1.0)


@given(st.floats(-5.0, 5.0))
def test_brent_on_shifted_cubic(c):
    r = find_root_bracketed(lambda x: x**3 - c, -3.0, 3.0, tol=0.0)
    assert r.root == pytest.approx(math.copysign(abs(c) ** (1 / 3), c), abs=1e-13)


def test_richardson_removes_leading_orders():
    f = lambda h: 2.0 + 0.3 * h**2 - 0.7 * h**4
    vals = [f(0.1 / 2**i) for i in range(3)]
    assert richardson(vals, orders=(2, 4)) == pytest.approx(2.0, abs=1e-14)


@given(st.floats(0.1, 3.0), st.floats(0.1, 10.0))
def test_power_law_fit_is_exact_for_power_laws(p, c):
    x = np.geomspace(1e-3, 1e-1, 5)
    q, cc = fit_power_law(x, c * x**p)
    assert q == pytest.approx(p, abs=1e-10)
    assert cc == pytest.approx(c, rel=1e-9)


def test_airy_at_origin_from_gamma():
    assert airy_ai(0.0) == pytest.approx(3 ** (-2 / 3) / math.gamma(2 / 3), rel=1e-15)
    assert airy_ai_prime(0.0) == pytest.approx(-(3 ** (-1 / 3)) / math.gamma(1 / 3), rel=1e-15)


def test_airy_zeros_interlace():
    for k in range(1, 6):
        assert airy_prime_zero(k) > airy_zero(k) > airy_prime_zero(k + 1)
        assert airy_zero(k + 1) < airy_zero(k)
    assert abs(airy_ai(airy_zero(1))) < 1e-12
    assert abs(airy_ai_prime(airy_prime_zero(1))) < 1e-12


def test_k0_logarithmic_at_origin():
    from bo_molecule.specfun import EULER_GAMMA

    for x in (1e-4, 1e-6, 1e-8):
        assert bessel_k0(x) == pytest.approx(-math.log(x / 2) - EULER_GAMMA, rel=x)


@given(st.floats(0.1, 50.0))
def test_bessel_recurrence(x):
    # K2 from the recurrence agrees with the cosh representation via K2 = K0 + 2 K1 / x
    k2 = bessel_k0e(x) + 2.0 * bessel_k1e(x) / x
    ref = float(k_cosh_integral(2, x) * mp.exp(x))
    assert k2 == pytest.approx(ref, rel=1e-8)
