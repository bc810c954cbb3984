import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bo_molecule.linear_oscillator import level, sigma
from bo_molecule.nonrel_centers import PhysicalParams
from bo_molecule.oracle import bo_spectrum_exact_potential
from bo_molecule.principal_corrections import (
    coeff_a,
    coeff_b,
    coeff_d,
    ordering_ambiguity_magnitude,
    resolvent_kernel,
    second_order_coeffs,
    second_order_energy,
    spread_closed_form,
)
from bo_molecule.specfun import fit_power_law

mp.mp.dps = 25


@pytest.mark.parametrize("n", [0, 2, 4])
def test_kinetic_coefficient_closed_form(n):
    s = sigma(n)
    assert coeff_a(n) == pytest.approx(3 / 16 * (8 / 15 * s * s - 1 / (5 * s)), rel=1e-8)


@pytest.mark.parametrize("n", [0, 2, 4])
def test_spread_ratio(n):
    assert coeff_b(n) == pytest.approx(4 / 3 * coeff_a(n), rel=1e-10)
    assert coeff_b(n, closed_form=False) == pytest.approx(coeff_b(n), rel=1e-10)


def test_closed_form_only_for_even_levels():
    with pytest.raises(ValueError):
        spread_closed_form(1)


def test_cubic_coefficient_leading_value():
    # with the profile frozen at contact, d_n reduces to a_n
    for n in (0, 2):
        assert coeff_d(n) == pytest.approx(coeff_a(n), rel=1e-10)


def test_cubic_coefficient_continuous_in_epsilon():
    vals = [coeff_d(0, e) for e in (1e-2, 5e-3, 2.5e-3)]
    diffs = [abs(v - coeff_d(0)) for v in vals]
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[2] < 1e-2 * coeff_d(0)


def test_alpha_positive_and_total():
    c = second_order_coeffs(0)
    assert c.alpha_n > 0
    assert c.alpha_n == pytest.approx(2 * (c.a_n + c.b_n + c.d_n), rel=1e-15)
    assert c.alpha_n == pytest.approx(1.25 * spread_closed_form(0), rel=1e-8)


@given(st.floats(100.0, 1e6), st.sampled_from([0, 2, 4]))
def test_second_order_scaling(M, n):
    p = PhysicalParams(1.0, M, 1.0)
    e = second_order_energy(p, n)
    assert e < 0
    assert e == pytest.approx(-second_order_coeffs(n).alpha_n * p.nu0_sq * (2 / M) ** (2 / 3), rel=1e-12)


def test_second_order_matches_exact_potential_levels():
    # the level shift from the full fixed-center potential over the linear
    # one approaches the second-order term with O((m/mu)^(1/3)) corrections
    gaps = []
    for M in (1e3, 1e4, 1e5):
        p = PhysicalParams(1.0, M, 1.0)
        shift = bo_spectrum_exact_potential(p, 1).energies[0] - level(p, 0).deltaE
        eps = (2.0 / M) ** (1 / 3)
        gaps.append(abs(shift / second_order_energy(p, 0) - 1.0) / eps)
    assert gaps[-1] < 1.0
    # relative deviation over eps settles to a constant
    assert gaps[2] == pytest.approx(gaps[1], rel=0.1)


def test_ordering_ambiguity_scaling():
    ratios = [100, 200, 400, 800]
    x, y = [], []
    for r in ratios:
        p = PhysicalParams(1.0, float(r), 1.0)
        x.append(p.mass_ratio)
        y.append(ordering_ambiguity_magnitude(p, 0) / p.nu0_sq)
    exponent = fit_power_law(x, y)[0]
    assert 0.85 <= exponent <= 1.15


def test_ordering_ambiguity_smaller_than_second_order():
    p = PhysicalParams(1.0, 1e4, 1.0)
    assert ordering_ambiguity_magnitude(p, 0) < abs(second_order_energy(p, 0))


def fourier_kernel(p, z, power):
    """int dq/(2 pi hbar) cos(q z/hbar) (nu0^2 + q^2/2m)^(-power), numerically."""
    nu0_sq = mp.mpf(p.nu0_sq)
    f = lambda q: mp.cos(q * z / p.hbar) / (nu0_sq + q * q / (2 * p.m)) ** power
    if z == 0:
        return mp.quad(f, [0, mp.inf]) / (mp.pi * p.hbar)
    return mp.quadosc(f, [0, mp.inf], omega=z / p.hbar) / (mp.pi * p.hbar)


@pytest.mark.parametrize("power", [1, 2, 3])
@pytest.mark.parametrize("z", [0.0, 0.3, 1.1])
def test_resolvent_kernels_are_fourier_transforms(power, z):
    p = PhysicalParams(0.8, 100.0, 1.2, 1.0)
    assert resolvent_kernel(p, z, power) == pytest.approx(float(fourier_kernel(p, z, power)), rel=1e-10)


def test_resolvent_kernel_power_checked():
    with pytest.raises(ValueError):
        resolvent_kernel(PhysicalParams(1, 10, 1), 0.1, 4)


def test_kinetic_coefficient_grows_with_level():
    vals = [coeff_a(n) for n in range(5)]
    assert all(v > 0 for v in vals)
    assert vals == sorted(vals)


def test_order_hierarchy():
    for M in (20.0, 100.0, 1e4):
        p = PhysicalParams(1.0, M, 1.0)
        assert abs(second_order_energy(p, 0)) < level(p, 0).deltaE
    p = PhysicalParams(1.0, 400.0, 1.0)
    assert ordering_ambiguity_magnitude(p, 0) < 0.1 * abs(second_order_energy(p, 0))
