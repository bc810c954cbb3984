"""Second-order correction to the heavy-pair levels.

All coefficients are dimensionless expectations in the Airy variable
``t = beta |z|`` of level n.  With ``S_n = <t^2>``:

    a_n = 3/16 S_n        kinetic-energy term
    b_n = 1/4  S_n        <z^2> term
    d_n = 3/16 W_n(eps)   cubic-resolvent term, W_n(0) = S_n

and the energy shift is ``-alpha_n nu0^2 (m/mu)^(2/3)`` with
``alpha_n = 2 (a_n + b_n + d_n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linear_oscillator import _AIRY_TAIL, _norm_constant, sigma, sigma_moment
from .nonrel_centers import PhysicalParams
from .specfun import airy, integrate

__all__ = [
    "SecondOrderCoeffs",
    "coeff_a",
    "coeff_b",
    "coeff_d",
    "second_order_coeffs",
    "second_order_energy",
    "ordering_ambiguity_magnitude",
    "resolvent_kernel",
    "spread_closed_form",
]


@dataclass(frozen=True)
class SecondOrderCoeffs:
    n: int
    a_n: float
    b_n: float
    d_n: float
    alpha_n: float


def spread_closed_form(n: int) -> float:
    """``<t^2>`` for an even level: 8/15 sigma^2 - 1/(5 sigma)."""
    if n % 2:
        raise ValueError("closed form exists only for even levels")
    s = sigma(n)
    return 8.0 / 15.0 * s * s - 1.0 / (5.0 * s)


@lru_cache(maxsize=64)
def _spread(n: int) -> float:
    return sigma_moment(n, lambda t: t * t)


def coeff_a(n: int) -> float:
    """Kinetic-energy coefficient, by quadrature over the Airy density."""
    return 3.0 / 16.0 * _spread(n)


def coeff_b(n: int, closed_form: bool = True) -> float:
    """Spread coefficient; the closed form is used for even n unless disabled."""
    if closed_form and n % 2 == 0:
        return 0.25 * spread_closed_form(n)
    return 0.25 * _spread(n)


def _cubic_profile(y):
    """Shape of the cubic resolvent kernel and its first two derivatives."""
    e = np.exp(-y)
    v = e * (1.0 + y + y * y / 3.0)
    dv = -e * y * (1.0 + y) / 3.0
    d2v = e * (y * y - y - 1.0) / 3.0
    return v, dv, d2v


@lru_cache(maxsize=256)
def coeff_d(n: int, epsilon: float = 0.0) -> float:
    """Cubic-resolvent coefficient with symmetric operator ordering.

    ``epsilon = (m/mu)^(1/3)`` keeps the finite-mass profile of the
    kernel; the default 0 is the leading-order value that enters the
    second-order energy.
    """
    s0 = sigma(n)
    c2 = 2.0 * _norm_constant(s0) ** 2

    def integrand(s):
        t = s - s0
        ai, aip = airy(s)
        v, dv, d2v = _cubic_profile(epsilon * t)
        plain = t * t * v * ai * ai
        ordered = (2.0 / 3.0) * (epsilon**2 * t * d2v * ai * ai + 2.0 * epsilon * t * dv * ai * aip)
        return plain + ordered

    w = c2 * integrate(integrand, s0, _AIRY_TAIL, tol=1e-14, rtol=1e-13).value
    return 3.0 / 16.0 * w


def second_order_coeffs(n: int) -> SecondOrderCoeffs:
    a, b, d = coeff_a(n), coeff_b(n), coeff_d(n)
    return SecondOrderCoeffs(n, a, b, d, 2.0 * (a + b + d))


def second_order_energy(params: PhysicalParams, n: int) -> float:
    """Second-order level shift ``-alpha_n nu0^2 (m/mu)^(2/3)``."""
    alpha = second_order_coeffs(n).alpha_n
    return -alpha * params.nu0_sq * params.mass_ratio ** (2.0 / 3.0)


def ordering_ambiguity_magnitude(params: PhysicalParams, n: int) -> float:
    """Energy scale of the operator-ordering ambiguity for level n.

    Half the expectation of ``-(hbar^2/2mu) d^2/dz^2`` applied to the
    quadratic-resolvent profile ``exp(-y)(1+y)``, ``y = kappa0 |z|``,
    which is ``nu0^2 (m/mu) <exp(-y)(1-y)> / 2``.
    """
    eps = params.mass_ratio ** (1.0 / 3.0)
    avg = sigma_moment(n, lambda t: np.exp(-eps * t) * (1.0 - eps * t))
    return abs(0.5 * params.nu0_sq * params.mass_ratio * avg)


def resolvent_kernel(params: PhysicalParams, z, power: int):
    """Position-space kernel of ``(nu0^2 + q^2/2m)^(-power)``, power 1..3.

    Normalised as ``int dq/(2 pi hbar) exp(i q z/hbar) (...)^(-power)``.
    """
    nu = math.sqrt(params.nu0_sq)
    y = params.kappa0 * np.abs(np.asarray(z, dtype=float))
    pre = math.sqrt(2.0 * params.m) / params.hbar
    e = np.exp(-y)
    if power == 1:
        val = pre / (2.0 * nu) * e
    elif power == 2:
        val = pre / (4.0 * nu**3) * e * (1.0 + y)
    elif power == 3:
        val = pre / (16.0 * nu**5) * e * (3.0 + 3.0 * y + y * y)
    else:
        raise ValueError("power must be 1, 2 or 3")
    return float(val) if val.ndim == 0 else val
