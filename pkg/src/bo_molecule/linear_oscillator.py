"""Heavy-pair levels in the linear well ``g |z|``.

With ``beta**3 = 2 mu g / hbar**2`` the Schrodinger equation becomes the
Airy equation in ``s = beta |z| + sigma_n``.  Even states need
``Ai'(sigma_n) = 0``, odd states ``Ai(sigma_n) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .nonrel_centers import PhysicalParams
from .specfun import airy, airy_ai, airy_prime_zero, airy_zero, integrate

__all__ = [
    "AiryLevel",
    "sigma",
    "airy_level",
    "level",
    "wavefunction",
    "wavefunction_derivative",
    "expect_abs_z",
    "expect_z2",
    "sigma_moment",
    "spectrum",
]

# Ai(s)^2 is below 1e-40 beyond s = 13, so integrals over [sigma_n, inf)
# are cut there
_AIRY_TAIL = 13.0


@dataclass(frozen=True)
class AiryLevel:
    """One vibrational level of the linear well.

    ``deltaE`` is measured from the bottom of the well; ``slope`` is g and
    ``beta`` the inverse length scale.
    """

    n: int
    parity: str
    sigma_n: float
    deltaE: float
    C_n: float
    beta: float
    slope: float
    reduced_mass: float
    hbar: float = 1.0


@lru_cache(maxsize=256)
def sigma(n: int) -> float:
    """Dimensionless root for level n (even n: Ai' zeros, odd n: Ai zeros)."""
    if n < 0:
        raise ValueError(f"level index must be >= 0, got {n}")
    if n % 2 == 0:
        return airy_prime_zero(n // 2 + 1)
    return airy_zero((n + 1) // 2)


def _norm_constant(s: float) -> float:
    ai, aip = airy(s)
    return 1.0 / math.sqrt(2.0 * (aip * aip - s * ai * ai))


def airy_level(n: int, slope: float, reduced_mass: float, hbar: float = 1.0) -> AiryLevel:
    """Level n of ``-(hbar^2/2 mu) psi'' + slope |z| psi = E psi``."""
    if not (slope > 0 and reduced_mass > 0 and hbar > 0):
        raise ValueError("slope, reduced mass and hbar must be positive")
    s = sigma(n)
    beta = (2.0 * reduced_mass * slope / hbar**2) ** (1.0 / 3.0)
    return AiryLevel(
        n=n,
        parity="even" if n % 2 == 0 else "odd",
        sigma_n=s,
        deltaE=-s * slope / beta,
        C_n=_norm_constant(s),
        beta=beta,
        slope=slope,
        reduced_mass=reduced_mass,
        hbar=hbar,
    )


def level(params: PhysicalParams, n: int) -> AiryLevel:
    """Level n for the linearised Born-Oppenheimer potential of ``params``."""
    return airy_level(n, params.linear_slope, params.mu, params.hbar)


def wavefunction(lv: AiryLevel, z):
    z = np.asarray(z, dtype=float)
    amp = lv.C_n * math.sqrt(lv.beta) * airy_ai(lv.beta * np.abs(z) + lv.sigma_n)
    if lv.parity == "odd":
        amp = np.sign(z) * amp
    return float(amp) if np.ndim(amp) == 0 else amp


def wavefunction_derivative(lv: AiryLevel, z):
    """d psi / dz; at the origin the even-state derivative is taken as 0."""
    z = np.asarray(z, dtype=float)
    _, aip = airy(lv.beta * np.abs(z) + lv.sigma_n)
    d = lv.C_n * lv.beta**1.5 * aip
    if lv.parity == "even":
        d = np.sign(z) * d
    return float(d) if np.ndim(d) == 0 else d


def sigma_moment(n: int, weight) -> float:
    """``2 C_n^2 int_{sigma_n}^inf weight(s - sigma_n) Ai(s)^2 ds``.

    This is the expectation of ``weight(beta |z|)`` in level n.
    """
    s0 = sigma(n)
    c2 = 2.0 * _norm_constant(s0) ** 2
    f = lambda s: weight(s - s0) * airy_ai(s) ** 2
    return c2 * integrate(f, s0, _AIRY_TAIL, tol=1e-14, rtol=1e-13).value


def expect_abs_z(lv: AiryLevel) -> float:
    """<|z|> = -2 sigma_n / (3 beta), from the virial relation."""
    return -2.0 * lv.sigma_n / (3.0 * lv.beta)


def expect_z2(lv: AiryLevel) -> float:
    """<z^2>: closed form for even levels, quadrature for odd ones."""
    s = lv.sigma_n
    if lv.parity == "even":
        return (8.0 / 15.0 * s * s - 1.0 / (5.0 * s)) / lv.beta**2
    return sigma_moment(lv.n, lambda t: t * t) / lv.beta**2


def spectrum(params: PhysicalParams, n_levels: int, bosonic: bool = False) -> list[AiryLevel]:
    """Levels n = 0 .. n_levels-1; ``bosonic`` keeps only the even ones."""
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    ns = range(n_levels)
    return [level(params, n) for n in ns if not bosonic or n % 2 == 0]
