"""Relativistic light particle (hbar = c = 1).

The contact binding energy mu0 of the light particle solves
``1/lam = F(mu0)/pi`` with ``F(mu) = arccos(-mu/m) / sqrt(m^2 - mu^2)``,
which equals ``int_0^inf exp(mu t) K0(m t) dt``.  Writing
``mu = -m cos(theta)`` turns this into ``pi m sin(theta) = lam theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linear_oscillator import AiryLevel, airy_level
from .specfun import bessel_k0e, bessel_k1e, find_root_bracketed, integrate

__all__ = [
    "RelParams",
    "RelBinding",
    "CouplingOutOfRange",
    "DegenerateDenominator",
    "binding_function",
    "laplace_k0",
    "solve_mu0",
    "effective_slope",
    "bessel_shift_integral",
    "mu_exact",
    "rel_spectrum",
]


class CouplingOutOfRange(ValueError):
    """No bound state: the coupling must lie in (0, pi m)."""


class DegenerateDenominator(ArithmeticError):
    pass


@dataclass(frozen=True)
class RelParams:
    """Light mass m, heavy mass M and dimensionless coupling lam (hbar = c = 1)."""

    m: float
    M: float
    lam: float

    def __post_init__(self):
        for name in ("m", "M"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val!r}")
        if not math.isfinite(self.lam):
            raise ValueError("lam must be finite")

    def check_window(self):
        if not 0.0 < self.lam < math.pi * self.m:
            raise CouplingOutOfRange(
                f"coupling lam={self.lam:g} outside the bound-state window (0, pi*m={math.pi * self.m:g})"
            )


@dataclass(frozen=True)
class RelBinding:
    mu0: float
    slope: float
    residual: float


def binding_function(mu, m: float):
    """``arccos(-mu/m) / sqrt(m^2 - mu^2)`` for -m < mu < m, cancellation free."""
    u = np.asarray(mu, dtype=float) / m
    a, b = np.sqrt(1.0 + u), np.sqrt(1.0 - u)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = 2.0 * np.arctan2(a, b) / (m * a * b)
    val = np.where(a == 0.0, 1.0 / m, val)
    return float(val) if val.ndim == 0 else val


def _k0_exp_weighted(x, shift):
    """``exp(shift) * K0(x)`` without overflow."""
    return bessel_k0e(x) * np.exp(shift - x)


def laplace_k0(mu: float, m: float, tol: float = 1e-13) -> float:
    """``int_0^inf exp(mu t) K0(m t) dt`` by quadrature (requires mu < m)."""
    if not mu < m:
        raise ValueError("integral diverges for mu >= m")
    f = lambda t: _k0_exp_weighted(m * t, mu * t)
    scale = 1.0 / (m - mu)
    return integrate(f, 0.0, math.inf, tol=tol, rtol=tol, points=(min(1.0 / m, scale),)).value


def solve_mu0(rel: RelParams) -> RelBinding:
    """Light-particle energy at contact and the slope of the linear potential."""
    rel.check_window()
    m, lam = rel.m, rel.lam
    h = lambda th: math.pi * m * math.sin(th) - lam * th
    lo = 0.5 * math.pi
    while h(lo) <= 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise CouplingOutOfRange("coupling too close to pi*m to bracket the root")
    res = find_root_bracketed(h, lo, math.pi, tol=0.0)
    theta = res.root
    mu0 = -m * math.cos(theta)
    residual = binding_function(mu0, m) / math.pi - 1.0 / lam
    slope = effective_slope(rel, RelBinding(mu0, float("nan"), residual))
    return RelBinding(mu0, slope, residual)


def effective_slope(rel: RelParams, binding: RelBinding) -> float:
    """``(m^2 - mu0^2) lam / (4 (mu0 + lam/pi))``."""
    m, lam, mu0 = rel.m, rel.lam, binding.mu0
    den = mu0 + lam / math.pi
    if abs(den) < 1e-12 * m:
        raise DegenerateDenominator(f"mu0 + lam/pi = {den:g} vanishes")
    return 0.25 * (m * m - mu0 * mu0) * lam / den


def bessel_shift_integral(mu: float, m: float, z: float, rtol: float = 1e-13) -> float:
    """``(1/pi) int_0^inf exp(mu t) [K0(m sqrt(t^2+z^2)) - K0(m t)] dt``.

    Behaves as ``-|z|/2`` for small z.
    """
    if not mu < m:
        raise ValueError("integral diverges for mu >= m")
    z = abs(float(z))
    if z == 0.0:
        return 0.0

    def f(t):
        r = np.hypot(t, z)
        x = m * t
        dx = m * z * z / (r + t)  # m (r - t) without cancellation
        k0, k1 = bessel_k0e(x), bessel_k1e(x)
        # K0(x + dx) - K0(x) as a Taylor series in dx where the direct
        # difference would cancel
        with np.errstate(all="ignore"):
            series = dx * (-k1 + dx * (0.5 * (k0 + k1 / x) - dx / 6.0 * (k1 + k0 / x + 2.0 * k1 / (x * x))))
        small = dx < 1e-3 * np.minimum(x, 1.0)
        direct = bessel_k0e(m * r) * np.exp(-dx) - k0
        return np.exp((mu - m) * t) * np.where(small, series, direct)

    cuts = [c for c in (z, 10.0 * z, 100.0 * z, 1.0 / m) if c < 1.0 / m] + [1.0 / m]
    val = integrate(f, 0.0, math.inf, tol=rtol * z, rtol=rtol, points=cuts).value
    return val / math.pi


def mu_exact(rel: RelParams, z: float, binding: RelBinding | None = None, tol: float = 1e-15) -> float:
    """Light-particle energy at heavy separation z from the full equation.

    Solves ``1/lam = F(mu)/pi + I(mu, z)/2`` with I from
    :func:`bessel_shift_integral`; nested Brent over quadrature.
    """
    b = binding or solve_mu0(rel)
    z = abs(float(z))
    if z == 0.0:
        return b.mu0
    m, lam = rel.m, rel.lam
    g = lambda mu: binding_function(mu, m) / math.pi + 0.5 * bessel_shift_integral(mu, m, z) - 1.0 / lam
    lo, f_lo = b.mu0, g(b.mu0)
    step = max(2.0 * b.slope * z, 1e-14 * m)
    hi = min(b.mu0 + step, 0.5 * (b.mu0 + m))
    while g(hi) <= 0.0:
        lo = hi
        hi = 0.5 * (hi + m)
        if m - hi < 1e-14 * m:
            raise ArithmeticError(f"no bound solution at z={z}: mu reaches m")
    if f_lo > 0:
        raise ArithmeticError("root not bracketed above mu0")
    return find_root_bracketed(g, lo, hi, tol=tol / lam).root


def rel_spectrum(rel: RelParams, n_levels: int, binding: RelBinding | None = None) -> list[AiryLevel]:
    """Heavy-pair levels in the relativistic linear well ``s |z|``."""
    b = binding or solve_mu0(rel)
    return [airy_level(n, b.slope, rel.M / 2.0, 1.0) for n in range(n_levels)]
