"""Light particle bound to two fixed attractive contact centers.

Internally everything is expressed through ``q = kappa/kappa0`` and
``w = kappa0 * z`` where ``kappa0 = 2 m lam / hbar**2``; the even and odd
branches then solve ``q = (1 +/- exp(-q w)) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .specfun import find_root_bracketed

__all__ = [
    "PhysicalParams",
    "FixedCenterSolution",
    "LightWavefunction",
    "NoOddBoundState",
    "nu0_squared",
    "solve_fixed_centers",
    "effective_potential_exact",
    "effective_potential_linear",
    "light_wavefunction",
]

Parity = Literal["even", "odd"]


class NoOddBoundState(ValueError):
    """The antisymmetric state is unbound for ``m*lam*z/hbar**2 <= 1``."""


@dataclass(frozen=True)
class PhysicalParams:
    """Masses, contact strength and hbar for the nonrelativistic problem.

    ``lam`` is the strength of each attractive contact well (energy x length).
    """

    m: float
    M: float
    lam: float
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "M", "lam", "hbar"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be a positive finite number, got {val!r}")

    @property
    def mu(self) -> float:
        """Reduced mass of the heavy pair."""
        return self.M / 2.0

    @property
    def kappa0(self) -> float:
        """Inverse decay length of the light particle at contact."""
        return 2.0 * self.m * self.lam / self.hbar**2

    @property
    def nu0_sq(self) -> float:
        return 2.0 * self.m * self.lam**2 / self.hbar**2

    @property
    def linear_slope(self) -> float:
        """Slope of the linearised effective potential, lam^3 (2m/hbar^2)^2."""
        return self.lam**3 * (2.0 * self.m / self.hbar**2) ** 2

    @property
    def mass_ratio(self) -> float:
        """m / mu, the small parameter of the expansion (cubed)."""
        return self.m / self.mu


@dataclass(frozen=True)
class FixedCenterSolution:
    z: float
    parity: Parity
    kappa: float
    nu_squared: float
    residual: float


@dataclass(frozen=True)
class LightWavefunction:
    """Normalised even light-particle state for centers at +-z/2."""

    params: PhysicalParams
    z: float
    kappa: float
    normalization: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        h = 0.5 * self.z
        val = self.normalization * (np.exp(-self.kappa * np.abs(x - h)) + np.exp(-self.kappa * np.abs(x + h)))
        return float(val) if val.ndim == 0 else val


def nu0_squared(params: PhysicalParams) -> float:
    """Binding energy magnitude at zero separation, 2 m lam^2 / hbar^2."""
    return params.nu0_sq


def _odd_lower_bracket(w: float) -> float:
    lo = 0.25
    while lo - 0.5 * (1.0 - math.exp(-lo * w)) >= 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise NoOddBoundState(f"odd branch root not bracketed at w={w}")
    return lo


def solve_fixed_centers(params: PhysicalParams, z: float, parity: Parity = "even") -> FixedCenterSolution:
    """Bound state of the light particle with the heavy pair at separation z."""
    z = abs(float(z))
    if not math.isfinite(z):
        raise ValueError("separation must be finite")
    w = params.kappa0 * z
    if parity == "even":
        fn = lambda q: q - 0.5 * (1.0 + math.exp(-q * w))
        lo = 0.5
    elif parity == "odd":
        if w <= 2.0:
            raise NoOddBoundState(
                f"no odd bound state: m*lam*z/hbar^2 = {w / 2:g} must exceed 1"
            )
        fn = lambda q: q - 0.5 * (1.0 - math.exp(-q * w))
        lo = _odd_lower_bracket(w)
    else:
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    hi = 1.0 if parity == "even" else 0.5
    res = find_root_bracketed(fn, lo, hi, tol=0.0)
    kappa = params.kappa0 * res.root
    nu2 = params.hbar**2 * kappa**2 / (2.0 * params.m)
    return FixedCenterSolution(z, parity, kappa, nu2, params.kappa0 * res.residual)


def even_branch_q(w):
    """Vectorised even-branch root ``q(w)`` of ``q = (1 + exp(-q w))/2``.

    Newton from q = 1; the map is increasing and concave so the iterates
    are monotone after the first step.
    """
    w = np.abs(np.asarray(w, dtype=float))
    q = np.ones_like(w)
    for _ in range(60):
        e = np.exp(-q * w)
        g = q - 0.5 * (1.0 + e)
        step = g / (1.0 + 0.5 * w * e)
        q = q - step
        if np.all(np.abs(step) <= 1e-16 * q):
            break
    return q


def effective_potential_exact(params: PhysicalParams, z):
    """Heavy-pair potential E(z) = -nu^2(z) from the even branch.

    Accepts scalar or array z; arrays use a vectorised Newton solve.
    """
    if np.ndim(z) == 0:
        return -solve_fixed_centers(params, float(z)).nu_squared
    q = even_branch_q(params.kappa0 * np.asarray(z, dtype=float))
    return -params.nu0_sq * q * q


def effective_potential_linear(params: PhysicalParams, z):
    """Linearised potential -nu0^2 + lam^3 (2m/hbar^2)^2 |z|."""
    val = -params.nu0_sq + params.linear_slope * np.abs(np.asarray(z, dtype=float))
    return float(val) if np.ndim(val) == 0 else val


def light_wavefunction(params: PhysicalParams, z: float) -> LightWavefunction:
    sol = solve_fixed_centers(params, z)
    k, az = sol.kappa, abs(float(z))
    norm_sq = 0.5 * k / (1.0 + (1.0 + k * az) * math.exp(-k * az))
    return LightWavefunction(params, az, k, math.sqrt(norm_sq))
