"""Size of the terms dropped by the Born-Oppenheimer factorisation.

The product state ``phi(x; z) psi_n(z)`` leaves two families of
derivative terms out of the heavy equation: cross terms
``4 d_z phi d_z psi`` and second-derivative terms ``2 psi d_z^2 phi``.
Each family is split into named groups which are evaluated here from
their defining integrals, using the exact light state (with the exact
``kappa(z)``) and the Airy heavy state.  Each value is compared with a
Cauchy-Schwarz or leading-order bound whose mass scaling is known.

Inner x integrals are done on the kink-partitioned line: Gauss-Legendre
on ``[-z/2, z/2]`` and Gauss-Laguerre on the two exponential tails.  The
outer z integral is adaptive double-exponential quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linear_oscillator import AiryLevel, level, wavefunction, wavefunction_derivative
from .nonrel_centers import PhysicalParams, even_branch_q
from .specfun import fit_power_law, integrate

__all__ = [
    "TermRow",
    "TermSummary",
    "NeglectedTermTable",
    "TERM_ORDER",
    "ASYMPTOTIC_RATIOS",
    "light_state_profile",
    "inner_integrals",
    "neglected_terms",
    "neglected_term_table",
]

# nominal (m/mu) exponent of each bound; None marks a term that vanishes
# identically
TERM_ORDER: dict[str, float | None] = {
    "cross_1": 2.0 / 3.0,
    "cross_2": None,
    "cross_3": 1.0,
    "cross_4": 2.0 / 3.0,
    "second_1a": 2.0 / 3.0,
    "second_1b": 4.0 / 3.0,
    "second_1c": 1.0,
    "second_2": 1.0,
    "second_3a": 1.0,
    "second_3b": 1.0,
}

# M/m sweep deep enough that (m/mu)^(1/3) corrections to the fitted
# exponents stay below a few percent
ASYMPTOTIC_RATIOS = (1e4, 1e5, 1e6, 1e7)

_LEG_X, _LEG_W = np.polynomial.legendre.leggauss(40)
_LAG_X, _LAG_W = np.polynomial.laguerre.laggauss(48)


@dataclass(frozen=True)
class TermRow:
    term: str
    mass_ratio: float
    value: float
    bound: float


@dataclass(frozen=True)
class TermSummary:
    term: str
    fitted_exponent: float
    bound_exponent: float | None
    within_bound: bool

    @property
    def exponent_gap(self) -> float:
        if self.bound_exponent is None:
            return 0.0
        return self.fitted_exponent - self.bound_exponent


@dataclass
class NeglectedTermTable:
    """Values and bounds are divided by nu0^2."""

    rows: list[TermRow]
    summary: dict[str, TermSummary]
    level_index: int


def light_state_profile(params: PhysicalParams, z):
    """kappa, d kappa/dz, A, d ln A/dz for z > 0 (arrays)."""
    k0 = params.kappa0
    z = np.asarray(z, dtype=float)
    w = k0 * z
    q = even_branch_q(w)
    e = np.exp(-q * w)
    dq = -q * e / (2.0 + w * e)
    kappa = k0 * q
    dkappa = k0 * k0 * dq
    u = kappa * z
    eu = np.exp(-u)
    D = 1.0 + (1.0 + u) * eu
    dD = -u * eu * (kappa + dkappa * z)
    A = np.sqrt(0.5 * kappa / D)
    dlnA = 0.5 * (dkappa / kappa - dD / D)
    return kappa, dkappa, A, dlnA


def _x_nodes(z, kappa):
    """Kink-partitioned x nodes and weights for each z (shape (nz, nx))."""
    a = 0.5 * z[:, None]
    inner_x = a * _LEG_X[None, :]
    inner_w = a * _LEG_W[None, :]
    c = 2.0 * kappa[:, None]
    s = _LAG_X[None, :] / c
    tail_w = (_LAG_W * np.exp(_LAG_X))[None, :] / c
    x = np.concatenate([-a - s, inner_x, a + s], axis=1)
    wts = np.concatenate([tail_w, inner_w, tail_w], axis=1)
    return x, wts


def inner_integrals(params: PhysicalParams, z):
    """x integrals of the light-state combinations, per separation z > 0."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    kappa, _, A, _ = light_state_profile(params, z)
    x, wts = _x_nodes(z, kappa)
    k = kappa[:, None]
    a = 0.5 * z[:, None]
    dp, dm = np.abs(x + a), np.abs(x - a)
    ep, em = np.exp(-k * dp), np.exp(-k * dm)
    sp_, sm = np.sign(x + a), np.sign(x - a)
    dep, dem = -k * sp_ * ep, -k * sm * em
    Q = ep * dp + em * dm
    total = lambda f: np.sum(wts * f, axis=1)
    norm = total((ep + em) ** 2)
    # distributional second derivative: smooth part plus the -2 kappa delta at each center
    delta_part = 4.0 * kappa * (1.0 + np.exp(-kappa * z))
    return {
        "norm": norm,
        "exact_diff": total(ep * dep - em * dem),
        "log_ratio": total(ep * em * (-k * sp_ + k * sm)),
        "total_deriv": total(0.5 * (2.0 * ep * dep + 2.0 * em * dem)),
        "q_overlap": total((ep + em) * Q),
        "q_square": total(Q * Q),
        "slope_q": total((dep - dem) * Q),
        "curvature": kappa**2 * norm - delta_part,
        "gradient_sq": total((dep + dem) ** 2),
        "A": A,
    }


def _heavy_expectations(lv: AiryLevel):
    """kinetic energy, <z^2> and <|z|> of the heavy level by quadrature."""
    b = lv.beta
    top = (13.0 - lv.sigma_n) / b

    def both_sides(f):
        return 2.0 * integrate(f, 0.0, top, tol=1e-15, rtol=1e-12).value

    kin = lv.hbar**2 / (2.0 * lv.reduced_mass) * both_sides(lambda z: wavefunction_derivative(lv, z) ** 2)
    z2 = both_sides(lambda z: z * z * wavefunction(lv, z) ** 2)
    az = both_sides(lambda z: z * wavefunction(lv, z) ** 2)
    return kin, z2, az


def neglected_terms(params: PhysicalParams, n: int = 0) -> dict[str, tuple[float, float]]:
    """``{term: (value, bound)}`` in energy units for one parameter set."""
    lv = level(params, n)
    if lv.parity != "even":
        raise ValueError("the heavy state must be an even level")
    p = params.hbar**2 / (2.0 * params.mu)
    top = (13.0 - lv.sigma_n) / lv.beta

    def z_integral(kernel):
        def f(z):
            z = np.asarray(z, dtype=float)
            kappa, dkappa, A, dlnA = light_state_profile(params, z)
            psi = wavefunction(lv, z)
            dpsi = wavefunction_derivative(lv, z)
            I = inner_integrals(params, z)
            return kernel(psi, dpsi, kappa, dkappa, A, dlnA, I)

        # integrands are even in z
        return 2.0 * integrate(f, 0.0, top, tol=1e-16, rtol=1e-11).value

    vals = {
        "cross_1": -4.0 * p * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * dps * dl),
        "cross_2": -2.0 * p * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * dps * A**2 * I["exact_diff"]),
        "cross_3": -2.0 * p * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * dps * A**2 * I["log_ratio"]),
        "cross_4": 4.0 * p * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * dps * A**2 * dk * I["q_overlap"]),
        # -2p <A''/A>, with the kink of A at z = 0 moved onto psi by parts
        "second_1a": 4.0 * p * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * dps * dl)
        - 2.0 * p * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * ps * dl * dl),
        "second_1b": -4.0
        * p
        * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * ps * 2.0 * A**2 * dl * (I["log_ratio"] + I["total_deriv"])),
        "second_1c": -8.0 * p * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * ps * A**2 * I["curvature"]),
        "second_2": 2.0 * p * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * ps * A * (A * dl) * dk * I["q_overlap"]),
        "second_3a": 2.0 * p * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * ps * A**2 * dk * I["slope_q"]),
        "second_3b": -2.0 * p * z_integral(lambda ps, dps, k, dk, A, dl, I: ps * ps * A**2 * dk * dk * I["q_square"]),
    }

    kin, z2, az = _heavy_expectations(lv)
    nu0 = math.sqrt(params.nu0_sq)
    nu0_sq = params.nu0_sq
    k0 = params.kappa0
    ratio = params.mass_ratio
    cs = nu0 * math.sqrt(ratio) * math.sqrt(kin)
    # leading magnitude of d nu/dz times sqrt(2m)/hbar, i.e. |d kappa/dz| at contact
    dk0 = 0.5 * k0 * k0
    two_p = 2.0 * p
    bounds = {
        "cross_1": cs,
        "cross_2": 0.0,
        "cross_3": 16.0 * k0 * k0 * math.sqrt(p) * math.sqrt(kin) * math.sqrt(z2),
        "cross_4": 8.0 * math.sqrt(2.0) * cs,
        "second_1a": cs + 2.0 * p * (k0 / 4.0) ** 2,
        "second_1b": 8.0 * p * k0**3 * az,
        "second_1c": 8.0 * ratio * nu0_sq,
        "second_2": two_p * 4.0 * dk0 * dk0 / (k0 * k0),
        "second_3a": two_p * k0 * dk0 * 2.0 / k0,
        "second_3b": two_p * dk0 * dk0 / (k0 * k0),
    }
    return {k: (vals[k], bounds[k]) for k in vals}


def neglected_term_table(
    params: PhysicalParams, n: int = 0, mass_ratios: Sequence[float] = ASYMPTOTIC_RATIOS
) -> NeglectedTermTable:
    """Evaluate every group over a heavy-mass sweep and fit its scaling."""
    rows: list[TermRow] = []
    per_term: dict[str, list[tuple[float, float, float]]] = {k: [] for k in TERM_ORDER}
    for r in mass_ratios:
        p = PhysicalParams(params.m, float(r) * params.m, params.lam, params.hbar)
        for term, (val, bnd) in neglected_terms(p, n).items():
            rows.append(TermRow(term, float(r), val / p.nu0_sq, bnd / p.nu0_sq))
            per_term[term].append((p.mass_ratio, val / p.nu0_sq, bnd / p.nu0_sq))
    summary = {}
    for term, data in per_term.items():
        x = [d[0] for d in data]
        v = [d[1] for d in data]
        within = all(abs(d[1]) <= d[2] for d in data)
        nominal = TERM_ORDER[term]
        if nominal is None:
            fitted = float("nan")
            within = all(abs(d[1]) <= 1e-12 for d in data)
        else:
            fitted = fit_power_law(x, v)[0]
        summary[term] = TermSummary(term, fitted, nominal, within)
    return NeglectedTermTable(rows, summary, n)
