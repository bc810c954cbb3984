"""Three-body molecule with contact interactions in one dimension.

Two heavy particles share one light particle through attractive delta
wells.  The Born-Oppenheimer treatment gives a linear effective potential
between the heavy pair, hence Airy-function vibrational levels, with
``(m/mu)^(1/3)`` as the expansion parameter.  Brute-force grid solvers in
:mod:`bo_molecule.oracle` provide the independent reference.
"""

from .linear_oscillator import AiryLevel, airy_level, expect_abs_z, expect_z2, level, sigma, spectrum
from .nonrel_centers import (
    FixedCenterSolution,
    LightWavefunction,
    NoOddBoundState,
    PhysicalParams,
    effective_potential_exact,
    effective_potential_linear,
    light_wavefunction,
    nu0_squared,
    solve_fixed_centers,
)
from .principal_corrections import (
    SecondOrderCoeffs,
    ordering_ambiguity_magnitude,
    second_order_coeffs,
    second_order_energy,
)
from .relativistic import (
    CouplingOutOfRange,
    RelBinding,
    RelParams,
    bessel_shift_integral,
    effective_slope,
    mu_exact,
    rel_spectrum,
    solve_mu0,
)
from .specfun import QuadratureError, RootFindingError

__version__ = "0.1.0"

__all__ = [
    "AiryLevel",
    "CouplingOutOfRange",
    "FixedCenterSolution",
    "LightWavefunction",
    "NoOddBoundState",
    "PhysicalParams",
    "QuadratureError",
    "RelBinding",
    "RelParams",
    "RootFindingError",
    "SecondOrderCoeffs",
    "airy_level",
    "bessel_shift_integral",
    "effective_potential_exact",
    "effective_potential_linear",
    "effective_slope",
    "expect_abs_z",
    "expect_z2",
    "level",
    "light_wavefunction",
    "mu_exact",
    "nu0_squared",
    "ordering_ambiguity_magnitude",
    "rel_spectrum",
    "second_order_coeffs",
    "second_order_energy",
    "sigma",
    "solve_fixed_centers",
    "solve_mu0",
    "spectrum",
]
