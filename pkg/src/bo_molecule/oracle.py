"""Brute-force finite-difference reference solutions.

* 1D three-point-stencil eigensolver with contact wells as node weights
  ``-strength/h``;
* the full three-body problem on a 2D grid in Jacobi coordinates
  ``z = x1 - x2``, ``y = x - (x1 + x2)/2``, where the contact lines
  ``y = +-z/2`` pass through lattice nodes because ``h_z = 2 h_y``;
* the Born-Oppenheimer-versus-exact scaling study.

Every discretisation here converges as h^2 (including the contact
wells), so two resolutions h and h/2 are combined by Richardson
extrapolation ``(4 E_{h/2} - E_h) / 3``.
"""

from __future__ import annotations

import contextlib
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh_tridiagonal
from threadpoolctl import threadpool_limits

from .linear_oscillator import level, sigma
from .nonrel_centers import PhysicalParams, even_branch_q
from .principal_corrections import second_order_energy
from .specfun import fit_power_law

__all__ = [
    "GridSpec",
    "GridEigenResult",
    "ThreeBodyResult",
    "ScalingReport",
    "GridAlignmentError",
    "MemoryBudgetExceeded",
    "OracleConvergenceError",
    "DEFAULT_NODE_BUDGET",
    "thread_limit",
    "uniform_grid_1d",
    "three_body_grid",
    "solve_1d_grid",
    "solve_fixed_centers_grid",
    "solve_3body_2d",
    "frozen_column_energies",
    "bo_spectrum_exact_potential",
    "scaling_study",
    "neglected_term_checks",
]

DEFAULT_NODE_BUDGET = 1200 * 600
_MIN_POINTS = 64


class GridAlignmentError(ValueError):
    """A contact well does not sit on a lattice node."""


class MemoryBudgetExceeded(ValueError):
    pass


class OracleConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[-L, L]`` per axis with Dirichlet walls.

    ``steps`` are point counts including both ends.  For the 2D solver the
    axes are ``(z, y)`` and ``alignment="contact-lines"`` demands
    ``h_z = 2 h_y``.
    """

    extents: tuple[float, ...]
    steps: tuple[int, ...]
    alignment: str = "none"
    boundary: str = "dirichlet"

    def __post_init__(self):
        if len(self.extents) != len(self.steps):
            raise ValueError("extents and steps must have the same length")
        for L, n in zip(self.extents, self.steps):
            if not L > 0:
                raise ValueError("extents must be positive")
            if n < _MIN_POINTS:
                raise ValueError(f"need at least {_MIN_POINTS} points per axis, got {n}")
        if self.boundary != "dirichlet":
            raise ValueError("only Dirichlet boundaries are supported")
        if self.alignment == "contact-lines":
            if len(self.steps) != 2 or any(n % 2 == 0 for n in self.steps):
                raise GridAlignmentError("contact-line grids are 2D with odd point counts")
            hz, hy = self.spacing
            if abs(hz - 2.0 * hy) > 1e-12 * hz:
                raise GridAlignmentError(f"need h_z = 2 h_y, got h_z={hz!r}, h_y={hy!r}")

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(2.0 * L / (n - 1) for L, n in zip(self.extents, self.steps))

    @property
    def size(self) -> int:
        return int(np.prod(self.steps))

    def refined(self) -> "GridSpec":
        """Same extents with half the spacing; node positions are kept."""
        return GridSpec(self.extents, tuple(2 * n - 1 for n in self.steps), self.alignment, self.boundary)


@dataclass(frozen=True)
class GridEigenResult:
    """Lowest eigenvalues at spacing h and h/2 and their extrapolation."""

    energies: tuple[float, ...]
    coarse: tuple[float, ...]
    fine: tuple[float, ...]
    spacing: float
    error_estimate: tuple[float, ...]


@dataclass(frozen=True)
class ThreeBodyResult:
    energy: float
    coarse: float
    fine: float
    spacing_y: float
    unknowns: tuple[int, int]
    seconds: float

    @property
    def error_estimate(self) -> float:
        return abs(self.fine - self.energy)


@dataclass
class ScalingReport:
    mass_ratios: list[float]
    E_exact: list[float]
    E_bo1: list[float]
    E_bo2: list[float]
    fitted_exponents: dict[str, float]
    nu0_sq: float
    delta_e0: list[float] = field(default_factory=list)
    extrapolation_error: list[float] = field(default_factory=list)
    converged: list[bool] = field(default_factory=list)

    @property
    def small_parameter(self) -> list[float]:
        """m / mu for each ratio M/m."""
        return [2.0 / r for r in self.mass_ratios]

    @property
    def bo1_error(self) -> list[float]:
        return [abs(e - b) / self.nu0_sq for e, b in zip(self.E_exact, self.E_bo1)]

    @property
    def bo2_error(self) -> list[float]:
        return [abs(e - b) / self.nu0_sq for e, b in zip(self.E_exact, self.E_bo2)]


@contextlib.contextmanager
def thread_limit(n: int | None = None):
    """Cap BLAS/OpenMP threads, by default from ``BO_MOLECULE_THREADS``."""
    if n is None:
        env = os.environ.get("BO_MOLECULE_THREADS", "").strip()
        n = int(env) if env else None
    if n is None:
        yield
        return
    if n < 1:
        raise ValueError("thread count must be >= 1")
    with threadpool_limits(limits=n):
        yield


def _richardson2(coarse: float, fine: float) -> float:
    return (4.0 * fine - coarse) / 3.0


# ---------------------------------------------------------------------------
# 1D
# ---------------------------------------------------------------------------


def uniform_grid_1d(half_width: float, step: float, align_to: Sequence[float] = ()) -> GridSpec:
    """1D grid whose spacing is at most ``step`` and puts ``align_to`` on nodes."""
    h = float(step)
    nonzero = [abs(p) for p in align_to if abs(p) > 0]
    if nonzero:
        # spacing must divide every well position; use the smallest one
        base = min(nonzero)
        h = base / math.ceil(base / h - 1e-9)
        for p in nonzero:
            k = p / h
            if abs(k - round(k)) > 1e-9 * max(1.0, k):
                raise GridAlignmentError(f"positions {list(align_to)} have no common grid spacing")
    n = max(math.ceil(half_width / h - 1e-9), (_MIN_POINTS - 1) // 2 + 1)
    return GridSpec((n * h,), (2 * n + 1,), "nodes" if nonzero else "none")


def _tridiagonal_levels(potential, mass, hbar, L, N, wells, k):
    x = np.linspace(-L, L, N)
    h = x[1] - x[0]
    t = hbar * hbar / (2.0 * mass * h * h)
    diag = np.full(N, 2.0 * t)
    if potential is not None:
        diag += np.asarray(potential(x), dtype=float)
    for pos, strength in wells:
        idx = int(round((pos + L) / h))
        if idx < 0 or idx >= N or abs(x[idx] - pos) > 1e-9 * h:
            raise GridAlignmentError(f"contact well at {pos} is not on a node (h={h})")
        diag[idx] -= strength / h
    off = np.full(N - 1, -t)
    vals = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, k - 1))
    return tuple(float(v) for v in vals), h


def solve_1d_grid(
    potential: Callable[[np.ndarray], np.ndarray] | None,
    reduced_mass: float,
    hbar: float,
    grid: GridSpec,
    n_levels: int = 1,
    wells: Sequence[tuple[float, float]] = (),
) -> GridEigenResult:
    """Lowest ``n_levels`` of ``-(hbar^2/2 mass) d^2/dx^2 + V`` on ``grid``.

    ``wells`` lists ``(position, strength)`` attractive contact wells.
    """
    if len(grid.steps) != 1:
        raise ValueError("solve_1d_grid needs a 1D grid")
    L = grid.extents[0]
    fine_grid = grid.refined()
    coarse, h = _tridiagonal_levels(potential, reduced_mass, hbar, L, grid.steps[0], wells, n_levels)
    fine, _ = _tridiagonal_levels(potential, reduced_mass, hbar, L, fine_grid.steps[0], wells, n_levels)
    extrap = tuple(_richardson2(c, f) for c, f in zip(coarse, fine))
    err = tuple(abs(f - e) for f, e in zip(fine, extrap))
    return GridEigenResult(extrap, coarse, fine, h, err)


def solve_fixed_centers_grid(params: PhysicalParams, z: float, grid: GridSpec | None = None) -> GridEigenResult:
    """Light particle with two contact wells at ``+-z/2`` on a 1D grid."""
    half = 0.5 * abs(z)
    k0 = params.kappa0
    if grid is None:
        grid = uniform_grid_1d(half + 25.0 / k0, 0.02 / k0, align_to=(half,))
    wells = [(-half, params.lam), (half, params.lam)] if half > 0 else [(0.0, 2.0 * params.lam)]
    return solve_1d_grid(None, params.m, params.hbar, grid, 1, wells)


def bo_spectrum_exact_potential(
    params: PhysicalParams, n_levels: int = 1, grid: GridSpec | None = None
) -> GridEigenResult:
    """Heavy-pair levels in the full fixed-center potential, measured from -nu0^2."""
    if grid is None:
        beta = level(params, 0).beta
        reach = (abs(sigma(n_levels - 1)) + 10.0) / beta
        grid = uniform_grid_1d(reach, 0.004 / beta)
    nu0_sq = params.nu0_sq
    k0 = params.kappa0

    def pot(z):
        q = even_branch_q(k0 * np.abs(z))
        return nu0_sq * (1.0 - q) * (1.0 + q)

    return solve_1d_grid(pot, params.mu, params.hbar, grid, n_levels)


# ---------------------------------------------------------------------------
# 2D three-body problem
# ---------------------------------------------------------------------------


def _jacobi_masses(params: PhysicalParams) -> tuple[float, float]:
    mu_z = params.M / 2.0
    mu_y = 2.0 * params.M * params.m / (2.0 * params.M + params.m)
    return mu_z, mu_y


def three_body_grid(params: PhysicalParams, h_y: float | None = None, y_decays: float = 10.0, z_widths: float = 9.0) -> GridSpec:
    """Contact-line grid covering ``y_decays/kappa0`` and ``z_widths/beta``."""
    k0 = params.kappa0
    hy = 0.02 / k0 if h_y is None else float(h_y)
    hz = 2.0 * hy
    beta = level(params, 0).beta
    ny = max(math.ceil(y_decays / k0 / hy), 32)
    nz = max(math.ceil(z_widths / beta / hz), 32)
    return GridSpec((nz * hz, ny * hy), (2 * nz + 1, 2 * ny + 1), "contact-lines")


def _second_difference(n_half: int, h: float, symmetric: bool) -> sp.csr_matrix:
    """``-d^2/dx^2`` on nodes ``-n..n``; the symmetric form acts on even functions.

    The even restriction ``P^T D P`` is rescaled by ``B^(-1/2)`` with
    ``B = P^T P`` so the reduced operator stays symmetric.
    """
    if not symmetric:
        n = 2 * n_half + 1
        return sp.diags([np.full(n - 1, -1.0), np.full(n, 2.0), np.full(n - 1, -1.0)], [-1, 0, 1], format="csr") / h**2
    n = n_half + 1
    off = np.full(n - 1, -1.0)
    off[0] = -math.sqrt(2.0)
    return sp.diags([off, np.full(n, 2.0), off], [-1, 0, 1], format="csr") / h**2


def _three_body_operator(params: PhysicalParams, grid: GridSpec, symmetric: bool, freeze_heavy: bool):
    if grid.alignment != "contact-lines":
        raise GridAlignmentError("the three-body grid must use contact-line alignment")
    hz, hy = grid.spacing
    nz, ny = (grid.steps[0] - 1) // 2, (grid.steps[1] - 1) // 2
    if nz > ny:
        raise GridAlignmentError("the y extent must cover the contact lines at the z boundary")
    mu_z, mu_y = _jacobi_masses(params)
    hb2 = params.hbar**2
    Dz = _second_difference(nz, hz, symmetric) * (hb2 / (2.0 * mu_z))
    Dy = _second_difference(ny, hy, symmetric) * (hb2 / (2.0 * mu_y))
    Iz = sp.identity(Dz.shape[0], format="csr")
    Iy = sp.identity(Dy.shape[0], format="csr")
    H = sp.kron(Iz, Dy, format="csr")
    if not freeze_heavy:
        H = H + sp.kron(Dz, Iy, format="csr")
    n_y = Dy.shape[0]
    weight = params.lam / hy
    diag = np.zeros(H.shape[0])
    if symmetric:
        i = np.arange(nz + 1)
        diag[i * n_y + i] = -weight
        diag[0] = -2.0 * weight
    else:
        i = np.arange(-nz, nz + 1)
        row = (i + nz) * n_y
        diag[row + ny + i] -= weight
        diag[row + ny - i] -= weight
    H = (H + sp.diags(diag)).tocsc()
    return H, (Dz.shape[0], n_y), weight, mu_y


def _contact_column_bound(params: PhysicalParams, grid: GridSpec) -> float:
    """Ground energy of the z = 0 column, a lower bound for the 2D ground state."""
    _, mu_y = _jacobi_masses(params)
    L, N = grid.extents[1], grid.steps[1]
    vals, _ = _tridiagonal_levels(None, mu_y, params.hbar, L, N, [(0.0, 2.0 * params.lam)], 1)
    return vals[0]


def _check_budget(grid: GridSpec, budget: int | None):
    limit = DEFAULT_NODE_BUDGET if budget is None else budget
    if grid.size > limit:
        raise MemoryBudgetExceeded(
            f"grid with {grid.size} nodes exceeds the budget of {limit}; pass a larger node_budget to override"
        )


def _lowest_eigenpair(H, shift: float):
    v0 = np.ones(H.shape[0])
    try:
        w, v = spla.eigsh(H, k=1, sigma=shift, which="LM", v0=v0, tol=0.0)
    except spla.ArpackNoConvergence as exc:  # pragma: no cover - depends on ARPACK
        raise OracleConvergenceError(f"shift-invert Lanczos did not converge: {exc}") from exc
    return float(w[0]), v[:, 0]


def _ground_energy(params, grid, symmetric=True, freeze_heavy=False, return_vector=False):
    H, shape, _, _ = _three_body_operator(params, grid, symmetric, freeze_heavy)
    floor = _contact_column_bound(params, grid)
    shift = floor - 0.05 * abs(floor) - 1e-12
    with thread_limit():
        e, v = _lowest_eigenpair(H, shift)
    if return_vector:
        return e, v.reshape(shape)
    return e


def solve_3body_2d(
    params: PhysicalParams,
    grid: GridSpec | None = None,
    symmetric: bool = True,
    freeze_heavy: bool = False,
    node_budget: int | None = None,
) -> ThreeBodyResult:
    """Ground energy of the full three-body problem, no Born-Oppenheimer step.

    ``symmetric`` solves in the sector even under ``z -> -z`` and
    ``y -> -y`` (a quarter of the unknowns); ``freeze_heavy`` drops the
    heavy kinetic energy.  The budget applies to the full fine grid.
    """
    grid = grid or three_body_grid(params)
    fine_grid = grid.refined()
    _check_budget(fine_grid, node_budget)
    t0 = time.perf_counter()
    coarse = _ground_energy(params, grid, symmetric, freeze_heavy)
    fine = _ground_energy(params, fine_grid, symmetric, freeze_heavy)
    n_unknowns = (grid.size, fine_grid.size)
    if symmetric:
        n_unknowns = tuple(((g.steps[0] + 1) // 2) * ((g.steps[1] + 1) // 2) for g in (grid, fine_grid))
    return ThreeBodyResult(
        energy=_richardson2(coarse, fine),
        coarse=coarse,
        fine=fine,
        spacing_y=grid.spacing[1],
        unknowns=n_unknowns,
        seconds=time.perf_counter() - t0,
    )


def ground_state_vector(params: PhysicalParams, grid: GridSpec) -> tuple[float, np.ndarray]:
    """Ground energy and eigenvector on the full (unreduced) grid, shape (n_z, n_y)."""
    _check_budget(grid, None)
    return _ground_energy(params, grid, symmetric=False, return_vector=True)


def frozen_column_energies(params: PhysicalParams, grid: GridSpec, columns: Sequence[int]) -> list[float]:
    """Lowest even-sector energy of each z column of the frozen-heavy operator.

    Column i sits at ``z = i h_z``; each is a fixed-center problem for a
    light particle of the Jacobi mass.
    """
    H, (n_z, n_y), _, _ = _three_body_operator(params, grid, symmetric=True, freeze_heavy=True)
    H = H.tocsr()
    out = []
    for i in columns:
        if not 0 <= i < n_z:
            raise IndexError(f"column {i} outside 0..{n_z - 1}")
        block = H[i * n_y : (i + 1) * n_y, i * n_y : (i + 1) * n_y]
        d = block.diagonal()
        e = block.diagonal(1)
        out.append(float(eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, 0))[0]))
    return out


# ---------------------------------------------------------------------------
# Scaling study
# ---------------------------------------------------------------------------


def scaling_study(
    params_base: PhysicalParams,
    mass_ratios: Sequence[float],
    h_y: float | None = None,
    node_budget: int | None = None,
) -> ScalingReport:
    """Exact three-body ground energies against first- and second-order BO.

    ``mass_ratios`` are values of M/m; ``h_y`` is the coarse light-axis
    spacing (default ``0.02/kappa0``).
    """
    ratios = [float(r) for r in mass_ratios]
    if len(ratios) < 4 or max(ratios) / min(ratios) < 8.0 - 1e-9:
        raise ValueError("need at least 4 mass ratios spanning a factor of 8 or more")
    m = params_base.m
    exact, bo1, bo2, de0, xerr, conv = [], [], [], [], [], []
    nu0_sq = params_base.nu0_sq
    for r in ratios:
        p = PhysicalParams(m, r * m, params_base.lam, params_base.hbar)
        res = solve_3body_2d(p, three_body_grid(p, h_y), node_budget=node_budget)
        d1 = level(p, 0).deltaE
        e1 = -nu0_sq + d1
        e2 = e1 + second_order_energy(p, 0)
        exact.append(res.energy)
        bo1.append(e1)
        bo2.append(e2)
        de0.append(d1)
        xerr.append(res.error_estimate)
        # the discretisation error must be small against the smallest error we fit
        conv.append(res.error_estimate < 0.05 * abs(res.energy - e2))
    x = [2.0 * m / (r * m) for r in ratios]
    fits = {
        "bo1_error": fit_power_law(x, [abs(a - b) / nu0_sq for a, b in zip(exact, bo1)])[0],
        "bo2_error": fit_power_law(x, [abs(a - b) / nu0_sq for a, b in zip(exact, bo2)])[0],
        "delta_e0": fit_power_law(x, [d / nu0_sq for d in de0])[0],
    }
    return ScalingReport(ratios, exact, bo1, bo2, fits, nu0_sq, de0, xerr, conv)


def neglected_term_checks(params: PhysicalParams, n: int = 0, mass_ratios: Sequence[float] | None = None):
    """Born-Oppenheimer neglected-term table; see :mod:`bo_molecule.dropped_terms`."""
    from .dropped_terms import ASYMPTOTIC_RATIOS, neglected_term_table

    if mass_ratios is None:
        mass_ratios = ASYMPTOTIC_RATIOS
    return neglected_term_table(params, n, mass_ratios)
