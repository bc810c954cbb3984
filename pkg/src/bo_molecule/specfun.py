"""Special functions, quadrature and root finding.

Everything here is self-contained (numpy only): Airy functions and their
zeros, modified Bessel functions K0 and K1, double-exponential quadrature
and a bracketed Brent root finder.  Functions accept scalars or arrays
unless stated otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QuadratureResult",
    "RootResult",
    "QuadratureError",
    "RootFindingError",
    "airy_ai",
    "airy_ai_prime",
    "airy",
    "airy_zero",
    "airy_prime_zero",
    "bessel_k0",
    "bessel_k1",
    "bessel_k0e",
    "bessel_k1e",
    "integrate",
    "integrate_semi_infinite",
    "find_root_bracketed",
    "richardson",
    "fit_power_law",
]

EULER_GAMMA = 0.57721566490153286060651209008240243104215933593992

# Ai(0) and Ai'(0) to 50 digits; the anchor tables below are built from them.
_AI0 = "0.35502805388781723926006318600418317639797917419918"
_AIP0 = "-0.25881940379280679840518356018920396347909113835493"


class QuadratureError(RuntimeError):
    """Raised when a quadrature does not converge; carries the best estimate."""

    def __init__(self, message: str, best: "QuadratureResult"):
        super().__init__(message)
        self.best = best


class RootFindingError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int

    def __float__(self) -> float:
        return self.root


# ---------------------------------------------------------------------------
# Airy functions
#
# Inside [_AIRY_LO - 0.5, _AIRY_HI + 0.5] Ai is evaluated by a local Taylor
# expansion about the nearest integer anchor.  The anchor values come from
# the Maclaurin series summed in 60-digit decimal arithmetic, which removes
# the cancellation that ruins the double-precision series for |x| > 3.
# Outside that window the classical asymptotic expansions are exact to
# rounding (zeta > 22).
# ---------------------------------------------------------------------------

_AIRY_LO = -16
_AIRY_HI = 10
_TAYLOR_TERMS = 32


def _maclaurin_airy(x: int, digits: int = 60) -> tuple[float, float]:
    with localcontext() as ctx:
        ctx.prec = digits
        xd = Decimal(x)
        a = [Decimal(_AI0), Decimal(_AIP0), Decimal(0)]
        val = a[0] + a[1] * xd
        der = a[1]
        power = xd  # x**(k-1) for the derivative
        k = 2
        tiny = Decimal(10) ** (-(digits - 5))
        quiet = 0
        while quiet < 6:
            if k >= 3:
                a.append(a[k - 3] / (k * (k - 1)))
            term_der = k * a[k] * power
            power *= xd
            term_val = a[k] * power
            val += term_val
            der += term_der
            if abs(term_val) < tiny and abs(term_der) < tiny:
                quiet += 1
            else:
                quiet = 0
            k += 1
        return float(val), float(der)


@lru_cache(maxsize=1)
def _airy_anchors() -> tuple[np.ndarray, np.ndarray]:
    xs = range(_AIRY_LO, _AIRY_HI + 1)
    vals = [_maclaurin_airy(x) for x in xs]
    ai = np.array([v[0] for v in vals])
    aip = np.array([v[1] for v in vals])
    ai.setflags(write=False)
    aip.setflags(write=False)
    return ai, aip


def _airy_taylor(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ai0, aip0 = _airy_anchors()
    x0 = np.rint(x)
    idx = (x0 - _AIRY_LO).astype(int)
    h = x - x0
    # y'' = x y about x0:  (k+2)(k+1) a_{k+2} = x0 a_k + a_{k-1}
    a_prev2 = ai0[idx].copy()  # a_{k-1}
    a_prev1 = aip0[idx].copy()  # a_k
    a_km1 = np.zeros_like(x)
    val = a_prev2 + a_prev1 * h
    der = a_prev1.copy()
    # coefficients a_0, a_1 known; generate a_2, a_3, ...
    coeffs = [a_prev2, a_prev1]
    hp = h.copy()  # h**(k-1)
    for k in range(2, _TAYLOR_TERMS):
        prev3 = coeffs[k - 3] if k >= 3 else a_km1
        ak = (x0 * coeffs[k - 2] + prev3) / (k * (k - 1))
        coeffs.append(ak)
        der = der + k * ak * hp
        hp = hp * h
        val = val + ak * hp
    return val, der


def _airy_u(kmax: int) -> list[float]:
    u = [1.0]
    for k in range(1, kmax + 1):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    return u


_U = _airy_u(40)
_V = [1.0] + [-(6 * k + 1) / (6 * k - 1) * _U[k] for k in range(1, 41)]


def _airy_asym_pos(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    zeta = 2.0 / 3.0 * x**1.5
    su = np.zeros_like(x)
    sv = np.zeros_like(x)
    sign = 1.0
    zp = np.ones_like(x)
    for k in range(30):
        su += sign * _U[k] / zp
        sv += sign * _V[k] / zp
        zp = zp * zeta
        sign = -sign
    pref = np.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    return pref * su / x**0.25, -pref * sv * x**0.25


def _airy_asym_neg(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = -x
    zeta = 2.0 / 3.0 * t**1.5
    pu_e = np.zeros_like(t)
    pu_o = np.zeros_like(t)
    pv_e = np.zeros_like(t)
    pv_o = np.zeros_like(t)
    for k in range(15):
        s = (-1.0) ** k
        pu_e += s * _U[2 * k] / zeta ** (2 * k)
        pu_o += s * _U[2 * k + 1] / zeta ** (2 * k + 1)
        pv_e += s * _V[2 * k] / zeta ** (2 * k)
        pv_o += s * _V[2 * k + 1] / zeta ** (2 * k + 1)
    c = np.cos(zeta - math.pi / 4)
    s_ = np.sin(zeta - math.pi / 4)
    rpi = 1.0 / math.sqrt(math.pi)
    ai = rpi * t**-0.25 * (c * pu_e + s_ * pu_o)
    aip = rpi * t**0.25 * (s_ * pv_e - c * pv_o)
    return ai, aip


def airy(x):
    """Return ``(Ai(x), Ai'(x))`` for real ``x`` (scalar or array)."""
    xa = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xa).ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)
    lo = flat < _AIRY_LO - 0.5
    hi = flat > _AIRY_HI + 0.5
    mid = ~(lo | hi)
    if np.any(mid):
        ai[mid], aip[mid] = _airy_taylor(flat[mid])
    if np.any(hi):
        ai[hi], aip[hi] = _airy_asym_pos(flat[hi])
    if np.any(lo):
        ai[lo], aip[lo] = _airy_asym_neg(flat[lo])
    if xa.ndim == 0:
        return float(ai[0]), float(aip[0])
    return ai.reshape(xa.shape), aip.reshape(xa.shape)


def airy_ai(x):
    """Airy function Ai(x)."""
    return airy(x)[0]


def airy_ai_prime(x):
    """Derivative Ai'(x)."""
    return airy(x)[1]


def _kth_negative_zero(fn: Callable, k: int) -> float:
    if k < 1:
        raise ValueError(f"zero index must be >= 1, got {k}")
    # zeros of Ai and Ai' are spaced by at least ~pi/sqrt(|x|); 0.05 is safe to |x| ~ 3000
    guess = (3 * math.pi * (4 * k - 1) / 8) ** (2.0 / 3.0)
    grid = -np.arange(0.0, guess + 2.0, 0.05)
    vals = fn(grid)
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if len(flips) < k:
        raise RootFindingError(f"could not bracket zero #{k}")
    i = flips[k - 1]
    res = find_root_bracketed(lambda t: float(fn(t)), grid[i + 1], grid[i], tol=0.0)
    return res.root


def airy_zero(k: int) -> float:
    """k-th zero of Ai on the negative axis (k = 1 gives -2.33810741...)."""
    return _kth_negative_zero(airy_ai, k)


def airy_prime_zero(k: int) -> float:
    """k-th zero of Ai' on the negative axis (k = 1 gives -1.01879297...)."""
    return _kth_negative_zero(airy_ai_prime, k)


# ---------------------------------------------------------------------------
# Modified Bessel functions K0, K1
# ---------------------------------------------------------------------------

_K_SERIES_MAX = 2.0
_K_ASYM_MIN = 20.0
_K_TRAP_H = 0.1
_K_TRAP_T = np.arange(0.0, 4.2, _K_TRAP_H)


def _k_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q = x * x / 4.0
    lg = np.log(x / 2.0)
    i0 = np.zeros_like(x)
    i1 = np.zeros_like(x)
    s0 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    term = np.ones_like(x)  # q^k / (k!)^2
    harmonic = 0.0
    for k in range(30):
        if k > 0:
            term = term * q / (k * k)
            harmonic += 1.0 / k
        i0 += term
        t1 = term / (k + 1)  # q^k / (k! (k+1)!)
        i1 += t1
        s0 += harmonic * term
        # psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
        s1 += (2 * harmonic + 1.0 / (k + 1) - 2 * EULER_GAMMA) * t1
    i1 *= x / 2.0
    k0 = -(lg + EULER_GAMMA) * i0 + s0
    k1 = 1.0 / x + i1 * lg - x / 4.0 * s1
    return k0, k1


def _k_trapezoid_scaled(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = _K_TRAP_T
    e = np.exp(-np.outer(x, np.cosh(t) - 1.0))
    w = np.full(t.shape, _K_TRAP_H)
    w[0] *= 0.5
    return e @ w, e @ (w * np.cosh(t))


def _k_asym_scaled(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    out = []
    for nu in (0.0, 1.0):
        mu = 4.0 * nu * nu
        s = np.ones_like(x)
        term = np.ones_like(x)
        for k in range(1, 40):
            term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
            s += term
        out.append(np.sqrt(math.pi / (2.0 * x)) * s)
    return out[0], out[1]


def _bessel_k_scaled(x) -> tuple[np.ndarray, np.ndarray, bool]:
    xa = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xa).ravel()
    if np.any(~(flat > 0)):
        raise ValueError("modified Bessel K requires x > 0")
    k0 = np.empty_like(flat)
    k1 = np.empty_like(flat)
    small = flat <= _K_SERIES_MAX
    large = flat >= _K_ASYM_MIN
    mid = ~(small | large)
    if np.any(small):
        a, b = _k_series(flat[small])
        scale = np.exp(flat[small])
        k0[small], k1[small] = a * scale, b * scale
    if np.any(mid):
        k0[mid], k1[mid] = _k_trapezoid_scaled(flat[mid])
    if np.any(large):
        k0[large], k1[large] = _k_asym_scaled(flat[large])
    return k0.reshape(xa.shape), k1.reshape(xa.shape), xa.ndim == 0


def bessel_k0e(x):
    """Exponentially scaled K0: ``exp(x) * K0(x)``."""
    k0, _, scalar = _bessel_k_scaled(x)
    return float(k0) if scalar else k0


def bessel_k1e(x):
    """Exponentially scaled K1: ``exp(x) * K1(x)``."""
    _, k1, scalar = _bessel_k_scaled(x)
    return float(k1) if scalar else k1


def bessel_k0(x):
    """Modified Bessel function of the second kind, order 0 (x > 0)."""
    k0, _, scalar = _bessel_k_scaled(x)
    val = k0 * np.exp(-np.asarray(x, dtype=float))
    return float(val) if scalar else val


def bessel_k1(x):
    """Modified Bessel function of the second kind, order 1 (x > 0)."""
    _, k1, scalar = _bessel_k_scaled(x)
    val = k1 * np.exp(-np.asarray(x, dtype=float))
    return float(val) if scalar else val


# ---------------------------------------------------------------------------
# Double-exponential quadrature
# ---------------------------------------------------------------------------

_DE_TMAX = 4.0
_DE_MAX_LEVEL = 9
_EPS = float(np.finfo(float).eps)


def _tanh_sinh_nodes(level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes on [-1, 1] as (offset from left end, offset from right end, weight)."""
    h = 2.0**-level
    t = np.arange(-_DE_TMAX, _DE_TMAX + 0.5 * h, h)
    u = 0.5 * math.pi * np.sinh(t)
    # 1 - tanh(u) = exp(-u)/cosh(u) without cancellation
    from_left = np.exp(u) / np.cosh(u)
    from_right = np.exp(-u) / np.cosh(u)
    w = h * 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    return from_left, from_right, w


def _exp_sinh_nodes(level: int) -> tuple[np.ndarray, np.ndarray]:
    h = 2.0**-level
    t = np.arange(-_DE_TMAX, _DE_TMAX + 0.5 * h, h)
    u = 0.5 * math.pi * np.sinh(t)
    x = np.exp(u)
    w = h * 0.5 * math.pi * np.cosh(t) * x
    return x, w


def _de_sum(f, a: float, b: float, level: int) -> tuple[float, int, float]:
    if math.isinf(b):
        off, w = _exp_sinh_nodes(level)
        keep = np.isfinite(off) & (off < 1e300)
        x = a + off[keep]
        w = w[keep]
    else:
        fl, fr, w = _tanh_sinh_nodes(level)
        half = 0.5 * (b - a)
        left = fl <= 1.0
        x = np.where(left, a + half * fl, b - half * fr)
        w = w * half
        keep = (x > a) & (x < b) & (w > 0)
        x, w = x[keep], w[keep]
    fx = np.asarray(f(x), dtype=float)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    contrib = w * fx
    bad = ~np.isfinite(contrib)
    if np.any(bad):
        # tolerate non-finite values only where the weight is negligible
        if np.any(np.abs(w[bad]) > 1e-200):
            raise FloatingPointError("integrand returned non-finite values")
        contrib = np.where(bad, 0.0, contrib)
    return float(math.fsum(contrib)), len(x), float(np.sum(np.abs(contrib)))


def _integrate_segment(f, a: float, b: float, tol: float, rtol: float, depth: int):
    prev, n_eval, _ = _de_sum(f, a, b, 1)
    err = math.inf
    for level in range(2, _DE_MAX_LEVEL + 1):
        cur, n, mass = _de_sum(f, a, b, level)
        n_eval += n
        err = abs(cur - prev)
        # below the rounding floor of the sum further halving cannot help
        floor = 64.0 * _EPS * mass
        if err <= max(tol, rtol * abs(cur), floor) and level >= 3:
            return QuadratureResult(cur, err, n_eval)
        prev = cur
    if depth > 0 and not math.isinf(b):
        mid = 0.5 * (a + b)
        left = _integrate_segment(f, a, mid, tol / 2, rtol, depth - 1)
        right = _integrate_segment(f, mid, b, tol / 2, rtol, depth - 1)
        return QuadratureResult(
            left.value + right.value,
            left.abs_error_estimate + right.abs_error_estimate,
            n_eval + left.evaluations + right.evaluations,
        )
    raise QuadratureError(
        f"quadrature on [{a}, {b}] did not reach tol={tol:g} (estimate {err:g})",
        QuadratureResult(prev, err, n_eval),
    )


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-12,
    rtol: float = 0.0,
    points: Sequence[float] = (),
    max_depth: int = 6,
) -> QuadratureResult:
    """Integrate a vectorised ``f`` over [a, b] (``b`` may be ``inf``).

    Finite pieces use the tanh-sinh rule, a semi-infinite tail the exp-sinh
    rule; both tolerate integrable endpoint singularities such as logs.
    Known kinks or singular points go in ``points`` so they become
    segment endpoints.  Convergence means the change between successive
    halvings of the step is below ``max(tol, rtol*|value|)``, or below the
    rounding floor ``64 eps sum|w f|`` when cancellation makes the
    requested tolerance unreachable.  A finite segment that does not
    converge is bisected up to ``max_depth`` times.
    """
    if not b > a:
        raise ValueError("integration requires b > a")
    cuts = sorted({float(p) for p in points if a < p < b})
    edges = [a, *cuts, b]
    n_seg = len(edges) - 1
    total, err, n_eval = 0.0, 0.0, 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = _integrate_segment(f, lo, hi, tol / n_seg, rtol, max_depth)
        total += r.value
        err += r.abs_error_estimate
        n_eval += r.evaluations
    return QuadratureResult(total, err, n_eval)


def integrate_semi_infinite(f, a: float, tol: float = 1e-12, rtol: float = 0.0) -> QuadratureResult:
    """Integrate ``f`` over [a, inf)."""
    if not tol > 0 and not rtol > 0:
        raise ValueError("a positive tolerance is required")
    return integrate(f, a, math.inf, tol=tol, rtol=rtol)


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------


def find_root_bracketed(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    xtol: float = 0.0,
    maxiter: int = 500,
) -> RootResult:
    """Brent's method on a sign-changing bracket.

    Stops when ``|f(x)| <= tol`` or when the bracket has shrunk to
    ``xtol`` plus a few ulps, whichever comes first.
    """
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return RootResult(a, 0.0, 0)
    if fb == 0.0:
        return RootResult(b, 0.0, 0)
    if not (np.isfinite(fa) and np.isfinite(fb)) or fa * fb > 0:
        raise RootFindingError(f"invalid bracket [{lo}, {hi}]: f = ({fa}, {fb})")
    c, fc = a, fa
    d = e = b - a
    eps = np.finfo(float).eps
    for it in range(1, maxiter + 1):
        if fb * fc > 0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * eps * abs(b) + 0.5 * xtol
        m = 0.5 * (c - b)
        if abs(fb) <= tol or abs(m) <= tol1:
            return RootResult(b, fb, it)
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                qq = fa / fc
                r = fb / fc
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0))
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, m)
        fb = f(b)
    raise RootFindingError(f"Brent iteration budget ({maxiter}) exhausted near {b}")


# ---------------------------------------------------------------------------
# Extrapolation and fitting helpers
# ---------------------------------------------------------------------------


def richardson(values: Sequence[float], ratio: float = 2.0, orders: Sequence[float] = (1, 2, 3, 4, 5, 6)) -> float:
    """Richardson tableau for ``values[i] = A(h / ratio**i)``.

    ``orders`` lists the successive error exponents to eliminate.
    """
    row = [float(v) for v in values]
    for p in orders[: len(row) - 1]:
        fac = ratio**p
        row = [(fac * row[i + 1] - row[i]) / (fac - 1.0) for i in range(len(row) - 1)]
    return row[0]


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit of ``log|y| = p log x + c``; returns ``(p, exp(c))``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.abs(np.asarray(y, dtype=float)))
    p, c = np.polyfit(lx, ly, 1)
    return float(p), float(math.exp(c))
