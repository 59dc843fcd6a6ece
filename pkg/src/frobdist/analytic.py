"""Reference values: the exact d=3 limit density and tail, zeta, moments, constants."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from .core import support_min as _support_min
from .errors import UsageError

SQRT3 = math.sqrt(3.0)
TAIL_A = 9.0 / math.pi**2  # leading coefficient of Psi_3(R) R^2
TAIL_B = 33.0 / (2.0 * math.pi**2)  # next coefficient (R^-4)
CLOSURE_R = 1000.0

# First moment of the d=3 limit law, from quadrature (see moment_exact_d3); regression constant.
M31_FROZEN = 2.546479089470323


# pi^2 R^(2k+1) psi_3(R) for k = 1..12: the large-R expansion of the closed form (converges for R > 2)
_DENSITY_SERIES = (
    18.0, 66.0, 228.0, 3939 / 5, 13731 / 5, 48336 / 5, 2404083 / 70, 1722317 / 14,
    31074889 / 70, 620788261 / 385, 648020491 / 110, 1190015336 / 55,
)
_SERIES_FROM = 10.0  # truncation error ~5e-15 relative here, falling as R^-24


def _psi3_upper(R: float) -> float:
    if R >= _SERIES_FROM:
        u2 = 1.0 / (R * R)
        acc = 0.0
        for c in reversed(_DENSITY_SERIES):
            acc = acc * u2 + c
        return acc * u2 / (R * math.pi**2)
    # R > 2 branch.  1 - x is expanded without cancellation and arccos is taken
    # through arcsin of a half-angle.  The two terms still cancel to O(R^-3), losing
    # about R^2 ulps, hence the series above for large R.
    s3 = math.sqrt(R * R - 3.0)
    s4 = math.sqrt(R * R - 4.0)
    one_minus_x = 3.0 / (s3 * (R + s4) * (s3 + s4) * (R + s3))
    theta = 2.0 * math.asin(min(1.0, math.sqrt(0.5 * one_minus_x)))
    if s4 == 0.0:
        return 12.0 / math.pi**2 * R * SQRT3 * theta  # s4 log(s4^2 / s3^2) -> 0
    log_term = math.log1p(-1.0 / (R * R - 3.0))
    return 12.0 / math.pi**2 * (R * SQRT3 * theta + 1.5 * s4 * log_term)


def _psi3_middle(R: float) -> float:
    return 12.0 / math.pi * (R / SQRT3 - math.sqrt(max(0.0, 4.0 - R * R)))


def psi3_density(R: float) -> float:
    """Limit density of f(a)/sqrt(a1 a2 a3) for d = 3."""
    if R < 0:
        raise UsageError("R must be non-negative")
    if R <= SQRT3:
        return 0.0
    if R <= 2.0:
        return _psi3_middle(R)
    return _psi3_upper(R)


def psi3_one_sided(R: float, side: str) -> float:
    """Limit of psi3_density at R from the left or right, using the branch formula of that side.

    At the knots sqrt3 and 2 the density has square-root cusps, so finite-difference
    probes measure slope rather than continuity; this evaluates the limits directly.
    """
    if side not in ("left", "right"):
        raise UsageError("side must be 'left' or 'right'")
    below = side == "left"
    if R < SQRT3 or (R == SQRT3 and below):
        return 0.0
    if R < 2.0 or (R == 2.0 and below):
        return _psi3_middle(R)
    return _psi3_upper(R)


def _asymptotic_tail(R: float) -> float:
    return TAIL_A / R**2 + TAIL_B / R**4


def _integrate(lo: float, hi: float, fn=psi3_density) -> float:
    if hi <= lo:
        return 0.0
    knots = [lo] + [k for k in (SQRT3, 2.0, 3.0, 10.0, 100.0) if lo < k < hi] + [hi]
    total = 0.0
    with warnings.catch_warnings():
        # roundoff warnings on very short panels: the result is already at machine precision
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(knots[:-1], knots[1:]):
            val, _ = integrate.quad(fn, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)
            total += val
    return total


def psi3_tail(R: float) -> float:
    """Psi_3(R): limiting probability that the normalized f exceeds R."""
    if R < 0:
        raise UsageError("R must be non-negative")
    if R <= SQRT3:
        return 1.0
    if R <= 2.0:
        return 1.0 - _integrate(SQRT3, R)
    if R >= CLOSURE_R:
        return _asymptotic_tail(R)
    # integrating the short upper piece keeps the absolute error far below Psi_3(R)
    return _integrate(R, CLOSURE_R) + _asymptotic_tail(CLOSURE_R)


def psi3_total_mass() -> float:
    return _integrate(SQRT3, CLOSURE_R) + _asymptotic_tail(CLOSURE_R)


@lru_cache(maxsize=1)
def _cdf_spline():
    # Hermite interpolation of Psi_3 with its exact derivative; knots at sqrt3 and 2 are nodes.
    nodes = np.unique(np.concatenate([
        np.linspace(SQRT3, 2.0, 801),
        2.0 + np.geomspace(1e-10, 0.05, 1201),
        np.linspace(2.05, 4.0, 1501),
        np.geomspace(4.0, 200.0, 3001),
    ]))
    vals = np.empty_like(nodes)
    vals[-1] = psi3_tail(nodes[-1])
    for i in range(len(nodes) - 2, -1, -1):
        vals[i] = vals[i + 1] + _integrate(nodes[i], nodes[i + 1])
    slopes = np.array([-psi3_density(r) for r in nodes])
    return CubicHermiteSpline(nodes, vals, slopes), nodes[0], nodes[-1]


def psi3_cdf(R):
    """Vectorized 1 - Psi_3(R), suitable as a reference CDF for large samples."""
    spline, lo, hi = _cdf_spline()
    R = np.asarray(R, dtype=float)
    out = np.empty_like(R)
    below = R <= lo
    above = R >= hi
    mid = ~(below | above)
    out[below] = 0.0
    out[mid] = 1.0 - spline(R[mid])
    out[above] = [1.0 - psi3_tail(float(r)) for r in R[above]]
    return out if out.ndim else float(out)


def zeta_real(s: float) -> float:
    """Riemann zeta for real s > 1: partial sum plus Euler-Maclaurin tail."""
    if s <= 1:
        raise UsageError("zeta_real needs s > 1")
    N = 20
    head = math.fsum(n ** -s for n in range(1, N))
    tail = N ** (1 - s) / (s - 1) + 0.5 * N**-s
    # Bernoulli numbers B_2, B_4, ..., B_12
    bern = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730)
    rising = s  # s (s+1) ... (s+2k-2)
    for k, b in enumerate(bern, start=1):
        tail += b / math.factorial(2 * k) * rising * N ** (-s - 2 * k + 1)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
    return head + tail


def tail_constant_exact(d: int) -> float:
    """d / (2 zeta(d-1)), the coefficient of R^-(d-1) in Psi_d(R)."""
    if d < 3:
        raise UsageError("the tail law needs d >= 3")
    if d == 3:
        return TAIL_A  # zeta(2) = pi^2/6
    return d / (2.0 * zeta_real(d - 1))


def main_term(d: int, R: float) -> float:
    if R <= 0:
        raise UsageError("R must be positive")
    return tail_constant_exact(d) * R ** -(d - 1)


def moment_exact_d3(k: int) -> float:
    """k-th moment of the d=3 limit law; only k = 1 exists (k = 0 gives the mass)."""
    if k == 0:
        return psi3_total_mass()
    if k != 1:
        raise UsageError(f"the d=3 limit law has no moment of order {k} (only k = 1 exists)")
    body = _integrate(SQRT3, CLOSURE_R, fn=lambda r: r * psi3_density(r))
    # int_C^inf R psi(R) dR with psi ~ 2A R^-3 + 4B R^-5
    closure = 2.0 * TAIL_A / CLOSURE_R + 4.0 * TAIL_B / (3.0 * CLOSURE_R**3)
    return body + closure


def _bisect(fn, lo: float, hi: float, tol: float = 1e-15) -> float:
    flo = fn(lo)
    if flo * fn(hi) > 0:
        raise UsageError("bisection bracket does not change sign")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AnalyticConstants:
    eta0: float  # root of e*log(eta) + eta = 0

    @staticmethod
    def support_min(d: int) -> float:
        return _support_min(d)

    @staticmethod
    def tail_c(d: int) -> float:
        return tail_constant_exact(d)

    @property
    def concentration_alpha(self) -> float:
        return 1.0 + self.eta0


@lru_cache(maxsize=1)
def constants() -> AnalyticConstants:
    eta0 = _bisect(lambda x: math.e * math.log(x) + x, 0.5, 0.9)
    return AnalyticConstants(eta0=eta0)
