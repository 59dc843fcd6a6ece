"""The standard simplex: directional widths, gauge, Monte Carlo constants, 2-D covering radii.

Covering radius of Delta = {x >= 0, x1 + x2 <= 1} with respect to a lattice L:

    rho(L) = sup_c F(c),   F(c) = min{(p1 + p2) - (c1 + c2) : p in L, p >= c}.

F has gradient (-1, -1) wherever it is continuous and only jumps *up* when c
increases (feasible points drop out), so for every c' <= c* componentwise
F(c') <= F(c*) + |c* - c'|_1.  A cell whose corners are dominated by c*
therefore has the certified upper bound F(c*) + spread; evaluated values are
lower bounds.  Branch-and-bound on these two bounds yields the bracket.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .errors import BudgetError, UsageError
from .lattice import LatticeBasis
from .rng import block_ranges, block_rng, map_blocks

MC_BLOCK = 1 << 16
COVER_MAX_EVALS = 2_000_000
_EPS = 1e-10  # feasibility slack and evaluation offset; far below any tolerance we accept


@dataclass(frozen=True)
class Direction:
    v: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.v)
        object.__setattr__(self, "v", v)
        if len(v) < 2:
            raise UsageError("directions live in R^n with n >= 2")
        if abs(math.sqrt(sum(x * x for x in v)) - 1.0) > 1e-12:
            raise UsageError("direction must have unit length")

    @classmethod
    def normalized(cls, x: Sequence[float]) -> "Direction":
        r = math.sqrt(sum(t * t for t in x))
        return cls(tuple(t / r for t in x))


@dataclass(frozen=True)
class CoverInterval:
    lo: float
    hi: float
    evaluations: int = 0

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def exceeds(self, R: float) -> bool:
        """Certified rho(L) > R."""
        return R < self.lo


def width(v) -> float:
    """Width of Delta in direction v: max(0, v_i) - min(0, v_i)."""
    if not isinstance(v, Direction):
        v = Direction(tuple(v))
    return max(0.0, *v.v) - min(0.0, *v.v)


def simplex_gauge(x: Sequence[float]) -> float:
    """Least rho >= 0 with x in rho * Delta."""
    if any(t < 0 for t in x):
        return math.inf
    return float(sum(x))


# --- covering radius in dimension 2 ------------------------------------------------

@numba.njit(cache=True)
def _lagrange(b):
    u = b[0].copy()
    w = b[1].copy()
    if u @ u > w @ w:
        u, w = w, u
    for _ in range(10_000):
        q = np.round((u @ w) / (u @ u))
        w = w - q * u
        if w @ w < u @ u:
            u, w = w, u
        else:
            break
    return u, w


@numba.njit(cache=True)
def _eval_gap(cx, cy, u, w, det, bound):
    """F(c) with p = k*u + j*w; k runs over the long vector u so its range stays short."""
    ux, uy, wx, wy = u[0], u[1], w[0], w[1]
    k0 = (cx * wy - cy * wx) / det
    k1 = ((cx + bound) * wy - cy * wx) / det
    k2 = (cx * wy - (cy + bound) * wx) / det
    kmin = math.floor(min(k0, k1, k2)) - 1
    kmax = math.ceil(max(k0, k1, k2)) + 1
    S = wx + wy
    best = np.inf
    for k in range(kmin, kmax + 1):
        px, py = k * ux, k * uy
        jlo, jhi = -np.inf, np.inf
        ok = True
        for comp, pc, cc in ((wx, px, cx), (wy, py, cy)):
            if comp > 0:
                jlo = max(jlo, (cc - _EPS - pc) / comp)
            elif comp < 0:
                jhi = min(jhi, (cc - _EPS - pc) / comp)
            elif pc < cc - _EPS:
                ok = False
        if not ok:
            continue
        if S > 0 or (S == 0 and jlo > -np.inf):
            j = math.ceil(jlo)
            if j > jhi:
                continue
        else:
            j = math.floor(jhi)
            if j < jlo:
                continue
        val = k * (ux + uy) + j * S - (cx + cy)
        if val < best:
            best = val
    return best


@numba.njit(cache=True)
def _cell_bounds(s0, t0, hs, ht, u, w, det, bound):
    xmax = -np.inf
    ymax = -np.inf
    xmin = np.inf
    ymin = np.inf
    for ds in (0.0, hs):
        for dt in (0.0, ht):
            x = (s0 + ds) * u[0] + (t0 + dt) * w[0]
            y = (s0 + ds) * u[1] + (t0 + dt) * w[1]
            xmax = max(xmax, x)
            ymax = max(ymax, y)
            xmin = min(xmin, x)
            ymin = min(ymin, y)
    val = _eval_gap(xmax + _EPS, ymax + _EPS, u, w, det, bound)
    spread = (xmax - xmin) + (ymax - ymin)
    return val, val + spread + 4 * _EPS


@numba.njit(cache=True)
def _cover_bracket(basis, tol, max_evals, grid):
    u, w = _lagrange(basis)
    # loop over the long vector's coefficient
    long_v, short_v = w, u
    det = long_v[0] * short_v[1] - long_v[1] * short_v[0]
    bound = np.abs(u).sum() + np.abs(w).sum() + 1.0
    lo = -np.inf
    heap = [(np.inf, 0.0, 0.0, 0.0, 0.0)]
    heap.pop()
    h = 1.0 / grid
    evals = 0
    for i in range(grid):
        for j in range(grid):
            val, ub = _cell_bounds(i * h, j * h, h, h, long_v, short_v, det, bound)
            evals += 1
            lo = max(lo, val)
            heapq.heappush(heap, (-ub, i * h, j * h, h, h))
    while True:
        neg_ub, s0, t0, hs, ht = heapq.heappop(heap)
        hi = -neg_ub
        if hi - lo <= tol:
            return lo, hi, evals, True
        if evals >= max_evals:
            return lo, hi, evals, False
        # bisect along the physically longer side
        ls = hs * (abs(long_v[0]) + abs(long_v[1]))
        lt = ht * (abs(short_v[0]) + abs(short_v[1]))
        if ls >= lt:
            children = ((s0, t0, hs / 2, ht), (s0 + hs / 2, t0, hs / 2, ht))
        else:
            children = ((s0, t0, hs, ht / 2), (s0, t0 + ht / 2, hs, ht / 2))
        for c in children:
            val, ub = _cell_bounds(c[0], c[1], c[2], c[3], long_v, short_v, det, bound)
            evals += 1
            if val > lo:
                lo = val
            if ub > lo:
                heapq.heappush(heap, (-ub, c[0], c[1], c[2], c[3]))
        if len(heap) == 0:
            return lo, lo, evals, True


def _check_unimodular(M: np.ndarray):
    if M.shape != (2, 2):
        raise UsageError("covering radii are computed for rank-2 lattices in R^2")
    if abs(abs(np.linalg.det(M)) - 1.0) > 1e-9:
        raise UsageError(f"basis determinant {np.linalg.det(M):.12g} is not +-1")


def covering_radius_2d(L, tol: float = 1e-3, max_evals: int = COVER_MAX_EVALS) -> CoverInterval:
    """Certified bracket [lo, hi] for the covering radius of Delta w.r.t. a unimodular L."""
    if tol < 1e-4:
        raise UsageError("tolerance must be at least 1e-4")
    M = L.matrix() if isinstance(L, LatticeBasis) else np.asarray(L, dtype=float)
    _check_unimodular(M)
    lo, hi, evals, done = _cover_bracket(np.ascontiguousarray(M), float(tol), int(max_evals), 8)
    interval = CoverInterval(float(lo), float(hi), int(evals))
    if not done:
        raise BudgetError(f"covering-radius bracket not within {tol} after {evals} evaluations", best=interval)
    return interval


def covering_radii_2d(bases: np.ndarray, tol: float = 1e-3, max_evals: int = COVER_MAX_EVALS):
    """Brackets for a stack of (2, 2) bases; returns arrays (lo, hi)."""
    bases = np.asarray(bases, dtype=float)
    lo = np.empty(len(bases))
    hi = np.empty(len(bases))
    for i, M in enumerate(bases):
        c = covering_radius_2d(M, tol=tol, max_evals=max_evals)
        lo[i], hi[i] = c.lo, c.hi
    return lo, hi


# --- Monte Carlo constants ----------------------------------------------------------------

def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^(n-1) in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def _spread(x: np.ndarray) -> np.ndarray:
    return np.maximum(x.max(axis=1), 0.0) - np.minimum(x.min(axis=1), 0.0)


def mc_width_integral(n: int, samples: int, seed: int, workers: int | None = None) -> float:
    """Monte Carlo estimate of the half-sphere integral of width(v)^-n (exact value n(n+1)/2)."""
    if n < 2 or samples < 1:
        raise UsageError("need n >= 2 and at least one sample")

    def block(args):
        b, lo, hi = args
        x = block_rng(seed, f"width{n}", b).standard_normal((hi - lo, n))
        ell = _spread(x) / np.sqrt(np.einsum("ij,ij->i", x, x))
        return float(np.sum(ell ** (-n)))

    ranges = block_ranges(samples, MC_BLOCK)
    sums = map_blocks(lambda i: block(ranges[i]), len(ranges), workers)
    return math.fsum(sums) / samples * sphere_area(n) / 2.0


def in_K(x: Sequence[float]) -> bool:
    """x in K = {x : max(0, x_i) - min(0, x_i) <= 1}."""
    return max(0.0, *x) - min(0.0, *x) <= 1.0


def mc_volume_K(n: int, samples: int, seed: int, workers: int | None = None) -> float:
    """Hit-or-miss estimate of vol(K) in [-1, 1]^n (exact value n + 1)."""
    if n < 2 or samples < 1:
        raise UsageError("need n >= 2 and at least one sample")

    def block(args):
        b, lo, hi = args
        x = block_rng(seed, f"volK{n}", b).uniform(-1.0, 1.0, size=(hi - lo, n))
        return int(np.count_nonzero(_spread(x) <= 1.0))

    ranges = block_ranges(samples, MC_BLOCK)
    hits = sum(map_blocks(lambda i: block(ranges[i]), len(ranges), workers))
    return 2.0**n * hits / samples
