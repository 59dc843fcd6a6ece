"""Exact Frobenius numbers via residue tables (Apery sets modulo the smallest coefficient).

The main engine is the round-robin schedule: coefficients are merged into the
table one at a time, walking each gcd-orbit of Z/a_min once starting from its
minimum.  A Dijkstra engine over the same residue graph is kept as a second,
structurally different route for cross-checks.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numba
import numpy as np

from .core import (
    CoprimeVector,
    FrobeniusResult,
    VectorLike,
    as_vector,
    gcd_vector,
    prod_norm_factors,
    s_norms,
    schur_bound,
)
from .errors import CapacityError, UsageError

# Largest table modulus (a_min) accepted; 8 bytes per entry.
TABLE_BUDGET = 2 * 10**7
ORACLE_MAX_BOUND = 10**7
ENGINES = ("round_robin", "dijkstra")

_INF = np.iinfo(np.int64).max


@dataclass(frozen=True)
class ResidueTable:
    """entries[r] = least representable integer congruent to r mod ``modulus``."""

    modulus: int
    entries: np.ndarray

    @property
    def frobenius_number(self) -> int:
        return int(self.entries.max()) - self.modulus


@numba.njit(cache=True)
def _gcd(x, y):
    while y:
        x, y = y, x % y
    return x


@numba.njit(cache=True)
def _round_robin_table(a):
    # a: sorted ascending int64, a[0] is the modulus
    m = a[0]
    inf = np.iinfo(np.int64).max
    table = np.full(m, inf, dtype=np.int64)
    table[0] = 0
    for i in range(1, a.shape[0]):
        ai = a[i]
        if ai == a[i - 1] or ai % m == 0:
            continue
        d = _gcd(m, ai)
        for r in range(d):
            n = inf
            for q in range(r, m, d):
                if table[q] < n:
                    n = table[q]
            if n == inf:
                continue
            for _ in range(m // d - 1):
                n += ai
                p = n % m
                if table[p] < n:
                    n = table[p]
                table[p] = n
    return table


@numba.njit(cache=True, parallel=True)
def _batch_g(rows):
    out = np.empty(rows.shape[0], dtype=np.int64)
    for k in numba.prange(rows.shape[0]):
        a = rows[k]
        if a[0] == 1:
            out[k] = -1
        else:
            out[k] = _round_robin_table(a).max() - a[0]
    return out


def _dijkstra_table(a: list[int]) -> np.ndarray:
    m = a[0]
    steps = sorted({c % m for c in a[1:] if c % m})
    weight = {}
    for c in a[1:]:
        r = c % m
        if r and (r not in weight or c < weight[r]):
            weight[r] = c
    dist = [math.inf] * m
    dist[0] = 0
    heap = [(0, 0)]
    while heap:
        du, u = heapq.heappop(heap)
        if du > dist[u]:
            continue
        for r in steps:
            v = (u + r) % m
            nd = du + weight[r]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return np.array(dist, dtype=np.int64)


def residue_table(a: VectorLike, engine: str = "round_robin", budget: int = TABLE_BUDGET) -> ResidueTable:
    v = as_vector(a)
    coeffs = sorted(v.coeffs)
    m = coeffs[0]
    if m > budget:
        raise CapacityError(f"smallest coefficient {m} exceeds the residue-table budget {budget}")
    if engine == "round_robin":
        entries = _round_robin_table(np.array(coeffs, dtype=np.int64))
    elif engine == "dijkstra":
        entries = _dijkstra_table(coeffs)
    else:
        raise UsageError(f"unknown engine {engine!r}; choose from {ENGINES}")
    return ResidueTable(m, entries)


def frobenius(a: VectorLike, engine: str = "round_robin", budget: int = TABLE_BUDGET) -> FrobeniusResult:
    """g(a), f(a) = g(a) + sum(a), and both normalized values of f."""
    v = as_vector(a)
    if min(v.coeffs) == 1:
        g = -1
    else:
        g = residue_table(v, engine=engine, budget=budget).frobenius_number
    f = g + sum(v.coeffs)
    row = [v.coeffs]
    return FrobeniusResult(g, f, f / float(prod_norm_factors(row)[0]), f / float(s_norms(row)[0]))


def frobenius_g_batch(rows, budget: int = TABLE_BUDGET) -> np.ndarray:
    """g for every row of an (N, d) coprime integer array.

    Rows are processed independently (numba threads); the result does not
    depend on the thread count.
    """
    rows = np.sort(np.ascontiguousarray(rows, dtype=np.int64), axis=1)
    if rows.size and rows[:, 0].max() > budget:
        bad = int(rows[:, 0].max())
        raise CapacityError(f"smallest coefficient {bad} exceeds the residue-table budget {budget}")
    return _batch_g(rows)


def frobenius_dp_oracle(a: VectorLike, bound: int) -> int:
    """Largest integer in [0, bound] that is not a non-negative combination, else -1.

    Plain reachability over [0, bound]; sound only when bound >= schur_bound(a).
    """
    v = as_vector(a)
    if bound < schur_bound(v):
        raise UsageError(f"bound {bound} is below the Schur bound {schur_bound(v)}")
    if bound > ORACLE_MAX_BOUND:
        raise UsageError(f"bound {bound} exceeds the oracle limit {ORACLE_MAX_BOUND}")
    bound = max(bound, 0)
    reach = np.zeros(bound + 1, dtype=bool)
    reach[0] = True
    for c in sorted(set(v.coeffs)):
        if c > bound:
            continue
        # unbounded use of c: OR-accumulate along each residue chain mod c
        pad = (-len(reach)) % c
        grid = np.concatenate([reach, np.zeros(pad, dtype=bool)]).reshape(-1, c)
        reach = np.logical_or.accumulate(grid, axis=0).reshape(-1)[: bound + 1]
    missing = np.flatnonzero(~reach)
    return int(missing[-1]) if missing.size else -1


def sylvester(a1: int, a2: int) -> int:
    if a1 < 1 or a2 < 1 or math.gcd(a1, a2) != 1:
        raise UsageError(f"Sylvester's formula needs a coprime positive pair, got ({a1}, {a2})")
    return a1 * a2 - a1 - a2
