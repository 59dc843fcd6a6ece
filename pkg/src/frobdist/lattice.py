"""Kernel lattices, LLL reduction, successive minima, and random unimodular 2-D lattices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import VectorLike, as_vector
from .errors import BudgetError, UsageError
from .frobenius import TABLE_BUDGET, frobenius
from .rng import block_rng, draw_coprime_block

MAX_ENUM_RANK = 6
ENUM_NODE_BUDGET = 5 * 10**6
MU2_BLOCK = 1024


def _exact_det(M) -> Fraction:
    """Determinant of a small square matrix of ints/Fractions by elimination."""
    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            if A[r][c]:
                f = A[r][c] / A[c][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return det


def _is_integral(rows) -> bool:
    return all(isinstance(x, (int, np.integer)) for row in rows for x in row)


@dataclass(frozen=True)
class LatticeBasis:
    """Row basis of a rank-k lattice in R^m.

    Integral bases keep exact Python ints; ``det`` is the covolume in the span.
    """

    rows: tuple
    det: float = field(default=0.0)
    integral: bool = field(default=False)

    @classmethod
    def from_rows(cls, rows) -> "LatticeBasis":
        rows = [list(r) for r in (rows.tolist() if isinstance(rows, np.ndarray) else rows)]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise UsageError("basis rows must be non-empty and of equal length")
        if len(rows) > len(rows[0]):
            raise UsageError("more basis vectors than the ambient dimension")
        integral = _is_integral(rows)
        if integral:
            rows = tuple(tuple(int(x) for x in r) for r in rows)
            gram_det = _exact_det(_gram(rows))
            if gram_det <= 0:
                raise UsageError("basis rows are linearly dependent")
            det = math.sqrt(gram_det)
        else:
            rows = tuple(tuple(float(x) for x in r) for r in rows)
            arr = np.array(rows)
            gram_det = float(np.linalg.det(arr @ arr.T))
            scale = float(np.prod(np.einsum("ij,ij->i", arr, arr)))
            if not gram_det > 1e-24 * scale:
                raise UsageError("basis rows are linearly dependent")
            det = math.sqrt(gram_det)
        return cls(rows, det, integral)

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return len(self.rows[0])

    def matrix(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def gram(self):
        return _gram(self.rows)


def _gram(rows):
    return [[sum(x * y for x, y in zip(u, v)) for v in rows] for u in rows]


# --- exact unimodular bookkeeping -------------------------------------------------

def _column_reduce(v: Sequence[int]):
    """Unimodular W (and W^-1) with v W = g e_last, g = gcd(v) > 0."""
    v = [int(x) for x in v]
    m = len(v)
    W = [[int(i == j) for j in range(m)] for i in range(m)]
    Winv = [row[:] for row in W]
    last = m - 1

    def col_sub(i, j, q):  # column i -= q * column j
        v[i] -= q * v[j]
        for row in W:
            row[i] -= q * row[j]
        Winv[j] = [x + q * y for x, y in zip(Winv[j], Winv[i])]

    def swap(i, j):
        v[i], v[j] = v[j], v[i]
        for row in W:
            row[i], row[j] = row[j], row[i]
        Winv[i], Winv[j] = Winv[j], Winv[i]

    for i in range(m - 1):
        while v[i] != 0:
            col_sub(last, i, v[last] // v[i])
            swap(i, last)
    if v[last] < 0:
        v[last] = -v[last]
        for row in W:
            row[last] = -row[last]
        Winv[last] = [-x for x in Winv[last]]
    return W, Winv, v[last]


def unimodular_completion(p: Sequence[int]):
    """Integer matrix with determinant +-1 whose first row is the primitive vector p."""
    W, Winv, g = _column_reduce(p)
    if g != 1:
        raise UsageError(f"vector {tuple(p)} is not primitive (gcd {g})")
    return [Winv[-1]] + Winv[:-1]


# --- LLL -----------------------------------------------------------------------------

def _gso(B):
    n = len(B)
    Bf = [[float(x) for x in row] for row in B]
    mu = [[0.0] * n for _ in range(n)]
    star = []
    bn = []
    for i in range(n):
        v = Bf[i][:]
        for j in range(i):
            mu[i][j] = sum(x * y for x, y in zip(Bf[i], star[j])) / bn[j]
            v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
        star.append(v)
        bn.append(sum(x * x for x in v))
    return mu, bn


def _lll_rows(B, delta):
    B = [list(r) for r in B]
    n = len(B)
    integral = _is_integral(B)
    mu, bn = _gso(B)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                if not integral:
                    q = float(q)
                B[k] = [x - q * y for x, y in zip(B[k], B[j])]
                mu, bn = _gso(B)
        if bn[k] >= (delta - mu[k][k - 1] ** 2) * bn[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            mu, bn = _gso(B)
            k = max(k - 1, 1)
    return B


def lll_reduce(basis: LatticeBasis, delta: float = 0.99) -> LatticeBasis:
    if not 0.25 < delta < 1:
        raise UsageError("LLL needs 1/4 < delta < 1")
    if not isinstance(basis, LatticeBasis):
        basis = LatticeBasis.from_rows(basis)
    if basis.rank == 1:
        return basis
    reduced = _lll_rows(basis.rows, delta)
    return LatticeBasis.from_rows(reduced)


def kernel_lattice(a: VectorLike) -> LatticeBasis:
    """LLL-reduced integer basis of {x in Z^d : a . x = 0}."""
    v = as_vector(a)
    W, _, g = _column_reduce(v.coeffs)
    d = v.d
    rows = [[W[r][c] for r in range(d)] for c in range(d - 1)]
    return lll_reduce(LatticeBasis.from_rows(rows))


# --- successive minima ----------------------------------------------------------------

@dataclass(frozen=True)
class MinimaProfile:
    lambdas: tuple
    ratios: tuple
    vectors: tuple
    det: float

    @property
    def rank(self) -> int:
        return len(self.lambdas)

    def minkowski_bounds(self):
        """(lower, value, upper) for (2^k/k!) det <= prod(lambda) vol(B_k) <= 2^k det."""
        k = self.rank
        ball = math.pi ** (k / 2) / math.gamma(k / 2 + 1)
        value = math.prod(self.lambdas) * ball
        return 2**k / math.factorial(k) * self.det, value, 2**k * self.det

    def sandwich_holds(self, rtol: float = 1e-9) -> bool:
        lo, val, hi = self.minkowski_bounds()
        return lo * (1 - rtol) <= val <= hi * (1 + rtol)


def _norm_sq(v):
    return sum(x * x for x in v)


def _shortest_outside(B, j0, budget):
    """Shortest v = sum c_i B_i with (c_j0, ..., c_n-1) != 0, by depth-first enumeration.

    Floating Gram-Schmidt only prunes; candidate lengths are compared exactly
    (integer arithmetic for integral bases).
    """
    n = len(B)
    mu, bn = _gso(B)
    best_i = min(range(j0, n), key=lambda i: _norm_sq(B[i]))
    best_sq = _norm_sq(B[best_i])
    best_coef = [int(i == best_i) for i in range(n)]
    slack = 1e-9
    state = {"r2": float(best_sq) * (1 + slack) + 1e-300, "nodes": 0}
    coef = [0] * n

    def visit(level, partial):
        nonlocal best_sq, best_coef
        c = -sum(coef[l] * mu[l][level] for l in range(level + 1, n))
        rem = state["r2"] - partial
        if rem < 0:
            return
        w = math.sqrt(rem / bn[level])
        for x in range(math.ceil(c - w), math.floor(c + w) + 1):
            state["nodes"] += 1
            if state["nodes"] > budget:
                raise BudgetError(f"enumeration exceeded {budget} nodes")
            p = partial + (x - c) ** 2 * bn[level]
            if p > state["r2"]:
                continue
            coef[level] = x
            if level == j0 and not any(coef[j0:]):
                continue
            if level == 0:
                vec = [sum(coef[i] * B[i][t] for i in range(n)) for t in range(len(B[0]))]
                sq = _norm_sq(vec)
                if 0 < sq < best_sq:
                    best_sq, best_coef = sq, coef[:]
                    state["r2"] = float(sq) * (1 + slack)
            else:
                visit(level - 1, p)
        coef[level] = 0

    visit(n - 1, 0.0)
    return best_coef, best_sq


def successive_minima(basis: LatticeBasis, budget: int = ENUM_NODE_BUDGET) -> MinimaProfile:
    """Euclidean successive minima with realizing, linearly independent vectors."""
    if not isinstance(basis, LatticeBasis):
        basis = LatticeBasis.from_rows(basis)
    if basis.rank > MAX_ENUM_RANK:
        raise UsageError(f"rank {basis.rank} exceeds the enumeration limit {MAX_ENUM_RANK}")
    B = _lll_rows(basis.rows, 0.99) if basis.rank > 1 else [list(basis.rows[0])]
    n = len(B)
    lambdas, vectors = [], []
    for j in range(n):
        coef, sq = _shortest_outside(B, j, budget)
        vec = [sum(coef[i] * B[i][t] for i in range(n)) for t in range(len(B[0]))]
        lambdas.append(math.sqrt(sq))
        vectors.append(tuple(vec))
        # re-base so rows 0..j span the primitive sublattice through the chosen vectors
        outer = coef[j:]
        g = math.gcd(*outer) if len(outer) > 1 else abs(outer[0])
        U = unimodular_completion([c // g for c in outer])
        tail = [[sum(U[r][i] * B[j + i][t] for i in range(n - j)) for t in range(len(B[0]))]
                for r in range(n - j)]
        if not basis.integral:
            tail = [[float(x) for x in row] for row in tail]
        if n - j > 2:
            tail = [tail[0]] + _lll_rows(tail[1:], 0.99)
        B[j:] = tail
    ratios = tuple(lambdas[i + 1] / lambdas[i] for i in range(n - 1))
    return MinimaProfile(tuple(lambdas), ratios, tuple(vectors), basis.det)


def check_aliev_henk(a: VectorLike) -> dict:
    """f(a)/s(a) <= (n/2) |a|^(-1/n) lambda_n(Lambda_a) with n = d - 1."""
    v = as_vector(a)
    if v.d < 3:
        raise UsageError("the inequality is stated for d >= 3")
    n = v.d - 1
    lhs = frobenius(v).norm_s
    lam_n = successive_minima(kernel_lattice(v)).lambdas[-1]
    rhs = 0.5 * n * v.norm ** (-1.0 / n) * lam_n
    return {"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs + 1e-9}


# --- random unimodular lattices in dimension 2 -----------------------------------------

def in_fundamental_domain(x: float, y: float) -> bool:
    """Membership in {-1/2 < x <= 1/2, |z| >= 1, x < 0 => |z| > 1}."""
    if not (-0.5 < x <= 0.5) or y <= 0:
        return False
    r2 = x * x + y * y
    return r2 > 1 if x < 0 else r2 >= 1


def _mu2_block(seed: int, block: int) -> np.ndarray:
    """MU2_BLOCK bases (shape (MU2_BLOCK, 2, 2)) for one block of sample indices."""
    rng = block_rng(seed, "mu2", block)
    y0 = math.sqrt(3.0) / 2.0
    xs, ys, ths = [], [], []
    have = 0
    while have < MU2_BLOCK:
        m = 2 * (MU2_BLOCK - have) + 16
        x = 0.5 - rng.random(m)  # (-1/2, 1/2]
        y = y0 / (1.0 - rng.random(m))  # density ~ y^-2 on [sqrt3/2, inf)
        th = 2.0 * math.pi * rng.random(m)
        r2 = x * x + y * y
        ok = np.where(x < 0, r2 > 1.0, r2 >= 1.0)
        idx = np.flatnonzero(ok)[: MU2_BLOCK - have]
        xs.append(x[idx])
        ys.append(y[idx])
        ths.append(th[idx])
        have += idx.size
    x, y, th = (np.concatenate(t) for t in (xs, ys, ths))
    a1 = np.sqrt(y)
    c, s = np.cos(th), np.sin(th)
    # rows of n(x) diag(a1, 1/a1) k(theta)
    out = np.empty((MU2_BLOCK, 2, 2))
    r0 = np.stack([a1, x / a1], axis=1)
    r1 = np.stack([np.zeros_like(a1), 1.0 / a1], axis=1)
    for row, r in ((0, r0), (1, r1)):
        out[:, row, 0] = r[:, 0] * c - r[:, 1] * s
        out[:, row, 1] = r[:, 0] * s + r[:, 1] * c
    return out, y


def sample_mu2_batch(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Bases for sample indices start .. start+count-1, shape (count, 2, 2)."""
    out = np.empty((count, 2, 2))
    i = 0
    while i < count:
        idx = start + i
        block, off = divmod(idx, MU2_BLOCK)
        bases, _ = _mu2_block(seed, block)
        take = min(MU2_BLOCK - off, count - i)
        out[i : i + take] = bases[off : off + take]
        i += take
    return out


def sample_mu2_heights(seed: int, count: int) -> np.ndarray:
    """The imaginary parts y of the sampled points of F_H (for marginal checks)."""
    blocks = [_mu2_block(seed, b)[1] for b in range((count + MU2_BLOCK - 1) // MU2_BLOCK)]
    return np.concatenate(blocks)[:count]


def sample_mu2(seed: int, index: int = 0) -> LatticeBasis:
    """Covolume-one 2-D lattice distributed by the normalized Haar measure."""
    return LatticeBasis.from_rows(sample_mu2_batch(seed, 1, start=index)[0])


RATIO_THRESHOLDS = (1.0, 2.0, 4.0, 8.0)


def ratio_statistics(d: int, T: int, count: int, seed: int, thresholds=RATIO_THRESHOLDS):
    """Rows (j, r, fraction of sampled a with rho_j(Lambda_a) >= r)."""
    if d not in (3, 4, 5):
        raise UsageError("ratio statistics are tabulated for d in {3, 4, 5}")
    rng = block_rng(seed, "ratios", 0)
    vecs, _, _ = draw_coprime_block(rng, count, [1] * d, [T] * d, TABLE_BUDGET)
    ratios = np.array([successive_minima(kernel_lattice(row.tolist())).ratios for row in vecs])
    table = []
    for j in range(1, d - 1):
        for r in thresholds:
            table.append((j, r, float(np.mean(ratios[:, j - 1] >= r))))
    return table
