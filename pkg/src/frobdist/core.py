"""Integer-vector domain types, normalization factors and closed-form bounds."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np

from .errors import CapacityError, UsageError

# Per-coefficient refusal threshold; the Frobenius engine needs O(a_min) memory.
MAGNITUDE_CAP = 10**8


class NormalizationKind(enum.Enum):
    """Which factor divides f(a)."""

    PROD_POWER = "prod"  # (a_1 ... a_d)^(1/(d-1))
    S_OF_A = "s"  # s(a)

    @classmethod
    def parse(cls, text: str) -> "NormalizationKind":
        key = text.strip().lower()
        aliases = {
            "prod": cls.PROD_POWER,
            "prodpower": cls.PROD_POWER,
            "prod_power": cls.PROD_POWER,
            "norm_prod": cls.PROD_POWER,
            "s": cls.S_OF_A,
            "sofa": cls.S_OF_A,
            "s_of_a": cls.S_OF_A,
            "norm_s": cls.S_OF_A,
        }
        try:
            return aliases[key]
        except KeyError:
            raise UsageError(f"unknown normalization {text!r}") from None

    @property
    def column(self) -> str:
        return "norm_prod" if self is NormalizationKind.PROD_POWER else "norm_s"


@dataclass(frozen=True)
class CoprimeVector:
    """Positive integer vector of length >= 2 with overall gcd 1."""

    coeffs: tuple
    cap: int = MAGNITUDE_CAP

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 2:
            raise UsageError(f"need at least 2 coefficients, got {len(coeffs)}")
        if min(coeffs) < 1:
            raise UsageError(f"coefficients must be positive: {coeffs}")
        too_big = [c for c in coeffs if c > self.cap]
        if too_big:
            raise CapacityError(f"coefficient {too_big[0]} exceeds magnitude cap {self.cap}")
        if gcd_vector(coeffs) != 1:
            raise UsageError(f"coefficients are not coprime (gcd {gcd_vector(coeffs)}): {coeffs}")

    @property
    def d(self) -> int:
        return len(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    @property
    def norm_sq(self) -> int:
        return sum(c * c for c in self.coeffs)

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)


VectorLike = Union[CoprimeVector, Sequence[int]]


def as_vector(a: VectorLike) -> CoprimeVector:
    if isinstance(a, CoprimeVector):
        return a
    return CoprimeVector(tuple(a))


@dataclass(frozen=True)
class FrobeniusResult:
    g: int
    f: int
    norm_prod: float
    norm_s: float

    def normalized(self, kind: NormalizationKind) -> float:
        return self.norm_prod if kind is NormalizationKind.PROD_POWER else self.norm_s


def gcd_vector(coeffs: Sequence[int]) -> int:
    coeffs = list(coeffs)
    if not coeffs:
        raise UsageError("gcd of an empty sequence")
    return reduce(math.gcd, (abs(int(c)) for c in coeffs))


def _as_rows(A) -> np.ndarray:
    rows = np.sort(np.asarray(A, dtype=np.int64), axis=1)
    if rows.ndim != 2 or rows.shape[1] < 2:
        raise UsageError("expected an (N, d) array with d >= 2")
    return rows


def prod_norm_factors(A) -> np.ndarray:
    """Row-wise (a_1...a_d)^(1/(d-1)), accumulated in log space.

    Rows are sorted first so the result does not depend on coefficient order.
    """
    rows = _as_rows(A)
    d = rows.shape[1]
    logs = np.log(rows.astype(np.float64))
    acc = logs[:, 0].copy()
    for j in range(1, d):
        acc += logs[:, j]
    return np.exp(acc / (d - 1))


def s_norms(A) -> np.ndarray:
    """Row-wise s(a) = sum_j a_j sqrt(|a|^2 - a_j^2) / |a|^(1 - 1/(d-1))."""
    rows = _as_rows(A)
    d = rows.shape[1]
    sq = rows * rows  # exact in int64 below the magnitude cap
    total = sq.sum(axis=1)
    num = np.zeros(rows.shape[0])
    for j in range(d):
        num += rows[:, j].astype(np.float64) * np.sqrt((total - sq[:, j]).astype(np.float64))
    norm = np.sqrt(total.astype(np.float64))
    return num / norm ** (1.0 - 1.0 / (d - 1))


def s_norm(a: VectorLike) -> float:
    return float(s_norms([as_vector(a).coeffs])[0])


def prod_norm_factor(a: VectorLike) -> float:
    return float(prod_norm_factors([as_vector(a).coeffs])[0])


def schur_bound(a: VectorLike) -> int:
    """a_min * a_max - a_min - a_max, an upper bound for g(a)."""
    c = as_vector(a).coeffs
    lo, hi = min(c), max(c)
    return lo * hi - lo - hi


def fsineq_rhs(a: VectorLike) -> float:
    """|a|^(1 - 1/(d-1)); f(a)/s(a) is strictly below this for d >= 3."""
    v = as_vector(a)
    return v.norm ** (1.0 - 1.0 / (v.d - 1))


def cutoff_radius(kind: NormalizationKind, T: float, sup_norm_D: float, d: int) -> float:
    """Radius at and beyond which no sample in T*D can have a larger normalized f."""
    if d < 3:
        raise UsageError("cutoff radii are defined for d >= 3")
    if T <= 0 or sup_norm_D <= 0:
        raise UsageError("T and sup |D| must be positive")
    base = (T * sup_norm_D) ** (1.0 - 1.0 / (d - 1))
    return base if kind is NormalizationKind.S_OF_A else d * base


def support_min(d: int) -> float:
    """(d-1)!^(1/(d-1)); strict lower bound for f(a)/(a_1...a_d)^(1/(d-1)), d >= 3."""
    return math.factorial(d - 1) ** (1.0 / (d - 1))


def s_sandwich_constants(d: int):
    """(C1, C2) with prod_norm_factor(a) <= C1 s(a) and s(a) <= C2 |a|^(d/(d-1)) for every a.

    C2: sqrt(|a|^2 - a_j^2) <= |a| and sum(a) <= sqrt(d) |a|.
    C1: keep only the a_(d-1) term of s(a), then |a| <= sqrt(d) a_max.
    """
    if d < 2:
        raise UsageError("need d >= 2")
    return d ** ((d - 2) / (2 * (d - 1))), math.sqrt(d)
