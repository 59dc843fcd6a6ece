"""Monte Carlo harness for normalized Frobenius numbers of random coprime vectors."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np

from .analytic import tail_constant_exact
from .core import MAGNITUDE_CAP, NormalizationKind, cutoff_radius, prod_norm_factors, s_norms, support_min
from .errors import CapacityError, UsageError
from .frobenius import TABLE_BUDGET, frobenius_g_batch
from .rng import block_ranges, block_rng, default_workers, draw_coprime_block

SAMPLE_BLOCK = 1024
MAX_RETAINED = 10**7
COUNT_UNBALANCED_BUDGET = 10**8
# Observed max of count_unbalanced(3, 50, a) a^3 / (50^3 log(2 + a)) over a in {1.5, 2, 4, 8} is 2.12.
AGM_SHAPE_CONSTANT = 2.5


@dataclass(frozen=True)
class Box:
    """Axis-aligned box inside [0, 1]^d; the domain D before scaling by T."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or not self.lo:
            raise UsageError("box bounds must have matching non-zero length")
        for a, b in zip(self.lo, self.hi):
            if not 0.0 <= a < b <= 1.0:
                raise UsageError(f"box bounds need 0 <= lo < hi <= 1 per axis, got {a}:{b}")

    @classmethod
    def unit(cls, d: int) -> "Box":
        return cls((0.0,) * d, (1.0,) * d)

    @classmethod
    def parse(cls, text: str, d: int) -> "Box":
        """'lo:hi' for every axis, or a comma-separated list of d such pairs."""
        parts = [p for p in text.split(",") if p.strip()]
        try:
            pairs = [tuple(float(x) for x in p.split(":")) for p in parts]
        except ValueError:
            raise UsageError(f"cannot parse domain {text!r}") from None
        if any(len(p) != 2 for p in pairs):
            raise UsageError(f"cannot parse domain {text!r}")
        if len(pairs) == 1:
            pairs = pairs * d
        if len(pairs) != d:
            raise UsageError(f"domain has {len(pairs)} axes, expected {d}")
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def __str__(self):
        if len(set(self.lo)) == 1 and len(set(self.hi)) == 1:
            return f"{self.lo[0]:g}:{self.hi[0]:g}"
        return ",".join(f"{a:g}:{b:g}" for a, b in zip(self.lo, self.hi))

    def integer_bounds(self, T: int):
        """Per-axis inclusive integer ranges of T*(lo, hi]."""
        lows = [math.floor(T * a) + 1 for a in self.lo]
        highs = [math.floor(T * b) for b in self.hi]
        if any(h < l for l, h in zip(lows, highs)):
            raise UsageError(f"domain {self} contains no integers at T = {T}")
        return lows, highs

    @property
    def sup_norm(self) -> float:
        return math.sqrt(sum(b * b for b in self.hi))


@dataclass(frozen=True)
class ExperimentConfig:
    d: int
    T: int
    count: int
    seed: int
    domain: Box = None
    normalization: NormalizationKind = NormalizationKind.PROD_POWER

    def __post_init__(self):
        if self.domain is None:
            object.__setattr__(self, "domain", Box.unit(self.d))
        if self.d < 2:
            raise UsageError("d must be at least 2")
        if self.T < 2:
            raise UsageError("T must be at least 2")
        if self.count < 1:
            raise UsageError("count must be positive")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if len(self.domain.lo) != self.d:
            raise UsageError("domain dimension does not match d")

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "T": self.T,
            "count": self.count,
            "seed": self.seed,
            "domain": {"lo": list(self.domain.lo), "hi": list(self.domain.hi)},
            "normalization": self.normalization.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        dom = data["domain"]
        return cls(
            d=int(data["d"]),
            T=int(data["T"]),
            count=int(data["count"]),
            seed=int(data["seed"]),
            domain=Box(tuple(float(x) for x in dom["lo"]), tuple(float(x) for x in dom["hi"])),
            normalization=NormalizationKind(data["normalization"]),
        )

    def cutoff(self, kind: NormalizationKind | None = None) -> float:
        return cutoff_radius(kind or self.normalization, self.T, self.domain.sup_norm, self.d)


@dataclass
class SampleRecords:
    """Raw per-sample data in index order."""

    vectors: np.ndarray
    g: np.ndarray
    f: np.ndarray
    norm_prod: np.ndarray
    norm_s: np.ndarray

    def __len__(self):
        return len(self.g)

    def column(self, kind: NormalizationKind) -> np.ndarray:
        return self.norm_prod if kind is NormalizationKind.PROD_POWER else self.norm_s


@dataclass
class EmpiricalDistribution:
    values: np.ndarray
    config: ExperimentConfig | None = None
    records: SampleRecords | None = None
    redraws: dict = field(default_factory=dict)
    dim: int | None = None

    def __post_init__(self):
        self.values = np.sort(np.asarray(self.values, dtype=float))
        if self.config is not None and len(self.values) != self.config.count:
            raise UsageError("distribution length does not match config.count")

    @classmethod
    def from_values(cls, values, d: int | None = None) -> "EmpiricalDistribution":
        return cls(np.asarray(values, dtype=float), dim=d)

    @property
    def d(self) -> int:
        if self.config is not None:
            return self.config.d
        if self.dim is None:
            raise UsageError("dimension unknown; pass d= when building the distribution")
        return self.dim

    @property
    def normalization(self) -> NormalizationKind:
        return self.config.normalization if self.config else NormalizationKind.PROD_POWER

    def __len__(self):
        return len(self.values)


def _set_threads(workers: int | None):
    n = default_workers() if workers is None else max(1, int(workers))
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def draw_vectors(config: ExperimentConfig, table_budget: int = TABLE_BUDGET, start: int = 0, stop: int | None = None):
    """Coprime vectors for sample indices [start, stop), with redraw counts."""
    stop = config.count if stop is None else stop
    lows, highs = config.domain.integer_bounds(config.T)
    if max(highs) > MAGNITUDE_CAP:
        raise CapacityError(f"coefficients up to {max(highs)} exceed the magnitude cap {MAGNITUDE_CAP}")
    if start % SAMPLE_BLOCK:
        raise UsageError("start must be block-aligned")
    chunks, gcd_rej, cap_rej = [], 0, 0
    for b, lo, hi in block_ranges(config.count, SAMPLE_BLOCK)[start // SAMPLE_BLOCK :]:
        if lo >= stop:
            break
        rng = block_rng(config.seed, "coprime", b)
        vecs, gr, cr = draw_coprime_block(rng, hi - lo, lows, highs, table_budget)
        chunks.append(vecs)
        gcd_rej += gr
        cap_rej += cr
    vecs = np.concatenate(chunks)[: stop - start]
    return vecs, {"gcd": gcd_rej, "capacity": cap_rej}


def evaluate_vectors(vecs: np.ndarray, table_budget: int = TABLE_BUDGET) -> SampleRecords:
    g = frobenius_g_batch(vecs, budget=table_budget)
    f = g + vecs.sum(axis=1)
    ff = f.astype(np.float64)
    return SampleRecords(vecs, g, f, ff / prod_norm_factors(vecs), ff / s_norms(vecs))


def sample_coprime(config: ExperimentConfig, workers: int | None = None,
                   table_budget: int = TABLE_BUDGET) -> EmpiricalDistribution:
    """Draw config.count coprime vectors uniformly from the integer points of T*D.

    The output depends only on the config, never on ``workers``.
    """
    if config.count > MAX_RETAINED:
        raise UsageError(f"count above {MAX_RETAINED}: use stream_summary for histogram/moments only")
    _set_threads(workers)
    vecs, redraws = draw_vectors(config, table_budget)
    rec = evaluate_vectors(vecs, table_budget)
    return EmpiricalDistribution(rec.column(config.normalization), config, rec, redraws)


def empirical_psi(dist: EmpiricalDistribution, R: float) -> float:
    """Fraction of values strictly greater than R."""
    n = len(dist.values)
    if n == 0:
        return 0.0
    return (n - int(np.searchsorted(dist.values, R, side="right"))) / n


@dataclass
class Histogram:
    bin_width: float
    counts: dict
    total: int
    origin: float = 0.0

    def density(self) -> dict:
        return {k: c / (self.total * self.bin_width) for k, c in self.counts.items()}

    def rebin(self, factor: int) -> "Histogram":
        merged: dict = {}
        for k, c in self.counts.items():
            merged[k // factor] = merged.get(k // factor, 0) + c
        return Histogram(self.bin_width * factor, dict(sorted(merged.items())), self.total, self.origin)

    def mode_bin(self) -> int:
        return max(self.counts, key=lambda k: (self.counts[k], -k))

    def rows(self):
        """(bin_lo, count, density) in bin order."""
        dens = self.density()
        return [(k * self.bin_width, c, dens[k]) for k, c in sorted(self.counts.items())]

    def merge(self, other: "Histogram") -> "Histogram":
        if other.bin_width != self.bin_width:
            raise UsageError("cannot merge histograms with different bin widths")
        counts = dict(self.counts)
        for k, c in other.counts.items():
            counts[k] = counts.get(k, 0) + c
        return Histogram(self.bin_width, dict(sorted(counts.items())), self.total + other.total)


def histogram(dist, bin_width: float = 0.01) -> Histogram:
    if bin_width <= 0:
        raise UsageError("bin width must be positive")
    values = dist.values if isinstance(dist, EmpiricalDistribution) else np.asarray(dist, dtype=float)
    idx = np.floor(values / bin_width).astype(np.int64)
    keys, counts = np.unique(idx, return_counts=True)
    return Histogram(bin_width, {int(k): int(c) for k, c in zip(keys, counts)}, int(len(values)))


def ks_distance(dist: EmpiricalDistribution, cdf: Callable) -> float:
    """sup |F_n - F| over both sides of every sample point.

    ``cdf`` may be vectorized; left limits are taken one ulp below each point.
    """
    x = dist.values
    n = len(x)
    if n == 0:
        raise UsageError("empty distribution")
    uniq = np.unique(x)
    upper = np.searchsorted(x, uniq, side="right") / n
    lower = np.searchsorted(x, uniq, side="left") / n
    left = np.nextafter(uniq, -np.inf)
    try:
        F = np.asarray(cdf(uniq), dtype=float)
        F_left = np.asarray(cdf(left), dtype=float)
        if F.shape != uniq.shape:
            raise TypeError
    except (TypeError, ValueError):
        F = np.array([cdf(float(t)) for t in uniq])
        F_left = np.array([cdf(float(t)) for t in left])
    return float(max(np.max(np.abs(upper - F)), np.max(np.abs(lower - F_left))))


def tail_constant(dist: EmpiricalDistribution, R: float) -> float:
    """empirical_psi(R) * R^(d-1); compare with d / (2 zeta(d-1))."""
    d = dist.d
    if d >= 3 and R < support_min(d):
        raise UsageError(f"R = {R} lies below the support minimum {support_min(d):.6g}")
    return empirical_psi(dist, R) * R ** (d - 1)


def tail_ratio(dist: EmpiricalDistribution, R: float) -> float:
    return tail_constant(dist, R) / tail_constant_exact(dist.d)


def moment_estimate(dist: EmpiricalDistribution, k: int) -> float:
    d = dist.d
    if not 1 <= k <= d - 2:
        raise UsageError(f"moment k = {k} does not exist for d = {d} (need 1 <= k <= d-2)")
    return float(np.mean(dist.values**k))


def concentration_fraction(dist: EmpiricalDistribution, alpha: float) -> float:
    """Fraction of values strictly inside ((d-1)!^(1/(d-1)), alpha (d-1)!^(1/(d-1)))."""
    if alpha <= 1:
        raise UsageError("alpha must exceed 1")
    if dist.normalization is not NormalizationKind.PROD_POWER:
        raise UsageError("concentration is defined for the product normalization")
    lo = support_min(dist.d)
    hi = alpha * lo
    v = dist.values
    inside = np.searchsorted(v, hi, side="left") - np.searchsorted(v, lo, side="right")
    return float(max(inside, 0)) / len(v)


def count_unbalanced(n: int, T: int, alpha: float) -> int:
    """#{x in {1..T}^n : max(x) / (x_1 ... x_n)^(1/n) > alpha}, by exhaustive enumeration."""
    if n < 1 or T < 1:
        raise UsageError("need n >= 1 and T >= 1")
    if T**n > COUNT_UNBALANCED_BUDGET:
        raise UsageError(f"T^n = {T**n} exceeds the enumeration budget {COUNT_UNBALANCED_BUDGET}")
    if alpha < 1:
        return T**n
    axis = np.arange(1, T + 1, dtype=np.float64)
    an = float(alpha) ** n
    total = 0
    # iterate over the first coordinate, vectorize the rest
    rest = np.ones(1)
    rest_max = np.zeros(1)
    for _ in range(n - 1):
        rest = np.multiply.outer(rest, axis).ravel()
        rest_max = np.maximum.outer(rest_max, axis).ravel()
    for x1 in axis:
        mx = np.maximum(rest_max, x1)
        total += int(np.count_nonzero(mx**n > an * (rest * x1)))
    return total


def agm_shape(n: int, T: int, alpha: float) -> float:
    """count_unbalanced scaled by alpha^n / (T^n log(2 + alpha)^(n-2))."""
    return count_unbalanced(n, T, alpha) * alpha**n / (T**n * math.log(2 + alpha) ** (n - 2))


# --- streaming summary for very large sweeps --------------------------------------------

def stream_summary(config: ExperimentConfig, bin_width: float = 0.01, max_k: int | None = None,
                   workers: int | None = None, chunk: int = 64 * SAMPLE_BLOCK,
                   table_budget: int = TABLE_BUDGET) -> dict:
    """Histogram and power sums without retaining the values."""
    _set_threads(workers)
    max_k = max(1, config.d - 2) if max_k is None else max_k
    hist = Histogram(bin_width, {}, 0)
    sums = [0.0] * (max_k + 1)
    redraws = {"gcd": 0, "capacity": 0}
    for start in range(0, config.count, chunk):
        stop = min(start + chunk, config.count)
        vecs, rd = draw_vectors(config, table_budget, start, stop)
        vals = evaluate_vectors(vecs, table_budget).column(config.normalization)
        hist = hist.merge(histogram(vals, bin_width))
        for k in range(1, max_k + 1):
            sums[k] += float(np.sum(vals**k))
        for key in redraws:
            redraws[key] += rd[key]
    return {
        "histogram": hist,
        "moments": {k: sums[k] / config.count for k in range(1, max_k + 1)},
        "redraws": redraws,
    }


# --- sample files --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_samples_csv(path, records: SampleRecords) -> None:
    d = records.vectors.shape[1]
    header = ["index"] + [f"a_{j}" for j in range(1, d + 1)] + ["g", "f", "norm_prod", "norm_s"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(len(records)):
            ints = ",".join(str(int(v)) for v in records.vectors[i])
            fh.write(f"{i},{ints},{int(records.g[i])},{int(records.f[i])},"
                     f"{_fmt(records.norm_prod[i])},{_fmt(records.norm_s[i])}\n")


def read_samples_csv(path) -> SampleRecords:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        d = sum(1 for h in header if h.startswith("a_"))
        expected = ["index"] + [f"a_{j}" for j in range(1, d + 1)] + ["g", "f", "norm_prod", "norm_s"]
        if header != expected:
            raise UsageError(f"{path}: unexpected header {header}")
        rows = list(reader)
    if not rows:
        vecs = np.empty((0, d), dtype=np.int64)
        return SampleRecords(vecs, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0), np.empty(0))
    vecs = np.array([[int(x) for x in r[1 : d + 1]] for r in rows], dtype=np.int64)
    g = np.array([int(r[d + 1]) for r in rows], dtype=np.int64)
    f = np.array([int(r[d + 2]) for r in rows], dtype=np.int64)
    norm_prod = np.array([float(r[d + 3]) for r in rows])
    norm_s = np.array([float(r[d + 4]) for r in rows])
    return SampleRecords(vecs, g, f, norm_prod, norm_s)
