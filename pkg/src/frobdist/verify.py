"""Named invariant suites.  Each returns a SuiteReport; sizes are parameters so the
command line can run them at desk scale and the acceptance tests at full scale."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .analytic import SQRT3, TAIL_A, psi3_cdf, psi3_one_sided, psi3_tail, psi3_total_mass
from .core import NormalizationKind, support_min
from .errors import UsageError
from .frobenius import frobenius_dp_oracle, frobenius_g_batch
from .lattice import kernel_lattice, sample_mu2_batch, successive_minima
from .simplex import covering_radii_2d, covering_radius_2d, mc_volume_K, mc_width_integral
from .statistics import ExperimentConfig, concentration_fraction, ks_distance, sample_coprime

SUITES = ("sylvester", "oracle", "inequalities", "constants", "psi3", "ks", "cover", "concentration")


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    suite: str
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def _coprime_tuples(d: int, max_coeff: int):
    for t in itertools.combinations_with_replacement(range(1, max_coeff + 1), d):
        if math.gcd(*t) == 1:
            yield t


def suite_sylvester(max_a: int = 200) -> SuiteReport:
    pairs = np.array([(x, y) for x in range(2, max_a + 1) for y in range(x, max_a + 1) if math.gcd(x, y) == 1])
    g = frobenius_g_batch(pairs)
    f = g + pairs.sum(axis=1)
    bad = np.flatnonzero(f != pairs[:, 0] * pairs[:, 1])
    detail = {"pairs": int(len(pairs))}
    if bad.size:
        detail["first_failure"] = pairs[bad[0]].tolist()
    return SuiteReport("sylvester", [Check("f == a1*a2", not bad.size, detail)])


def suite_oracle(max_coeff: int = 30, dims=(3, 4)) -> SuiteReport:
    checks = []
    for d in dims:
        rows = np.array(list(_coprime_tuples(d, max_coeff)), dtype=np.int64)
        engine = frobenius_g_batch(rows)
        mismatches = []
        for row, g in zip(rows, engine):
            a = row.tolist()
            bound = max(a[0] * a[-1] - a[0] - a[-1], 0)
            if frobenius_dp_oracle(a, bound) != g:
                mismatches.append(a)
        checks.append(Check(f"engine == dp oracle (d={d})", not mismatches,
                            {"vectors": int(len(rows)), "mismatches": mismatches[:5]}))
    return SuiteReport("oracle", checks)


def suite_inequalities(dims=(3, 4, 5), T: int = 10**4, count: int = 10**3, seed: int = 7,
                       workers: int | None = None) -> SuiteReport:
    checks = []
    for d in dims:
        cfg = ExperimentConfig(d, T, count, seed)
        rec = sample_coprime(cfg, workers=workers).records
        vecs = np.sort(rec.vectors, axis=1)
        a_min, a_max = vecs[:, 0], vecs[:, -1]
        norms = np.sqrt((vecs.astype(float) ** 2).sum(axis=1))
        n = d - 1
        schur_ok = rec.g <= a_min * a_max - a_min - a_max
        fs_ok = rec.norm_s < norms ** (1.0 - 1.0 / n)
        supp_ok = rec.norm_prod > support_min(d)
        cut_prod = cfg.cutoff(NormalizationKind.PROD_POWER)
        cut_s = cfg.cutoff(NormalizationKind.S_OF_A)
        ah_fail = []
        for i, row in enumerate(vecs):
            lam = successive_minima(kernel_lattice(row.tolist())).lambdas[-1]
            if rec.norm_s[i] > 0.5 * n * norms[i] ** (-1.0 / n) * lam + 1e-9:
                ah_fail.append(row.tolist())
        checks += [
            Check(f"g <= schur (d={d})", bool(schur_ok.all()), {"violations": int((~schur_ok).sum())}),
            Check(f"norm_s < |a|^(1-1/(d-1)) (d={d})", bool(fs_ok.all()), {"violations": int((~fs_ok).sum())}),
            Check(f"norm_prod > support min (d={d})", bool(supp_ok.all()),
                  {"violations": int((~supp_ok).sum()), "min": float(rec.norm_prod.min()), "bound": support_min(d)}),
            Check(f"aliev-henk (d={d})", not ah_fail, {"violations": len(ah_fail), "examples": ah_fail[:3]}),
            Check(f"no sample beyond cutoffs (d={d})",
                  bool((rec.norm_prod < cut_prod).all() and (rec.norm_s < cut_s).all()),
                  {"max_prod": float(rec.norm_prod.max()), "cutoff_prod": cut_prod,
                   "max_s": float(rec.norm_s.max()), "cutoff_s": cut_s}),
        ]
    return SuiteReport("inequalities", checks)


def suite_constants(samples: int = 10**6, seed: int = 11, dims=(2, 3, 4, 5), workers: int | None = None) -> SuiteReport:
    checks = []
    for n in dims:
        w = mc_width_integral(n, samples, seed, workers)
        target = n * (n + 1) / 2
        checks.append(Check(f"width integral n={n}", abs(w / target - 1) <= 0.01, {"estimate": w, "exact": target}))
        v = mc_volume_K(n, samples, seed, workers)
        checks.append(Check(f"vol(K) n={n}", abs(v / (n + 1) - 1) <= 0.015, {"estimate": v, "exact": n + 1}))
    return SuiteReport("constants", checks)


def suite_psi3() -> SuiteReport:
    mass = psi3_total_mass()
    jump_sqrt3 = abs(psi3_one_sided(SQRT3, "right") - psi3_one_sided(SQRT3, "left"))
    jump_2 = abs(psi3_one_sided(2.0, "right") - psi3_one_sided(2.0, "left"))
    rel = abs(psi3_tail(100.0) * 1e4 - TAIL_A) / TAIL_A
    return SuiteReport("psi3", [
        Check("total mass", abs(mass - 1) <= 1e-6, {"mass": mass}),
        Check("continuity at sqrt3", jump_sqrt3 <= 1e-9, {"jump": jump_sqrt3}),
        Check("continuity at 2", jump_2 <= 1e-9, {"jump": jump_2}),
        Check("Psi3(sqrt3) == 1", psi3_tail(SQRT3) == 1.0, {"value": psi3_tail(SQRT3)}),
        Check("Psi3(100) 100^2 vs 9/pi^2", rel <= 3e-4, {"relative_error": rel}),
    ])


def suite_ks(T: int = 10**4, count: int = 2 * 10**4, seed: int = 42, tol: float = 0.03,
             workers: int | None = None) -> SuiteReport:
    dist = sample_coprime(ExperimentConfig(3, T, count, seed), workers=workers)
    ks = ks_distance(dist, psi3_cdf)
    return SuiteReport("ks", [Check("KS(d=3 sweep, exact Psi3)", ks <= tol, {"ks": ks, "tol": tol, "T": T, "count": count})])


def suite_cover(count: int = 10**4, seed: int = 5, radii=(1.8, 2.0, 2.5), tol: float = 1e-3) -> SuiteReport:
    z2 = covering_radius_2d(np.eye(2), tol=tol)
    rect = covering_radius_2d(np.array([[2.0, 0.0], [0.0, 0.5]]), tol=tol)
    lo, hi = covering_radii_2d(sample_mu2_batch(seed, count), tol=tol)
    checks = [
        Check("Z^2 bracket contains 2", 2.0 in z2, {"lo": z2.lo, "hi": z2.hi}),
        Check("(2,0),(0,1/2) bracket contains 2.5", 2.5 in rect, {"lo": rect.lo, "hi": rect.hi}),
        Check("mu2 lower brackets >= sqrt3 - tol", bool(lo.min() >= SQRT3 - tol), {"min_lo": float(lo.min())}),
    ]
    for R in radii:
        # a lattice counts when its bracket sits above R; the bracket midpoint resolves straddlers
        est = float(np.mean(0.5 * (lo + hi) > R))
        exact = psi3_tail(R)
        checks.append(Check(f"Psi_hat({R}) vs Psi3", abs(est - exact) <= 0.03, {"estimate": est, "exact": exact}))
    return SuiteReport("cover", checks)


def cover_estimates(lo: np.ndarray, hi: np.ndarray, R: float) -> dict:
    """Certified lower/upper and midpoint estimates of P(rho > R)."""
    return {
        "R": R,
        "psi_hat": float(np.mean(0.5 * (lo + hi) > R)),
        "psi_lower": float(np.mean(lo > R)),
        "psi_upper": float(np.mean(hi > R)),
    }


def suite_concentration(dims=(4, 5, 6), T: int = 10**4, count: int = 2 * 10**4, seed: int = 3,
                        alpha: float = 1.757, floor: float = 0.8, workers: int | None = None) -> SuiteReport:
    fracs = [concentration_fraction(sample_coprime(ExperimentConfig(d, T, count, seed), workers=workers), alpha)
             for d in dims]
    trend = all(b >= a for a, b in zip(fracs, fracs[1:]))
    checks = [
        Check("non-decreasing in d", trend, {"dims": list(dims), "fractions": fracs}),
        # the floor is advisory; a miss is reported but does not fail the suite
        Check("floor at largest d (advisory)", True,
              {"fraction": fracs[-1], "floor": floor, "met": fracs[-1] >= floor}),
    ]
    return SuiteReport("concentration", checks)


_RUNNERS = {
    "sylvester": suite_sylvester,
    "oracle": suite_oracle,
    "inequalities": suite_inequalities,
    "constants": suite_constants,
    "psi3": suite_psi3,
    "ks": suite_ks,
    "cover": suite_cover,
    "concentration": suite_concentration,
}


def run_suite(name: str, **kwargs) -> SuiteReport:
    try:
        fn = _RUNNERS[name]
    except KeyError:
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    return fn(**kwargs)


__all__ = ["SUITES", "Check", "SuiteReport", "run_suite", "cover_estimates"] + [
    f"suite_{s}" for s in SUITES
]
