import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frobdist.core import (
    MAGNITUDE_CAP,
    CoprimeVector,
    NormalizationKind,
    cutoff_radius,
    fsineq_rhs,
    gcd_vector,
    prod_norm_factor,
    prod_norm_factors,
    s_norm,
    schur_bound,
    support_min,
)
from frobdist.errors import CapacityError, UsageError


def test_gcd_examples():
    assert gcd_vector((6, 10, 15)) == 1
    assert gcd_vector((4, 6)) == 2
    assert gcd_vector((7,)) == 7
    with pytest.raises(UsageError):
        gcd_vector(())


def test_gcd_matches_pairwise_fold():
    rng = random.Random(0)
    for _ in range(10_000):
        v = [rng.randint(1, 10**6) for _ in range(rng.randint(1, 6))]
        g = v[0]
        for x in v[1:]:
            g = math.gcd(g, x)
        assert gcd_vector(v) == g


def test_coprime_vector_validation():
    assert CoprimeVector((6, 10, 15)).d == 3
    with pytest.raises(UsageError):
        CoprimeVector((5,))
    with pytest.raises(UsageError):
        CoprimeVector((0, 1))
    with pytest.raises(UsageError):
        CoprimeVector((4, 6))
    with pytest.raises(CapacityError):
        CoprimeVector((1, MAGNITUDE_CAP + 1))
    assert CoprimeVector((2, 3), cap=3).coeffs == (2, 3)


def test_s_norm_examples():
    expected = (3 * math.sqrt(41) + 4 * math.sqrt(34) + 5 * 5) / 50**0.25
    assert s_norm((3, 4, 5)) == pytest.approx(expected, rel=1e-14)
    assert s_norm((3, 4, 5)) == pytest.approx(25.397, abs=1e-3)
    assert s_norm((1, 1)) == pytest.approx(2.0, rel=1e-15)
    assert s_norm((5, 3, 4)) == s_norm((3, 4, 5))


def test_prod_norm_examples():
    assert prod_norm_factor((6, 10, 15)) == pytest.approx(30.0, rel=1e-14)
    assert prod_norm_factor((1, 1, 1, 1)) == 1.0
    assert prod_norm_factor((2, 3)) == pytest.approx(6.0, rel=1e-14)


@given(st.lists(st.integers(1, 10**8), min_size=2, max_size=7), st.randoms())
def test_norm_factors_permutation_invariant(v, rnd):
    w = v[:]
    rnd.shuffle(w)
    assert prod_norm_factor_raw(v) == prod_norm_factor_raw(w)
    assert s_norm_raw(v) == s_norm_raw(w)


def prod_norm_factor_raw(v):
    return float(prod_norm_factors([v])[0])


def s_norm_raw(v):
    from frobdist.core import s_norms

    return float(s_norms([v])[0])


def test_prod_norm_large_coefficients_no_overflow():
    v = [10**8 - k for k in range(8)]
    expected = math.exp(sum(math.log(x) for x in v) / 7)
    assert prod_norm_factor_raw(v) == pytest.approx(expected, rel=1e-13)


def test_schur_examples():
    assert schur_bound((3, 5, 7)) == 11
    assert schur_bound((2, 3)) == 1
    assert schur_bound((1, 5)) == -1


def test_cutoff_examples():
    s_cut = cutoff_radius(NormalizationKind.S_OF_A, 100, math.sqrt(3), 3)
    assert s_cut == pytest.approx(math.sqrt(100 * math.sqrt(3)), rel=1e-14)
    assert s_cut == pytest.approx(13.161, abs=1e-3)
    assert cutoff_radius(NormalizationKind.PROD_POWER, 100, math.sqrt(3), 3) == pytest.approx(3 * s_cut, rel=1e-14)
    with pytest.raises(UsageError):
        cutoff_radius(NormalizationKind.S_OF_A, 100, 1.0, 2)


def test_fsineq_rhs_and_support_min():
    assert fsineq_rhs((6, 10, 15)) == pytest.approx(math.sqrt(361) ** 0.5)
    assert support_min(3) == pytest.approx(math.sqrt(2))
    assert support_min(6) == pytest.approx(120 ** 0.2)


def test_normalization_parse():
    assert NormalizationKind.parse("ProdPower") is NormalizationKind.PROD_POWER
    assert NormalizationKind.parse("s") is NormalizationKind.S_OF_A
    assert NormalizationKind.S_OF_A.column == "norm_s"
    with pytest.raises(UsageError):
        NormalizationKind.parse("l2")


def test_vectorized_norms_match_scalar():
    rows = np.array(list(itertools.product(range(1, 6), repeat=3)))
    for row, p in zip(rows, prod_norm_factors(rows)):
        assert p == pytest.approx(math.prod(row.tolist()) ** 0.5, rel=1e-14)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_s_sandwich(d):
    from frobdist.core import s_norms, s_sandwich_constants

    c1, c2 = s_sandwich_constants(d)
    rng = np.random.default_rng(d)
    worst = []
    for T in (10**2, 10**4, 10**6):
        A = rng.integers(1, T + 1, size=(20_000, d))
        p, s = prod_norm_factors(A), s_norms(A)
        norm = np.sqrt((A.astype(float) ** 2).sum(axis=1))
        r1, r2 = p / s, s / norm ** (d / (d - 1))
        assert r1.max() <= c1 * (1 + 1e-12)
        assert r2.max() <= c2 * (1 + 1e-12)
        worst.append((r1.max(), r2.max()))
    # the empirical maxima do not drift upward with T
    assert worst[-1][0] <= 1.05 * max(w[0] for w in worst[:-1])
    assert worst[-1][1] <= 1.05 * max(w[1] for w in worst[:-1])
