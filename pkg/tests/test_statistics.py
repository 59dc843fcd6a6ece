import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frobdist.analytic import M31_FROZEN, TAIL_A, psi3_cdf
from frobdist.core import NormalizationKind, cutoff_radius, support_min
from frobdist.errors import CapacityError, UsageError
from frobdist.frobenius import frobenius
from frobdist.statistics import (
    AGM_SHAPE_CONSTANT,
    agm_shape,
    Box,
    EmpiricalDistribution,
    ExperimentConfig,
    concentration_fraction,
    count_unbalanced,
    empirical_psi,
    histogram,
    ks_distance,
    moment_estimate,
    read_samples_csv,
    sample_coprime,
    stream_summary,
    tail_constant,
    write_samples_csv,
)


def dist_of(values, d=3):
    return EmpiricalDistribution.from_values(values, d=d)


def test_config_validation():
    with pytest.raises(UsageError):
        ExperimentConfig(1, 10, 10, 0)
    with pytest.raises(UsageError):
        ExperimentConfig(3, 1, 10, 0)
    with pytest.raises(UsageError):
        ExperimentConfig(3, 10, 0, 0)
    with pytest.raises(UsageError):
        Box((0.5,), (0.4,))
    with pytest.raises(UsageError):
        Box.parse("0:1,0:1", 3)
    cfg = ExperimentConfig(3, 100, 5, 1, Box.parse("0.5:1", 3), NormalizationKind.S_OF_A)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_small_cube_support():
    dist = sample_coprime(ExperimentConfig(2, 3, 500, seed=1))
    allowed = {(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)}
    seen = {tuple(r) for r in dist.records.vectors.tolist()}
    assert seen <= allowed and len(seen) == 7


def test_sub_box():
    T = 1000
    dist = sample_coprime(ExperimentConfig(3, T, 2000, seed=2, domain=Box.parse("0.5:1", 3)))
    assert dist.records.vectors.min() >= math.ceil(T / 2)
    assert dist.records.vectors.max() <= T


def test_capacity_refused():
    with pytest.raises(CapacityError):
        sample_coprime(ExperimentConfig(3, 10**9, 10, seed=0))


def test_records_are_consistent():
    dist = sample_coprime(ExperimentConfig(3, 5000, 300, seed=3))
    rec = dist.records
    for i in range(0, 300, 17):
        r = frobenius(rec.vectors[i].tolist())
        assert (r.g, r.f) == (rec.g[i], rec.f[i])
        assert r.norm_prod == pytest.approx(rec.norm_prod[i], rel=1e-14)
        assert r.norm_s == pytest.approx(rec.norm_s[i], rel=1e-14)
    assert (rec.f == rec.g + rec.vectors.sum(axis=1)).all()
    assert (np.diff(dist.values) >= 0).all() and len(dist) == 300


def test_determinism_across_workers():
    cfg = ExperimentConfig(3, 10**4, 1000, seed=77)
    runs = [sample_coprime(cfg, workers=w) for w in (1, 4, 8)]
    for other in runs[1:]:
        assert np.array_equal(runs[0].values, other.values)
        assert np.array_equal(runs[0].records.vectors, other.records.vectors)
    # the prefix property of counter-keyed blocks
    longer = sample_coprime(ExperimentConfig(3, 10**4, 3000, seed=77))
    assert np.array_equal(longer.records.vectors[:1000], runs[0].records.vectors)


def test_d3_support_bounds():
    dist = sample_coprime(ExperimentConfig(3, 10**4, 5000, seed=5))
    assert dist.values.min() > math.sqrt(2)
    assert dist.values.min() > math.sqrt(3)


def test_empirical_psi_examples():
    d = dist_of([1, 2, 3])
    assert empirical_psi(d, 2.5) == pytest.approx(1 / 3)
    assert empirical_psi(d, 0.5) == 1.0
    assert empirical_psi(d, 3.0) == 0.0
    cfg = ExperimentConfig(3, 10**4, 2000, seed=6)
    dist = sample_coprime(cfg)
    assert empirical_psi(dist, cutoff_radius(NormalizationKind.PROD_POWER, cfg.T, math.sqrt(3), 3)) == 0.0
    s_dist = sample_coprime(ExperimentConfig(3, 10**4, 2000, seed=6, normalization=NormalizationKind.S_OF_A))
    assert empirical_psi(s_dist, cfg.cutoff(NormalizationKind.S_OF_A)) == 0.0


@given(st.lists(st.floats(0, 100), min_size=1, max_size=50), st.floats(0, 100), st.floats(0, 100))
def test_empirical_psi_non_increasing(values, r1, r2):
    d = dist_of(values)
    lo, hi = sorted((r1, r2))
    assert empirical_psi(d, lo) >= empirical_psi(d, hi)


def test_histogram_examples():
    h = histogram(dist_of([1.005, 1.007]), 0.01)
    assert h.counts == {100: 2}
    assert h.density()[100] == pytest.approx(2 / (2 * 0.01))
    h = histogram(dist_of([0.001, 0.011, 0.021, 0.031, 0.041]), 0.01)
    r = h.rebin(2)
    assert r.bin_width == 0.02 and r.counts == {0: 2, 1: 2, 2: 1}
    assert sum(r.counts.values()) == r.total == 5
    with pytest.raises(UsageError):
        histogram(dist_of([1.0]), 0.0)


@given(st.lists(st.floats(0, 1e3), max_size=200), st.floats(1e-3, 10))
def test_histogram_mass_conservation(values, w):
    h = histogram(dist_of(values), w)
    assert sum(h.counts.values()) == len(values) == h.total


def test_ks_examples():
    vals = np.array([0.2, 0.2, 0.5, 0.9])
    ecdf = lambda x: np.searchsorted(vals, x, side="right") / len(vals)  # noqa: E731
    assert ks_distance(dist_of(vals), ecdf) == 0.0
    point_mass = lambda x: np.where(np.asarray(x) >= 2.0, 1.0, 0.0)  # noqa: E731
    # F_n jumps to 1/2 at 1 where the point mass is still 0, so the supremum is 1/2
    assert ks_distance(dist_of([1.0, 3.0]), point_mass) == 0.5
    assert ks_distance(dist_of([0.5]), lambda x: min(max(x, 0.0), 1.0)) == pytest.approx(0.5)


def test_ks_against_scipy():
    from scipy import stats

    x = np.random.default_rng(0).standard_normal(500)
    assert ks_distance(dist_of(x), stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-12)


def test_tail_constant_examples():
    assert tail_constant(dist_of([2, 4, 8]), 2.0) == pytest.approx(8 / 3)
    assert tail_constant(dist_of([2, 4, 8]), 9.0) == 0.0
    with pytest.raises(UsageError):
        tail_constant(dist_of([2, 4, 8]), 1.0)


def test_moment_examples():
    assert moment_estimate(dist_of([1, 2, 3], d=3), 1) == 2.0
    assert moment_estimate(dist_of([2, 2], d=3), 1) == 2.0
    with pytest.raises(UsageError):
        moment_estimate(dist_of([1, 2], d=3), 2)
    assert moment_estimate(dist_of([1, 2], d=5), 3) == pytest.approx(4.5)


def test_concentration_examples():
    assert concentration_fraction(dist_of([2.0, 5.0]), 1.757) == 0.5
    assert 1.757 * support_min(3) == pytest.approx(2.485, abs=5e-4)
    assert concentration_fraction(dist_of([2.0, 5.0, 400.0]), 1e9) == 1.0
    with pytest.raises(UsageError):
        concentration_fraction(dist_of([2.0]), 1.0)


def brute_unbalanced(n, T, alpha):
    import itertools

    return sum(1 for x in itertools.product(range(1, T + 1), repeat=n)
               if max(x) ** n > alpha**n * math.prod(x))


def test_count_unbalanced():
    assert count_unbalanced(2, 4, 1.5) == 4
    assert count_unbalanced(3, 7, 0.5) == 7**3
    for n, T, a in [(2, 30, 1.3), (3, 12, 1.7), (4, 6, 2.0), (1, 9, 1.5)]:
        assert count_unbalanced(n, T, a) == brute_unbalanced(n, T, a)
    with pytest.raises(UsageError):
        count_unbalanced(5, 100, 2.0)


def test_agm_shape_bounded():
    vals = [count_unbalanced(3, 50, a) * a**3 / (50**3 * math.log(2 + a)) for a in (1.5, 2, 4, 8)]
    assert vals == pytest.approx([agm_shape(3, 50, a) for a in (1.5, 2, 4, 8)], rel=1e-15)
    assert max(vals) <= AGM_SHAPE_CONSTANT


def test_csv_round_trip(tmp_path):
    dist = sample_coprime(ExperimentConfig(4, 3000, 200, seed=8))
    path = tmp_path / "s.csv"
    write_samples_csv(path, dist.records)
    text = path.read_bytes()
    assert b"\r" not in text
    assert text.splitlines()[0] == b"index,a_1,a_2,a_3,a_4,g,f,norm_prod,norm_s"
    back = read_samples_csv(path)
    assert np.array_equal(back.vectors, dist.records.vectors)
    assert np.array_equal(back.g, dist.records.g)
    assert np.array_equal(back.norm_prod, dist.records.norm_prod)
    assert np.array_equal(back.norm_s, dist.records.norm_s)


def test_stream_summary_matches_retained():
    cfg = ExperimentConfig(3, 2000, 5000, seed=12)
    res = stream_summary(cfg, chunk=2048)
    dist = sample_coprime(cfg)
    assert res["histogram"].counts == histogram(dist).counts
    assert res["moments"][1] == pytest.approx(moment_estimate(dist, 1), rel=1e-12)
    assert res["redraws"] == dist.redraws


@pytest.mark.slow
def test_desk_sweep_shape(desk_sweep):
    assert 1.7 <= histogram(desk_sweep).mode_bin() * 0.01 <= 2.1
    assert ks_distance(desk_sweep, psi3_cdf) <= 0.03
    assert moment_estimate(desk_sweep, 1) == pytest.approx(M31_FROZEN, rel=0.02)
    assert 0.6 <= tail_constant(desk_sweep, 4.0) / TAIL_A <= 1.3
