import math

import numpy as np
import pytest

from qproc.empirics import (EmpiricalData, empirical_cdf, empirical_quantile,
                            interval_integral, l1_cdf_distance,
                            l1_quantile_distance, l1_quantile_statistic,
                            sup_cdf_distance, zeta_statistic)
from qproc.errors import DomainError
from qproc.rng import Stream, mix
from qproc.zoo import make_distribution, sample

FINITE_MEAN = ("uniform", "bernoulli:p=0.3", "exp:rate=1", "pareto:alpha=3",
               "pareto:alpha=1.5", "normal", "logistic", "cantor")


def test_empirical_cdf_examples():
    Fn = empirical_cdf(EmpiricalData(np.array([0.5, 2.0])))
    assert Fn(1.0) == 0.5
    Fn = empirical_cdf(EmpiricalData(np.array([1.0, 1.0])))
    assert Fn(1.0) == 1.0 and Fn(0.999) == 0.0     # tie merging
    Fn = empirical_cdf(EmpiricalData(np.array([3.0])))
    assert Fn(2.999) == 0.0 and Fn(3.0) == 1.0


def test_empirical_quantile_examples():
    Qn = empirical_quantile(EmpiricalData(np.array([0.5, 2.0])))
    assert Qn(0.5) == 0.5 and Qn(0.51) == 2.0
    Qn = empirical_quantile(EmpiricalData(np.array([7.0])))
    assert Qn(0.2) == 7.0 and Qn(0.9) == 7.0
    Qn = empirical_quantile(EmpiricalData(np.array([1.0, 2.0, 3.0])))
    assert Qn(2.0 / 3.0) == 2.0


def test_data_validation():
    with pytest.raises(DomainError):
        EmpiricalData(np.array([2.0, 1.0]))
    data = EmpiricalData.from_raw([2.0, 1.0])
    assert np.array_equal(data.sorted_sample, [1.0, 2.0])


def test_l1_quantile_uniform_single_point(zoo):
    Qn = empirical_quantile(EmpiricalData(np.array([0.5])))
    assert l1_quantile_distance(Qn, zoo["uniform"]) == pytest.approx(0.25, abs=1e-13)


def test_l1_quantile_nonnegative_on_grid_resample(zoo):
    dist = zoo["exp:rate=1"]
    n = 16
    levels = dist.quantile(np.arange(1, n + 1) / (n + 1))
    Qn = empirical_quantile(EmpiricalData(np.asarray(levels)))
    assert l1_quantile_distance(Qn, dist) >= 0.0


def test_l1_quantile_bernoulli_step_difference(zoo):
    data = EmpiricalData(np.array([0.0] * 6 + [1.0] * 4))   # p-hat = 0.4
    Qn = empirical_quantile(data)
    assert l1_quantile_distance(Qn, zoo["bernoulli:p=0.3"]) == \
        pytest.approx(0.1, abs=1e-13)


def test_l1_cdf_uniform_single_point(zoo):
    Fn = empirical_cdf(EmpiricalData(np.array([0.5])))
    assert l1_cdf_distance(Fn, zoo["uniform"]) == pytest.approx(0.25, abs=1e-13)


def test_l1_cdf_identical_step_inputs(zoo):
    # the true bernoulli cdf is itself a step cdf: distance to itself is 0
    dist = zoo["bernoulli:p=0.3"]
    data = EmpiricalData(np.array([0.0] * 7 + [1.0] * 3))   # p-hat = p
    Fn = empirical_cdf(data)
    assert l1_cdf_distance(Fn, dist) == pytest.approx(0.0, abs=1e-14)


def test_l1_cdf_bernoulli_step_difference(zoo):
    data = EmpiricalData(np.array([0.0] * 6 + [1.0] * 4))
    Fn = empirical_cdf(data)
    assert l1_cdf_distance(Fn, zoo["bernoulli:p=0.3"]) == pytest.approx(0.1, abs=1e-13)


def test_interval_integral_examples(zoo):
    data = EmpiricalData(np.array([0.0] * 6 + [1.0] * 4))
    val = interval_integral(data, zoo["bernoulli:p=0.3"], 0.6, 0.8)
    assert val == pytest.approx(math.sqrt(10) * 0.1, abs=1e-12)
    # exact p-hat: Qn equals Q, so the signed integral vanishes
    data = EmpiricalData(np.array([0.0] * 7 + [1.0] * 3))
    assert interval_integral(data, zoo["bernoulli:p=0.3"], 0.6, 0.8) == \
        pytest.approx(0.0, abs=1e-13)
    # symmetric cancellation around the crossing
    data = EmpiricalData(np.array([0.5]))
    assert interval_integral(data, zoo["uniform"], 0.4, 0.6) == \
        pytest.approx(0.0, abs=1e-13)


def test_interval_integral_domain_errors(zoo):
    data = EmpiricalData(np.array([0.5]))
    for a, b in [(0.0, 0.5), (0.5, 1.0), (0.6, 0.4)]:
        with pytest.raises(DomainError):
            interval_integral(data, zoo["uniform"], a, b)


def test_identity_quantile_vs_cdf_paths(zoo):
    for spec in FINITE_MEAN:
        dist = zoo[spec]
        for n in (10, 100, 1000):
            for s in range(3):
                data = EmpiricalData(sample(dist, n, mix(606, n, s)))
                lhs = l1_quantile_statistic(data, dist)
                rhs = zeta_statistic(data, dist)
                assert abs(lhs - rhs) <= 1e-10, (spec, n, s)


def test_zeta_infinite_mean_marker():
    dist = make_distribution("pareto:alpha=0.8")
    data = EmpiricalData(sample(dist, 50, 3))
    assert math.isinf(zeta_statistic(data, dist))
    assert math.isinf(l1_quantile_statistic(data, dist))


def test_zeta_permutation_invariance(zoo):
    dist = zoo["exp:rate=1"]
    raw = sample(dist, 64, 17)
    rng = np.random.default_rng(0)
    for _ in range(3):
        perm = rng.permutation(raw)
        assert zeta_statistic(EmpiricalData.from_raw(perm), dist) == \
            zeta_statistic(EmpiricalData(raw), dist)


def test_zeta_nonnegative(zoo):
    dist = zoo["normal"]
    for s in range(5):
        data = EmpiricalData(sample(dist, 32, mix(5, s)))
        assert zeta_statistic(data, dist) >= 0.0


def test_glivenko_cantelli_sup_norm(zoo):
    dist = zoo["uniform"]
    sups = {}
    for n in (100, 10000):
        vals = [sup_cdf_distance(EmpiricalData(sample(dist, n, mix(8, n, r))), dist)
                for r in range(100)]
        sups[n] = float(np.median(vals))
    assert sups[10000] < sups[100]


def test_windowed_quantile_statistic(zoo):
    # window (a, b) never exceeds the full-line statistic
    dist = zoo["exp:rate=1"]
    data = EmpiricalData(sample(dist, 256, 909))
    full = l1_quantile_statistic(data, dist)
    win = l1_quantile_statistic(data, dist, window=(0.2, 0.8))
    assert 0.0 <= win <= full + 1e-12
