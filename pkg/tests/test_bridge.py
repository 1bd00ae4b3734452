import math

import numpy as np
import pytest

from qproc.bridge import (BridgePath, bridge_dq_integral, bridge_signed_dq_integral,
                          default_grid, limit_functional_samples, sample_bridge)
from qproc.errors import GridError, PreconditionError
from qproc.lsint import measure_of, qmoment
from qproc.rng import mix

HALF_NORMAL = math.sqrt(2.0 / math.pi)   # E|N(0,1)|


def test_bridge_endpoint_ties():
    grid = np.linspace(0.0, 1.0, 17)
    for seed in range(5):
        path = sample_bridge(grid, seed)
        assert path.values[0] == 0.0 and path.values[-1] == 0.0


def test_bridge_grid_validation():
    with pytest.raises(GridError):
        sample_bridge(np.array([0.0, 0.5, 0.5, 1.0]), 1)
    with pytest.raises(GridError):
        sample_bridge(np.array([0.1, 0.5, 1.0]), 1)


def test_bridge_variance_at_half():
    grid = np.array([0.0, 0.5, 1.0])
    vals = np.array([sample_bridge(grid, mix(2, r)).values[1] for r in range(10 ** 5)])
    assert vals.var() == pytest.approx(0.25, abs=0.004)


def test_bridge_covariance():
    grid = np.array([0.0, 0.25, 0.5, 1.0])
    paths = np.array([sample_bridge(grid, mix(3, r)).values[1:3]
                      for r in range(10 ** 5)])
    cov = float(np.mean(paths[:, 0] * paths[:, 1]))
    assert cov == pytest.approx(0.125, abs=0.004)


def test_dq_integral_single_atom(zoo):
    mu = measure_of(zoo["bernoulli:p=0.3"].quantile)
    grid = default_grid(mu, size=64)
    i7 = int(np.searchsorted(grid, 0.7))
    assert grid[i7] == 0.7
    for seed in range(20):
        path = sample_bridge(grid, seed)
        assert bridge_dq_integral(path, mu) == pytest.approx(
            abs(path.values[i7]), abs=1e-12)


def test_dq_integral_atom_halfnormal_mean(zoo):
    mu = measure_of(zoo["bernoulli:p=0.3"].quantile)
    grid = default_grid(mu, size=64)
    vals = np.array([bridge_dq_integral(sample_bridge(grid, mix(4, r)), mu)
                     for r in range(2000)])
    target = math.sqrt(2.0 * 0.21 / math.pi)
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - target) <= 3 * se


def test_dq_integral_zero_path(zoo):
    mu = measure_of(zoo["uniform"].quantile)
    grid = default_grid(mu, size=64)
    assert bridge_dq_integral(BridgePath(grid, np.zeros_like(grid)), mu) == 0.0


def test_dq_integral_missing_atom_grid(zoo):
    mu = measure_of(zoo["bernoulli:p=0.3"].quantile)
    grid = np.linspace(0.0, 1.0, 11)   # 0.7 is not an exact grid point
    path = sample_bridge(grid, 5)
    with pytest.raises(GridError):
        bridge_dq_integral(path, mu)


@pytest.mark.parametrize("spec", ["uniform", "exp:rate=1"])
def test_mean_matches_halfnormal_times_qmoment(zoo, spec):
    dist = zoo[spec]
    mu = measure_of(dist.quantile)
    grid = default_grid(mu, size=2048)
    vals = np.array([bridge_dq_integral(sample_bridge(grid, mix(6, r)), mu)
                     for r in range(2000)])
    target = HALF_NORMAL * qmoment(dist.quantile)
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - target) <= 3 * se


def test_grid_refinement_stability(zoo):
    for spec in ("uniform", "exp:rate=1"):
        mu = measure_of(zoo[spec].quantile)
        means = {}
        ses = {}
        for size in (2048, 4096):
            grid = default_grid(mu, size=size)
            vals = np.array([bridge_dq_integral(sample_bridge(grid, mix(7, r)), mu)
                             for r in range(2000)])
            means[size] = vals.mean()
            ses[size] = vals.std(ddof=1) / math.sqrt(len(vals))
        combined = math.hypot(ses[2048], ses[4096])
        assert abs(means[2048] - means[4096]) <= 2 * combined


def test_truncation_diagnostic_contrast(zoo):
    """Divergence scan: the truncated integral keeps growing exactly when the
    square-root moment integral diverges; with a finite moment it levels out."""
    medians = {}
    for spec in ("pareto:alpha=1.5", "pareto:alpha=3"):
        mu = measure_of(zoo[spec].quantile)
        grid = default_grid(mu, size=1024)
        paths = [sample_bridge(grid, mix(8, r)) for r in range(200)]
        med = []
        for k in range(4, 17):
            delta = 2.0 ** -k
            med.append(float(np.median(
                [bridge_dq_integral(p, mu, window=(delta, 1.0 - delta))
                 for p in paths])))
        medians[spec] = med
    growing = medians["pareto:alpha=1.5"]
    assert all(a < b for a, b in zip(growing, growing[1:]))
    assert growing[-1] / growing[0] > 5.0
    stable = medians["pareto:alpha=3"]
    last4_change = (stable[-1] - stable[-4]) / stable[-1]
    grow_change = (growing[-1] - growing[-4]) / growing[-1]
    assert last4_change < 0.15 < grow_change


def test_limit_functional_precondition(zoo):
    with pytest.raises(PreconditionError):
        limit_functional_samples(zoo["bernoulli:p=0.3"], "zeta", 10, 64, 1)
    with pytest.raises(PreconditionError):
        limit_functional_samples(zoo["pareto:alpha=1.5"], "l1q", 10, 64, 1)


def test_limit_functional_interval_atomic(zoo):
    s = limit_functional_samples(zoo["bernoulli:p=0.3"], "interval(0.5,0.9)",
                                 2000, 64, 11)
    # the draw reduces to -B(0.7): centered normal with variance 0.21
    assert abs(s.values.mean()) <= 3 * s.values.std(ddof=1) / math.sqrt(2000)
    assert s.values.var(ddof=1) == pytest.approx(0.21, rel=0.10)


def test_limit_functional_zero_testfn(zoo):
    s = limit_functional_samples(zoo["uniform"], "testfn(zero)", 20, 64, 3)
    assert np.all(s.values == 0.0)


def test_limit_functional_determinism(zoo):
    a = limit_functional_samples(zoo["uniform"], "zeta", 50, 256, 9)
    b = limit_functional_samples(zoo["uniform"], "zeta", 50, 256, 9)
    assert np.array_equal(a.values, b.values)


def test_signed_interval_matches_negated_atom(zoo):
    mu = measure_of(zoo["bernoulli:p=0.3"].quantile)
    grid = default_grid(mu, size=64)
    path = sample_bridge(grid, 21)
    i7 = int(np.searchsorted(grid, 0.7))
    val = bridge_signed_dq_integral(path, mu, window=(0.6, 0.8))
    assert val == pytest.approx(-path.values[i7], abs=1e-12)
