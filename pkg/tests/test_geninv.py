import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qproc.errors import DomainError, RepresentationError
from qproc.geninv import (INF, PiecewiseMonotone, const_segment, eval_cdf,
                          eval_quantile, gen_inverse, linear_segment, make_cdf,
                          make_quantile, support_bounds)
from qproc.rng import Stream
from qproc.verify import random_mixture_cdf


def test_eval_cdf_bernoulli(zoo):
    F = zoo["bernoulli:p=0.3"].cdf
    assert eval_cdf(F, -0.5) == 0.0
    assert eval_cdf(F, 0.0) == 0.7          # right-continuous at the atom
    assert eval_cdf(F, 0.999) == 0.7
    assert eval_cdf(F, 1.0) == 1.0


def test_eval_cdf_exponential(zoo):
    F = zoo["exp:rate=1"].cdf
    assert eval_cdf(F, 1.0) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-15)


def test_gen_inverse_bernoulli_atom(zoo):
    Q = gen_inverse(zoo["bernoulli:p=0.3"].cdf)
    assert eval_quantile(Q, 0.7) == 0.0     # infimum at the atom
    assert eval_quantile(Q, 0.70001) == 1.0


def test_gen_inverse_empirical_steps():
    F = make_cdf([const_segment(0.5, 2.0, 0.5), const_segment(2.0, INF, 1.0)])
    Q = gen_inverse(F)
    assert eval_quantile(Q, 0.5) == 0.5
    assert eval_quantile(Q, 0.75) == 2.0


def test_gen_inverse_uniform_identity(zoo):
    Q = gen_inverse(zoo["uniform"].cdf)
    assert eval_quantile(Q, 0.25) == pytest.approx(0.25, abs=1e-15)


def test_eval_quantile_closed_forms(zoo):
    assert eval_quantile(zoo["exp:rate=1"].quantile, 1.0 - math.exp(-1.0)) == \
        pytest.approx(1.0, abs=1e-12)
    assert eval_quantile(zoo["uniform"].quantile, 0.5) == 0.5
    # ternary-digit evaluation; 1/3 is evaluated at the nearest double
    assert eval_quantile(zoo["cantor"].quantile, 1.0 / 3.0) == \
        pytest.approx(0.5, abs=1e-10)


def test_eval_quantile_domain_error(zoo):
    Q = zoo["uniform"].quantile
    for bad in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(DomainError):
            eval_quantile(Q, bad)


def test_representation_error_non_contiguous():
    with pytest.raises(RepresentationError):
        PiecewiseMonotone([const_segment(0.0, 0.4, 0.0),
                           const_segment(0.5, 1.0, 1.0)], "quantile")


def test_support_bounds(zoo):
    sb = support_bounds(zoo["bernoulli:p=0.3"].cdf)
    assert (sb.alpha, sb.beta) == (0.0, 1.0)
    sb = support_bounds(zoo["exp:rate=1"].cdf)
    assert (sb.alpha, sb.beta) == (0.0, INF)
    sb = support_bounds(zoo["uniform"].cdf)
    assert (sb.alpha, sb.beta) == (0.0, 1.0)


def test_galois_property_randomized():
    stream = Stream(515)
    bad = 0
    for _ in range(200):
        F = random_mixture_cdf(stream)
        Q = gen_inverse(F)
        x = stream.uniforms(50) * 6.0 - 3.0
        u = stream.uniforms(50)
        bad += int(np.sum((np.asarray(F(x)) >= u) != (x >= np.asarray(Q(u)))))
    assert bad == 0


def test_attained_values_roundtrip():
    stream = Stream(99)
    for _ in range(100):
        F = random_mixture_cdf(stream)
        Q = gen_inverse(F)
        x = stream.uniforms(20) * 6.0 - 3.0
        u = np.asarray(F(x), dtype=float)
        ok = (u > 0.0) & (u < 1.0)
        gap = np.abs(np.asarray(F(Q(u[ok]))) - u[ok])
        assert np.all(gap <= 4 * np.finfo(float).eps)


def test_continuous_quantile_left_inverse(zoo):
    for spec in ("uniform", "exp:rate=1", "normal", "logistic"):
        dist = zoo[spec]
        u = Stream(3).uniforms(500) * 0.998 + 0.001
        x = dist.quantile(u)
        Fx = dist.cdf(x)
        back = dist.quantile(Fx)
        assert np.max(np.abs(back - x) / np.maximum(1.0, np.abs(x))) <= 1e-12


def test_double_inversion_reproduces_cdf():
    stream = Stream(2718)
    for _ in range(50):
        F = random_mixture_cdf(stream)
        F2 = gen_inverse(gen_inverse(F))
        x = stream.uniforms(100) * 6.0 - 3.0
        # agreement at continuity points of F (jump locations excluded a.s.)
        assert np.max(np.abs(np.asarray(F(x)) - np.asarray(F2(x)))) <= 1e-12


def test_monotone_evaluation_random_pairs():
    stream = Stream(77)
    for _ in range(50):
        F = random_mixture_cdf(stream)
        xy = np.sort(stream.uniforms(2) * 8.0 - 4.0)
        assert F(xy[0]) <= F(xy[1]) + 1e-15


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6),
       st.floats(min_value=1e-6, max_value=1 - 1e-6))
@settings(max_examples=200, deadline=None)
def test_quantile_monotone_hypothesis(u, v):
    Q = make_quantile([linear_segment(0.0, 0.5, -1.0, 0.0),
                       const_segment(0.5, 0.75, 0.0),
                       linear_segment(0.75, 1.0, 1.0, 2.0)])
    lo, hi = min(u, v), max(u, v)
    assert Q(lo) <= Q(hi)


def test_quantile_to_cdf_conventions():
    # quantile with a flat (atom) and a jump (cdf flat)
    Q = make_quantile([const_segment(0.0, 0.5, 0.0),
                       const_segment(0.5, 1.0, 2.0)])
    F = gen_inverse(Q)
    assert F(-0.1) == 0.0
    assert F(0.0) == 0.5       # atom at 0 of mass 0.5
    assert F(1.0) == 0.5       # flat over the quantile jump
    assert F(2.0) == 1.0


def test_cdf_range_validation():
    with pytest.raises(RepresentationError):
        make_cdf([linear_segment(0.0, 1.0, 0.0, 1.0 + 1e-9)])
