import math

import numpy as np
import pytest
from scipy.integrate import quad

from qproc.errors import (DomainError, InvalidDirectionError, StepTooLargeError)
from qproc.geninv import linear_segment, make_cdf
from qproc.hadamard import (ModifiedCdf, StepFunction, derivative_along,
                            direction_from_g, fd_derivative_error, gq_norm,
                            lipschitz_check, perturb_identity_residual,
                            perturbed_inverse, step_composition_norm)
from qproc.rng import Stream
from qproc.verify import suite_lipschitz, suite_norm_bound, suite_perturbation

G_POLY = lambda v: np.asarray(v) * (1.0 - np.asarray(v))
G_SIN = lambda v: np.sin(np.pi * np.asarray(v))
G_CUBIC = lambda v: np.asarray(v) ** 2 * (1.0 - np.asarray(v))
G_ZERO = lambda v: np.zeros_like(np.asarray(v, dtype=float))

T_GRID = (0.2, 0.1, 0.05, 0.025, 0.0125)


def test_direction_from_g_composition(zoo):
    d = direction_from_g(G_POLY, zoo["uniform"].cdf)
    x = np.array([-0.5, 0.25, 0.5, 1.5])
    assert d(x) == pytest.approx([0.0, 0.25 * 0.75, 0.25, 0.0])
    d = direction_from_g(G_SIN, zoo["exp:rate=1"].cdf)
    assert float(d(np.array([1.0]))[0]) == pytest.approx(
        math.sin(math.pi * (1.0 - math.exp(-1.0))))
    d = direction_from_g(G_ZERO, zoo["uniform"].cdf)
    assert np.all(d(x) == 0.0)


def test_direction_endpoint_validation(zoo):
    with pytest.raises(InvalidDirectionError):
        direction_from_g(lambda v: np.asarray(v), zoo["uniform"].cdf)


def test_perturbed_inverse_quadratic_oracle(zoo):
    # u = x + t x(1-x) inverts to the root of t x^2 - (1+t) x + u = 0
    t = 0.1
    Qt = perturbed_inverse(zoo["uniform"].cdf, direction_from_g(G_POLY, zoo["uniform"].cdf), t)
    for u in (0.1, 0.5, 0.9):
        oracle = ((1 + t) - math.sqrt((1 + t) ** 2 - 4 * t * u)) / (2 * t)
        assert float(Qt(u)) == pytest.approx(oracle, abs=1e-11)
    assert float(Qt(0.5)) == pytest.approx(0.4750621894395546, abs=1e-11)


def test_perturbed_inverse_zero_step(zoo):
    Qt = perturbed_inverse(zoo["uniform"].cdf,
                           direction_from_g(G_POLY, zoo["uniform"].cdf), 0.0)
    u = np.linspace(0.05, 0.95, 11)
    assert Qt(u) == pytest.approx(u, abs=1e-15)


def test_perturbed_inverse_step_too_large(zoo):
    with pytest.raises(StepTooLargeError):
        perturbed_inverse(zoo["uniform"].cdf,
                          direction_from_g(G_POLY, zoo["uniform"].cdf), 20.0)


def test_fd_error_decay_all_fixtures(zoo):
    for spec in ("uniform", "exp:rate=1", "logistic"):
        dist = zoo[spec]
        for g in (G_POLY, G_SIN, G_CUBIC):
            errs = [fd_derivative_error(dist, g, t) for t in (0.1, 0.05)]
            assert errs[1] < errs[0]


def test_fd_error_uniform_closed_form_oracle(zoo):
    # independent oracle: invert the quadratic exactly and integrate by quadrature
    dist = zoo["uniform"]
    t = 0.05

    def qt_exact(u):
        return ((1 + t) - math.sqrt((1 + t) ** 2 - 4 * t * u)) / (2 * t)

    oracle, _ = quad(lambda u: abs((qt_exact(u) - u) / t + u * (1 - u)),
                     0.0, 1.0, epsabs=1e-12, limit=200)
    assert fd_derivative_error(dist, G_POLY, t) == pytest.approx(oracle, abs=1e-7)


def test_fd_error_zero_direction(zoo):
    assert fd_derivative_error(zoo["uniform"], G_ZERO, 0.1) == \
        pytest.approx(0.0, abs=1e-12)


def test_fd_error_final_threshold(zoo):
    dist = zoo["exp:rate=1"]
    errs = [fd_derivative_error(dist, G_SIN, t) for t in T_GRID]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 0.05 * gq_norm(dist, G_SIN)


def test_perturb_identity_example():
    F = make_cdf([linear_segment(0.0, 1.0, 0.0, 1.0)])
    G = make_cdf([linear_segment(0.25, 0.75, 0.0, 1.0)])
    from qproc.geninv import gen_inverse
    Ginv = gen_inverse(G)
    assert float(Ginv(0.1)) - 0.1 == pytest.approx(0.2, abs=1e-12)
    assert perturb_identity_residual(F, G, [0.1]) <= 1e-8
    assert perturb_identity_residual(F, G, np.linspace(0.05, 0.95, 19)) <= 1e-8


def test_perturb_identity_trivial_and_error():
    F = make_cdf([linear_segment(0.0, 1.0, 0.0, 1.0)])
    assert perturb_identity_residual(F, F, [0.3, 0.7]) == 0.0
    G = make_cdf([linear_segment(-1.0, 2.0, 0.0, 1.0)])
    with pytest.raises(DomainError):
        perturb_identity_residual(F, G, [0.5])


def test_perturbation_suite():
    res = suite_perturbation(20, seed=424242)
    assert res.violations == 0
    assert res.worst <= 1e-8


def test_lipschitz_examples(zoo):
    F = zoo["uniform"].cdf
    h = StepFunction(np.array([0.0, 1.0]), np.array([0.1]))
    zero = StepFunction(np.array([0.0, 1.0]), np.array([0.0]))
    assert lipschitz_check(F, h, h) == (0.0, 0.0)
    lhs, rhs = lipschitz_check(F, h, zero)
    assert (lhs, rhs) == pytest.approx((0.1, 0.1), abs=1e-14)


def test_lipschitz_randomized_suite():
    res = suite_lipschitz(100, seed=1001)
    assert res.violations == 0


def test_derivative_linearity(zoo):
    for spec in ("uniform", "exp:rate=1", "logistic"):
        dist = zoo[spec]
        u = Stream(4).uniforms(64) * 0.998 + 0.001
        a, b = 1.7, -0.4
        combo = derivative_along(dist, lambda v: a * G_POLY(v) + b * G_SIN(v))(u)
        parts = a * derivative_along(dist, G_POLY)(u) + b * derivative_along(dist, G_SIN)(u)
        assert np.max(np.abs(combo - parts) / np.maximum(1.0, np.abs(parts))) <= 1e-12


def test_norm_bound_suite():
    res = suite_norm_bound(100, seed=55)
    assert res.violations == 0
    assert res.worst <= 1e-8


def test_composition_norm_never_exceeds_l1(zoo):
    stream = Stream(31)
    for spec in ("uniform", "exp:rate=1", "logistic"):
        dist = zoo[spec]
        for _ in range(30):
            k = 1 + int(stream.uniforms(1)[0] * 3)
            xs = np.sort(stream.uniforms(k + 1) * 4.0 - 1.0)
            if np.any(np.diff(xs) <= 0):
                continue
            h = StepFunction(xs, stream.uniforms(k) * 2.0 - 1.0)
            assert step_composition_norm(dist, h) <= h.l1_norm() + 1e-8


def test_modified_cdf(zoo):
    m = ModifiedCdf(zoo["exp:rate=1"].cdf)
    x = np.array([-1.0, 0.5, 3.0])
    expect = zoo["exp:rate=1"].cdf(x) - (x >= 0)
    assert m(x) == pytest.approx(expect)
    # integrable shift: the L1 norm equals E|X| = 1 for the unit exponential
    assert m.l1_norm() == pytest.approx(1.0, abs=1e-9)
    assert m.in_domain_of(zoo["exp:rate=1"].cdf)
    assert not ModifiedCdf(make_cdf([linear_segment(-1.0, 2.0, 0.0, 1.0)])) \
        .in_domain_of(zoo["uniform"].cdf)
