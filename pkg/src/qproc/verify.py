"""Randomized property suites over the generalized-inverse machinery.

Each suite draws its cases from a keyed substream, so a (cases, seed) pair
pins the exact case list.  The suites cover:

* galois           F(x) >= u  iff  x >= Q(u), on random mixture cdfs;
* fixed_point      F(Q(u)) = u for u attained by F (exact on step cdfs,
                   machine precision on mixtures with linear pieces);
* inverse_identity Q(F(x)) = x on continuous strictly increasing fixtures;
* substitution     integral of h dQ over [a, b) equals the x-side integral
                   of h(F(x)) between the quantile values (quadrature oracle);
* fixed_point_ae   F(Q(u)) = u at atoms and at density-weighted points;
* norm_bound       ||(h o Q) q||_1 equals the support-restricted ||h||_1
                   and never exceeds ||h||_1, for step directions h;
* linearity        the derivative evaluator is linear in the direction;
* perturbation     the exact perturbation identity on piecewise-linear pairs;
* lipschitz        reduced Lipschitz bound lhs <= rhs on step pairs.

The ``corrupt`` flag biases one fixture's quantile evaluations, providing a
failure path for exercising the nonzero-exit contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .geninv import (INF, const_segment, gen_inverse, linear_segment, make_cdf,
                     support_bounds)
from .hadamard import (StepFunction, derivative_along, lipschitz_check,
                       perturb_identity_residual, step_composition_norm)
from .lsint import ls_integrate, measure_of
from .rng import Stream, mix
from .zoo import make_distribution

_SUITE_KEYS = {name: i for i, name in enumerate(
    ["galois", "fixed_point", "inverse_identity", "substitution",
     "fixed_point_ae", "norm_bound", "linearity", "perturbation", "lipschitz"])}

_CONTINUOUS_SPECS = ("uniform", "exp:rate=1", "normal", "logistic", "pareto:alpha=3")
_AC_SPECS = ("uniform", "exp:rate=1", "logistic")


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    violations: int
    worst: float

    @property
    def passed(self):
        return self.violations == 0


def _suite_stream(seed, name):
    return Stream(mix(seed, 0x5017E5, _SUITE_KEYS[name]))


def random_mixture_cdf(stream):
    """Random cdf mixing atoms, linear rises, and flats on [-2, 2]."""
    k = 2 + int(stream.uniforms(1)[0] * 4)
    xs = np.sort(stream.uniforms(k) * 4.0 - 2.0)
    raw = stream.uniforms(2 * k + 1)
    keep = stream.uniforms(2 * k + 1) > 0.35
    inc = raw * keep
    if inc.sum() <= 0:
        inc[0] = 1.0
    # cumulative levels normalized so every value sits exactly in [0, 1]:
    # inc[0] jumps at xs[0], inc[2i+1] rises on (xs[i], xs[i+1]),
    # inc[2i+2] jumps at xs[i+1], and the leftovers jump at xs[-1].
    cum = np.cumsum(inc)
    levels = np.minimum(cum / cum[-1], 1.0)
    segments = []
    for i in range(k - 1):
        lo_level = float(levels[2 * i])
        hi_level = float(levels[2 * i + 1])
        if hi_level > lo_level:
            segments.append(linear_segment(xs[i], xs[i + 1], lo_level, hi_level))
        else:
            segments.append(const_segment(xs[i], xs[i + 1], lo_level))
    segments.append(const_segment(xs[-1], INF, 1.0))
    return make_cdf(segments)


def suite_galois(cases, seed, corrupt=False):
    stream = _suite_stream(seed, "galois")
    per_cdf = 25
    n_cdfs = max(1, math.ceil(cases / per_cdf))
    violations = 0
    total = 0
    for _ in range(n_cdfs):
        F = random_mixture_cdf(stream)
        Q = gen_inverse(F)
        m = min(per_cdf, cases - total)
        if m <= 0:
            break
        x = stream.uniforms(m) * 6.0 - 3.0
        u = stream.uniforms(m)
        lhs = np.asarray(F(x)) >= u
        rhs = x >= np.asarray(Q(u))
        violations += int(np.sum(lhs != rhs))
        total += m
    return SuiteResult("galois", total, violations, float(violations))


def suite_fixed_point(cases, seed, corrupt=False):
    stream = _suite_stream(seed, "fixed_point")
    per_cdf = 25
    n_cdfs = max(1, math.ceil(cases / per_cdf))
    violations = 0
    worst = 0.0
    total = 0
    eps = 4 * np.finfo(float).eps
    for _ in range(n_cdfs):
        F = random_mixture_cdf(stream)
        Q = gen_inverse(F)
        m = min(per_cdf, cases - total)
        if m <= 0:
            break
        x = stream.uniforms(m) * 6.0 - 3.0
        u = np.asarray(F(x), dtype=float)
        ok = (u > 0.0) & (u < 1.0)
        if np.any(ok):
            roundtrip = np.asarray(F(Q(u[ok])), dtype=float)
            gap = np.abs(roundtrip - u[ok])
            worst = max(worst, float(gap.max()))
            violations += int(np.sum(gap > eps))
        total += m
    return SuiteResult("fixed_point", total, violations, worst)


def suite_inverse_identity(cases, seed, corrupt=False):
    stream = _suite_stream(seed, "inverse_identity")
    dists = [make_distribution(s) for s in _CONTINUOUS_SPECS]
    violations = 0
    worst = 0.0
    per = max(1, cases // len(dists))
    total = 0
    for dist in dists:
        m = min(per, cases - total)
        if m <= 0:
            break
        u = stream.uniforms(m) * 0.998 + 0.001
        x = np.asarray(dist.quantile(u), dtype=float)
        Fx = np.asarray(dist.cdf(x), dtype=float)
        inner = (Fx > 0.0) & (Fx < 1.0)
        back = np.asarray(dist.quantile(Fx[inner]), dtype=float)
        gap = np.abs(back - x[inner]) / np.maximum(1.0, np.abs(x[inner]))
        worst = max(worst, float(gap.max()))
        violations += int(np.sum(gap > 1e-12))
        total += m
    return SuiteResult("inverse_identity", total, violations, worst)


_H_PANEL = (
    ("one", lambda u: np.ones_like(np.asarray(u, dtype=float))),
    ("u", lambda u: np.asarray(u, dtype=float)),
    ("u2", lambda u: np.asarray(u, dtype=float) ** 2),
    ("sinpi", lambda u: np.sin(np.pi * np.asarray(u, dtype=float))),
)


def suite_substitution(cases, seed, corrupt=False):
    stream = _suite_stream(seed, "substitution")
    dists = [make_distribution(s) for s in _CONTINUOUS_SPECS]
    mus = [measure_of(d.quantile) for d in dists]
    violations = 0
    worst = 0.0
    bias = 1e-3 if corrupt else 0.0
    for i in range(cases):
        dist = dists[i % len(dists)]
        mu = mus[i % len(dists)]
        _, h = _H_PANEL[(i // len(dists)) % len(_H_PANEL)]
        uu = stream.uniforms(2) * 0.9 + 0.05
        a, b = float(min(uu)), float(max(uu))
        if b - a < 1e-3:
            b = min(0.999, a + 1e-3)
        lhs = ls_integrate(h, mu, (a, b)) + bias
        qa = float(dist.quantile(np.array([a]))[0])
        qb = float(dist.quantile(np.array([b]))[0])
        rhs, _err = quad(lambda x: float(h(np.asarray(dist.cdf(np.asarray(x))))),
                         qa, qb, epsabs=1e-10, epsrel=1e-10, limit=100)
        gap = abs(lhs - rhs)
        worst = max(worst, gap)
        violations += int(gap > 1e-8)
    return SuiteResult("substitution", cases, violations, worst)


def suite_fixed_point_ae(cases, seed, corrupt=False):
    stream = _suite_stream(seed, "fixed_point_ae")
    specs = ("bernoulli:p=0.3", "uniform", "exp:rate=1", "logistic", "normal")
    dists = [make_distribution(s) for s in specs]
    violations = 0
    worst = 0.0
    total = 0
    per = max(1, cases // len(dists))
    for dist in dists:
        m = min(per, cases - total)
        if m <= 0:
            break
        mu = measure_of(dist.quantile)
        for at in mu.atoms:
            gap = abs(float(dist.cdf(dist.quantile(np.array([at.u]))[0])) - at.u)
            worst = max(worst, gap)
            violations += int(gap > 0.0)
        if mu.ac_pieces:
            # density-weighted u-points: u = F(x) with x uniform on a
            # quantile-value window (the pushforward of dQ is dx)
            xlo = float(dist.quantile(np.array([0.001]))[0])
            xhi = float(dist.quantile(np.array([0.999]))[0])
            x = stream.uniforms(m) * (xhi - xlo) + xlo
            u = np.asarray(dist.cdf(x), dtype=float)
            gap = np.abs(np.asarray(dist.cdf(dist.quantile(u)), dtype=float) - u)
            worst = max(worst, float(gap.max()))
            violations += int(np.sum(gap > 1e-12))
        total += m
    return SuiteResult("fixed_point_ae", total, violations, worst)


def _random_step(stream, lo, hi, max_pieces=4):
    k = 1 + int(stream.uniforms(1)[0] * max_pieces)
    xs = np.sort(stream.uniforms(k + 1) * (hi - lo) + lo)
    while np.any(np.diff(xs) <= 0):
        xs = np.sort(stream.uniforms(k + 1) * (hi - lo) + lo)
    vals = stream.uniforms(k) * 2.0 - 1.0
    return StepFunction(xs, vals)


def suite_norm_bound(cases, seed, corrupt=False):
    stream = _suite_stream(seed, "norm_bound")
    dists = [make_distribution(s) for s in _AC_SPECS]
    bounds = [support_bounds(d.cdf) for d in dists]
    violations = 0
    worst = 0.0
    for i in range(cases):
        dist = dists[i % len(dists)]
        sb = bounds[i % len(dists)]
        h = _random_step(stream, -1.5, 3.0)
        comp = step_composition_norm(dist, h)
        full = h.l1_norm()
        # identity: the composition norm equals ||h||_1 restricted to the support
        restricted = 0.0
        for x1, x2, v in zip(h.xs[:-1], h.xs[1:], h.vals):
            c, d = max(x1, sb.alpha), min(x2, sb.beta)
            if c < d:
                restricted += abs(v) * (d - c)
        gap = abs(comp - restricted)
        worst = max(worst, gap)
        violations += int(gap > 1e-8 or comp > full + 1e-10)
    return SuiteResult("norm_bound", cases, violations, worst)


def suite_linearity(cases, seed, corrupt=False):
    stream = _suite_stream(seed, "linearity")
    dists = [make_distribution(s) for s in _AC_SPECS]
    violations = 0
    worst = 0.0
    g1 = lambda u: np.asarray(u) * (1.0 - np.asarray(u))
    g2 = lambda u: np.sin(np.pi * np.asarray(u))
    for i in range(cases):
        dist = dists[i % len(dists)]
        a, b = (stream.uniforms(2) * 4.0 - 2.0)
        u = stream.uniforms(16) * 0.998 + 0.001
        combo = derivative_along(dist, lambda v: a * g1(v) + b * g2(v))(u)
        parts = a * derivative_along(dist, g1)(u) + b * derivative_along(dist, g2)(u)
        scale = np.maximum(1.0, np.abs(parts))
        gap = float(np.max(np.abs(combo - parts) / scale))
        worst = max(worst, gap)
        violations += int(gap > 1e-12)
    return SuiteResult("linearity", cases, violations, worst)


def _random_linear_cdf(stream, lo, hi, pieces=3, allow_flats=True):
    """Strictly or weakly increasing piecewise-linear cdf supported in [lo, hi]."""
    k = pieces
    xs = np.sort(stream.uniforms(k + 1) * (hi - lo) + lo)
    while np.any(np.diff(xs) <= 1e-3):
        xs = np.sort(stream.uniforms(k + 1) * (hi - lo) + lo)
    raw = stream.uniforms(k)
    if allow_flats:
        raw = raw * (stream.uniforms(k) > 0.3)
    if raw.sum() <= 0:
        raw = np.ones(k)
    levels = np.concatenate([[0.0], np.cumsum(raw / raw.sum())])
    levels[-1] = 1.0
    segments = []
    for i in range(k):
        if levels[i + 1] > levels[i]:
            segments.append(linear_segment(xs[i], xs[i + 1], levels[i], levels[i + 1]))
        else:
            segments.append(const_segment(xs[i], xs[i + 1], levels[i]))
    return make_cdf(segments)


def suite_perturbation(cases, seed, corrupt=False):
    stream = _suite_stream(seed, "perturbation")
    violations = 0
    worst = 0.0
    for _ in range(cases):
        F = _random_linear_cdf(stream, 0.0, 1.0, pieces=3, allow_flats=False)
        sb = support_bounds(F)
        margin = 0.05 * (sb.beta - sb.alpha)
        G = _random_linear_cdf(stream, sb.alpha + margin, sb.beta - margin,
                               pieces=3, allow_flats=True)
        grid = stream.uniforms(7) * 0.9 + 0.05
        res = perturb_identity_residual(F, G, grid)
        worst = max(worst, res)
        violations += int(res > 1e-8)
    return SuiteResult("perturbation", cases, violations, worst)


def suite_lipschitz(cases, seed, corrupt=False):
    stream = _suite_stream(seed, "lipschitz")
    dists = [make_distribution(s) for s in _AC_SPECS]
    violations = 0
    worst = -math.inf
    for i in range(cases):
        dist = dists[i % len(dists)]
        h1 = _random_step(stream, -1.0, 2.5)
        h2 = _random_step(stream, -1.0, 2.5)
        lhs, rhs = lipschitz_check(dist.cdf, h1, h2)
        worst = max(worst, lhs - rhs)
        violations += int(lhs > rhs + 1e-10)
    return SuiteResult("lipschitz", cases, violations, worst)


_FULL_WEIGHT = {"galois": 1.0, "fixed_point": 1.0, "inverse_identity": 1.0,
                "substitution": 1.0, "fixed_point_ae": 1.0, "norm_bound": 0.01,
                "linearity": 0.1, "perturbation": 0.002, "lipschitz": 0.01}

_SUITES = {
    "galois": suite_galois,
    "fixed_point": suite_fixed_point,
    "inverse_identity": suite_inverse_identity,
    "substitution": suite_substitution,
    "fixed_point_ae": suite_fixed_point_ae,
    "norm_bound": suite_norm_bound,
    "linearity": suite_linearity,
    "perturbation": suite_perturbation,
    "lipschitz": suite_lipschitz,
}


def run_suites(cases=10000, seed=20240810, corrupt=False):
    """Run every suite; heavy suites scale sublinearly in ``cases``."""
    results = []
    for name, fn in _SUITES.items():
        n = max(1, math.ceil(cases * _FULL_WEIGHT[name]))
        results.append(fn(n, seed, corrupt=corrupt))
    return results
