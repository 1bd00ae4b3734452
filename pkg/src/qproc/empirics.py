"""Empirical cdf/quantile construction and exact L1 functionals.

The two distances are computed by genuinely different decompositions:

* the quantile-side distance splits (0, 1) at the empirical step breaks and
  locates the crossing of the true quantile with each step level;
* the cdf-side distance splits the real line at the sample points, locates
  the crossing of the true cdf with each step level, and reduces cdf
  integrals to quantile antiderivatives by Stieltjes substitution
  (integral of F over [a, b] = b F(b) - a F(a) - integral of Q over
  (F(a), F(b)]), with the same identity supplying exact tail integrals.

Crossing search is monotone bisection to well below 1e-13 (the function
minus the level has at most one sign change per step interval).  Ties in
the sample are merged into single jumps of height k/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geninv import CONST, INF, PiecewiseMonotone, const_segment, make_cdf, make_quantile

_BISECT_ITERS = 60


@dataclass(frozen=True)
class EmpiricalData:
    """An iid sample stored in ascending order."""

    sorted_sample: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.sorted_sample, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("sample must be a nonempty 1-d array")
        if np.any(np.diff(arr) < 0):
            raise DomainError("sample must be sorted ascending; use from_raw")
        object.__setattr__(self, "sorted_sample", arr)

    @classmethod
    def from_raw(cls, values):
        return cls(np.sort(np.asarray(values, dtype=float)))

    @property
    def n(self):
        return self.sorted_sample.size


def _step_points(data):
    """Unique sample values and cumulative fractions (ties merged)."""
    vals, counts = np.unique(data.sorted_sample, return_counts=True)
    fracs = np.cumsum(counts) / data.n
    fracs[-1] = 1.0
    return vals, fracs


def empirical_cdf(data):
    """Right-continuous step cdf with jumps k/n at the (merged) sample points."""
    vals, fracs = _step_points(data)
    segments = [const_segment(vals[i], vals[i + 1], fracs[i])
                for i in range(len(vals) - 1)]
    segments.append(const_segment(vals[-1], INF, 1.0))
    return make_cdf(segments)


def empirical_quantile(data):
    """Left-continuous step quantile: sample value k on ((k-1)/n, k/n]."""
    vals, fracs = _step_points(data)
    breaks = np.concatenate([[0.0], fracs])
    segments = [const_segment(breaks[i], breaks[i + 1], vals[i])
                for i in range(len(vals))]
    return make_quantile(segments)


def _step_quantile_arrays(Q):
    if Q.orientation != "quantile" or any(s.kind != CONST for s in Q.segments):
        raise DomainError("expected a step (piecewise-constant) quantile")
    breaks = np.array([s.lo for s in Q.segments] + [1.0])
    levels = np.array([s.y0 for s in Q.segments])
    return breaks, levels


def _step_cdf_arrays(F):
    if F.orientation != "cdf" or any(s.kind != CONST for s in F.segments):
        raise DomainError("expected a step (piecewise-constant) cdf")
    xs = np.array([s.hi for s in F.segments[:-1]])
    levels = np.array([s.y0 for s in F.segments])
    return xs, levels


def _bisect_on(fn, lo, hi, level, iters=_BISECT_ITERS):
    """Per-interval crossing of a nondecreasing fn with a level.

    Collapses to ``lo`` when fn >= level throughout and to ``hi`` when
    fn < level throughout, which is exactly where the split must land.
    """
    a = lo.copy()
    b = hi.copy()
    for _ in range(iters):
        m = 0.5 * (a + b)
        ge = np.asarray(fn(m)) >= level
        b = np.where(ge, m, b)
        a = np.where(ge, a, m)
    return 0.5 * (a + b)


def _quantile_side(breaks, levels, dist, window):
    w0, w1 = window
    lo = np.maximum(breaks[:-1], w0)
    hi = np.minimum(breaks[1:], w1)
    keep = lo < hi
    lo, hi, lev = lo[keep], hi[keep], levels[keep]
    if lo.size == 0:
        return 0.0
    c = _bisect_on(dist.quantile, lo, hi, lev)
    below = lev * (c - lo) - dist.quantile_integral(lo, c)
    above = dist.quantile_integral(c, hi) - lev * (hi - c)
    return float(np.sum(np.clip(below, 0.0, None) + np.clip(above, 0.0, None)))


def l1_quantile_distance(Qn, dist, window=(0.0, 1.0)):
    """Exact integral of |Qn - Q| over the window; +inf for infinite mean."""
    if not dist.finite_mean:
        return math.inf
    breaks, levels = _step_quantile_arrays(Qn)
    return _quantile_side(breaks, levels, dist, window)


def _cdf_interval_integral(dist, a, b):
    """Integral of the true cdf over [a, b] via Stieltjes substitution."""
    Fa = dist.cdf(a)
    Fb = dist.cdf(b)
    return b * Fb - a * Fa - dist.quantile_integral(Fa, Fb)


def l1_cdf_distance(Fn, dist):
    """Exact integral of |Fn - F| over the real line; +inf for infinite mean."""
    if not dist.finite_mean:
        return math.inf
    xs, levels = _step_cdf_arrays(Fn)
    return _cdf_side(xs, levels, dist)


def interval_integral(data, dist, a, b):
    """Exact signed sqrt(n)-scaled integral of (Qn - Q) over (a, b)."""
    a, b = float(a), float(b)
    if not (0.0 < a < b < 1.0):
        raise DomainError("need 0 < a < b < 1")
    breaks, levels = _data_step_quantile(data)
    lo = np.maximum(breaks[:-1], a)
    hi = np.minimum(breaks[1:], b)
    overlap = np.clip(hi - lo, 0.0, None)
    step_part = float(np.sum(levels * overlap))
    true_part = float(dist.quantile_integral(a, b))
    return math.sqrt(data.n) * (step_part - true_part)


def _data_step_quantile(data):
    vals, fracs = _step_points(data)
    return np.concatenate([[0.0], fracs]), vals


def _data_step_cdf(data):
    vals, fracs = _step_points(data)
    return vals, np.concatenate([[0.0], fracs])


def _cdf_side(xs, levels, dist):
    total = 0.0
    # left tail (the integrand is F itself) and right tail (1 - F)
    x0 = xs[0]
    total += x0 * dist.cdf(x0) - dist.quantile_integral(0.0, dist.cdf(x0))
    xk = xs[-1]
    total += dist.quantile_integral(dist.cdf(xk), 1.0) - xk * (1.0 - dist.cdf(xk))
    if len(xs) > 1:
        lo, hi, lev = xs[:-1], xs[1:], levels[1:-1]
        c = _bisect_on(dist.cdf, lo, hi, lev)
        below = lev * (c - lo) - _cdf_interval_integral(dist, lo, c)
        above = _cdf_interval_integral(dist, c, hi) - lev * (hi - c)
        total += float(np.sum(np.clip(below, 0.0, None) + np.clip(above, 0.0, None)))
    return total


def zeta_statistic(data, dist):
    """sqrt(n) times the exact L1 distance between Fn and F (x-side path)."""
    if not dist.finite_mean:
        return math.inf
    xs, levels = _data_step_cdf(data)
    return math.sqrt(data.n) * _cdf_side(xs, levels, dist)


def l1_quantile_statistic(data, dist, window=(0.0, 1.0)):
    """sqrt(n) times the exact windowed L1 distance of Qn from Q (u-side path)."""
    if not dist.finite_mean:
        return math.inf
    breaks, levels = _data_step_quantile(data)
    return math.sqrt(data.n) * _quantile_side(breaks, levels, dist, window)


def sup_cdf_distance(data, dist):
    """Exact sup-norm distance between Fn and a continuous F."""
    vals, fracs = _step_points(data)
    Fv = np.asarray(dist.cdf(vals), dtype=float)
    upper = np.max(np.abs(fracs - Fv))
    lower = np.max(np.abs(np.concatenate([[0.0], fracs[:-1]]) - Fv))
    return float(max(upper, lower))
