"""Numerical verification of the derivative of the generalized-inverse map.

The map sends an (integrably shifted) cdf to its quantile function.  At a
base cdf F with locally absolutely continuous quantile Q and density q, its
derivative in an admissible direction h = g o F is u -> -g(u) q(u).  This
module provides the pieces needed to check that numerically:

* perturbed inverses (F + t h)^{-1}, with the inadmissible-step guard;
* the finite-difference derivative error
  || (Q_t - Q) / t + g q ||_1  ->  0 as t -> 0;
* the exact perturbation identity
  G^{-1}(u) - Q(u) = int [1(v >= u) - 1(v + h(Q(v)) >= u)] dQ(v)
  on piecewise-linear fixtures;
* the Lipschitz bound
  int |h1(Q(v)) - h2(Q(v))| dQ(v) <= ||h1 - h2||_1
  on step-function fixtures, evaluated exactly.

Admissibility of a step t is validated on a dense grid (monotonicity of
F + t h), not repaired: an inadmissible step raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (DomainError, InvalidDirectionError, PreconditionError,
                     StepTooLargeError)
from .geninv import (CONST, INF, LINEAR, PiecewiseMonotone, closed_segment,
                     gen_inverse, make_quantile, support_bounds)
from .lsint import ls_integrate, measure_of

_ADMISSIBILITY_GRID = 2 ** 14
_ENDPOINT_CLEARANCE = 1e-9


@dataclass(frozen=True)
class ModifiedCdf:
    """A cdf shifted by -1(x >= 0), making it an integrable function.

    The shift is applied at evaluation time; it is integrable over the real
    line exactly when the base quantile is integrable (finite absolute mean).
    """

    base: PiecewiseMonotone

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.base(x) - (x >= 0.0)

    def l1_norm(self):
        """Integral of |base(x) - 1(x >= 0)| over the line (= E|X|)."""
        Q = gen_inverse(self.base)
        u0 = float(self.base(0.0))
        if u0 <= 0.0 or u0 >= 1.0:
            return abs(float(Q.integral(0.0, 1.0)))
        return float(-Q.integral(0.0, u0) + Q.integral(u0, 1.0))

    def in_domain_of(self, F):
        """Support condition for perturbations around the cdf F."""
        sb = support_bounds(F)
        ok_lo = sb.alpha == -INF or abs(self.base.left_limit(sb.alpha)) <= 1e-12
        ok_hi = sb.beta == INF or abs(self.base.right_limit(sb.beta) - 1.0) <= 1e-12
        return ok_lo and ok_hi


@dataclass(frozen=True)
class TangentDirection:
    """Direction h = g o F with g continuous and vanishing at 0 and 1."""

    g: Callable
    F: PiecewiseMonotone

    def __call__(self, x):
        return np.asarray(self.g(self.F(x)), dtype=float)


def direction_from_g(g, F):
    """Build a tangent direction, validating the endpoint decay of g."""
    g0 = float(np.asarray(g(0.0), dtype=float))
    g1 = float(np.asarray(g(1.0), dtype=float))
    if abs(g0) > 1e-12 or abs(g1) > 1e-12:
        raise InvalidDirectionError(
            f"direction must vanish at the endpoints (g(0)={g0:g}, g(1)={g1:g})")
    probe = np.asarray(g(np.linspace(0.0, 1.0, 1001)), dtype=float)
    if not np.all(np.isfinite(probe)):
        raise InvalidDirectionError("direction must be finite on [0, 1]")
    return TangentDirection(g, F)


def _strictly_increasing_cdf(F):
    """The base cdf must have a continuous quantile (no interior flats)."""
    sb = support_bounds(F)
    for seg in F.segments:
        if seg.kind == CONST and 0.0 < seg.y0 < 1.0:
            raise DomainError("cdf has a flat piece inside its support; "
                              "the quantile is discontinuous")
    return sb


def perturbed_inverse(F, h, t):
    """Generalized inverse of F + t h as a quantile representation.

    ``h`` is a tangent direction (or any callable on the line).  The
    perturbed cdf is validated for monotonicity on a dense quantile-spaced
    grid; a violating step raises instead of being repaired.  Evaluation is
    monotone bisection through the base quantile, so the base cdf must be
    continuous and strictly increasing on its support.
    """
    t = float(t)
    if t < 0.0:
        raise DomainError("step must be a nonnegative real")
    if F.orientation != "cdf":
        raise DomainError("perturbed_inverse expects a cdf")
    sb = _strictly_increasing_cdf(F)
    Q = gen_inverse(F)
    if t == 0.0:
        return Q

    def Gt(x):
        return np.asarray(F(x), dtype=float) + t * np.asarray(h(x), dtype=float)

    uu = np.linspace(_ENDPOINT_CLEARANCE, 1.0 - _ENDPOINT_CLEARANCE,
                     _ADMISSIBILITY_GRID)
    xx = Q(uu)
    vals = Gt(xx)
    if np.any(np.diff(vals) < -1e-12) or np.any(vals < -1e-9) or np.any(vals > 1.0 + 1e-9):
        raise StepTooLargeError(
            f"F + t*h is not a cdf at t={t:g}; shrink the step")

    def qt(u, _Q=Q, _Gt=Gt):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        a = np.full_like(u, 1e-15)
        b = np.full_like(u, 1.0 - 1e-15)
        for _ in range(90):
            m = 0.5 * (a + b)
            ge = _Gt(_Q(m)) >= u
            b = np.where(ge, m, b)
            a = np.where(ge, a, m)
        return _Q(0.5 * (a + b))

    return make_quantile([closed_segment(0.0, 1.0, sb.alpha, sb.beta, qt)])


def _adaptive_simpson(f, a, b, tol=1e-9, max_rounds=24, init=64):
    """Batched adaptive Simpson with proportional error budgeting."""
    edges = np.linspace(a, b, init + 1)
    lo, hi = edges[:-1], edges[1:]
    flo = np.asarray(f(lo), dtype=float)
    fhi = np.asarray(f(hi), dtype=float)
    mid = 0.5 * (lo + hi)
    fmid = np.asarray(f(mid), dtype=float)
    total = 0.0
    span = b - a
    for _ in range(max_rounds):
        if lo.size == 0:
            break
        S = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
        ml = 0.5 * (lo + mid)
        mr = 0.5 * (mid + hi)
        fml = np.asarray(f(ml), dtype=float)
        fmr = np.asarray(f(mr), dtype=float)
        S_left = (mid - lo) / 6.0 * (flo + 4.0 * fml + fmid)
        S_right = (hi - mid) / 6.0 * (fmid + 4.0 * fmr + fhi)
        err = np.abs(S_left + S_right - S)
        done = err <= 15.0 * tol * (hi - lo) / span
        refined = S_left + S_right
        total += float(np.sum(refined[done] + (refined[done] - S[done]) / 15.0))
        keep = ~done
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        flo = np.concatenate([flo[keep], fmid[keep]])
        fhi = np.concatenate([fmid[keep], fhi[keep]])
        mid = np.concatenate([ml[keep], mr[keep]])
        fmid = np.concatenate([fml[keep], fmr[keep]])
    if lo.size:
        total += float(np.sum((hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)))
    return total


def fd_derivative_error(dist, g, t, tol=1e-9):
    """L1 distance between the step-t difference quotient and -g q.

    Integrates |(Q_t(u) - Q(u)) / t + g(u) q(u)| over (delta, 1 - delta)
    with delta = 1e-6; the excluded neighborhoods are covered by a boundary
    allowance of delta times the integrand values at the cut, which is
    driven to zero by the endpoint decay of g.
    """
    if dist.quantile_density is None:
        raise PreconditionError(f"{dist.name} has no quantile density")
    direction = direction_from_g(g, dist.cdf)
    Qt = perturbed_inverse(dist.cdf, direction, t)
    Q = dist.quantile
    q = dist.quantile_density

    def integrand(u):
        u = np.asarray(u, dtype=float)
        return np.abs((Qt(u) - Q(u)) / t + np.asarray(g(u), dtype=float) * q(u))

    delta = 1e-6
    core = _adaptive_simpson(integrand, delta, 1.0 - delta, tol=tol)
    allowance = delta * float(integrand(np.array([delta]))[0]
                              + integrand(np.array([1.0 - delta]))[0])
    return core + allowance


def derivative_along(dist, g):
    """Evaluator of the derivative in direction g o F: u -> -g(u) q(u)."""
    if dist.quantile_density is None:
        raise PreconditionError(f"{dist.name} has no quantile density")
    q = dist.quantile_density

    def d(u):
        u = np.asarray(u, dtype=float)
        return -np.asarray(g(u), dtype=float) * np.asarray(q(u), dtype=float)

    return d


def gq_norm(dist, g):
    """||g q||_1, the L1 norm of the derivative in direction g o F."""
    mu = measure_of(dist.quantile)
    return float(ls_integrate(lambda u: np.abs(np.asarray(g(u), dtype=float)), mu))


# -- exact piecewise fixtures -------------------------------------------------


def _linear_only(F, what):
    for seg in F.segments:
        if seg.kind not in (CONST, LINEAR):
            raise DomainError(f"{what} requires piecewise-linear fixtures")


def _v_breakpoints(F, G):
    """Images under F of every piece boundary of F and G, inside (0, 1)."""
    xs = set()
    for pm in (F, G):
        for seg in pm.segments:
            for x in (seg.lo, seg.hi):
                if math.isfinite(x):
                    xs.add(x)
    vs = {0.0, 1.0}
    for x in xs:
        v = float(F(x))
        if 0.0 < v < 1.0:
            vs.add(v)
    return sorted(vs)


def perturb_identity_residual(F, G, u_grid):
    """Max residual of the exact perturbation identity over the u grid.

    Both cdfs must be piecewise linear, F with a continuous quantile and G
    satisfying the support conditions G(alpha-) = 0, G(beta+) = 1.
    """
    _linear_only(F, "perturb_identity_residual")
    _linear_only(G, "perturb_identity_residual")
    sb = _strictly_increasing_cdf(F)
    if sb.alpha > -INF and abs(G.left_limit(sb.alpha)) > 1e-12:
        raise DomainError("G has mass below the support of F")
    if sb.beta < INF and abs(G.right_limit(sb.beta) - 1.0) > 1e-12:
        raise DomainError("G has mass above the support of F")
    Q = gen_inverse(F)
    Ginv = gen_inverse(G)

    base = _v_breakpoints(F, G)

    def h_of_Q(v):
        x = Q(np.asarray(v, dtype=float))
        return np.asarray(G(x), dtype=float) - np.asarray(F(x), dtype=float)

    worst = 0.0
    for u in np.atleast_1d(np.asarray(u_grid, dtype=float)):
        u = float(u)
        if not 0.0 < u < 1.0:
            raise DomainError("identity grid points must lie inside (0, 1)")
        cuts = set(base)
        cuts.add(u)
        # roots of v + h(Q(v)) = u on each linear piece
        pts = sorted(cuts)
        for v1, v2 in zip(pts, pts[1:]):
            vm = 0.5 * (v1 + v2)
            psi_m = vm + float(h_of_Q(vm))
            eps = (v2 - v1) * 1e-6
            slope = (float(h_of_Q(vm + eps)) - float(h_of_Q(vm - eps))) / (2 * eps) + 1.0
            if abs(slope) > 1e-15:
                root = vm + (u - psi_m) / slope
                if v1 < root < v2:
                    cuts.add(root)
        pts = sorted(cuts)
        integral = 0.0
        for v1, v2 in zip(pts, pts[1:]):
            vm = 0.5 * (v1 + v2)
            sign = (1.0 if vm >= u else 0.0) - (1.0 if vm + float(h_of_Q(vm)) >= u else 0.0)
            if sign != 0.0:
                integral += sign * float(Q(v2) - Q(v1))
        lhs = float(Ginv(u)) - float(Q(u))
        worst = max(worst, abs(lhs - integral))
    return worst


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function: vals[i] on [xs[i], xs[i+1}), 0 outside."""

    xs: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vals = np.asarray(self.vals, dtype=float)
        if xs.ndim != 1 or vals.ndim != 1 or xs.size != vals.size + 1:
            raise DomainError("need len(xs) == len(vals) + 1 breakpoints")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vals", vals)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.xs, x, side="right") - 1
        inside = (idx >= 0) & (idx < self.vals.size)
        return np.where(inside, self.vals[np.clip(idx, 0, self.vals.size - 1)], 0.0)

    def l1_norm(self):
        return float(np.sum(np.abs(self.vals) * np.diff(self.xs)))


def _merged_steps(h1, h2):
    xs = np.unique(np.concatenate([h1.xs, h2.xs]))
    mids = 0.5 * (xs[:-1] + xs[1:])
    return xs, np.asarray(h1(mids), dtype=float) - np.asarray(h2(mids), dtype=float)


def lipschitz_check(F, h1, h2):
    """(lhs, rhs) of the Lipschitz bound for step directions h1, h2.

    lhs is the reduced form int |h1(Q(v)) - h2(Q(v))| dQ(v), evaluated
    exactly; rhs is ||h1 - h2||_1 over the line.  The reduced form is what
    the double indicator integral collapses to and always satisfies
    lhs <= rhs.
    """
    _strictly_increasing_cdf(F)
    Q = gen_inverse(F)
    xs, diff = _merged_steps(h1, h2)
    rhs = float(np.sum(np.abs(diff) * np.diff(xs)))
    # v-intervals between the images of the merged breakpoints
    vcuts = np.concatenate([[0.0], np.clip(np.asarray(F(xs), dtype=float), 0.0, 1.0), [1.0]])
    vcuts = np.unique(vcuts)
    lhs = 0.0
    for v1, v2 in zip(vcuts[:-1], vcuts[1:]):
        if v2 - v1 <= 0.0:
            continue
        vm = 0.5 * (v1 + v2)
        xm = float(Q(np.array([vm]))[0])
        d = abs(float(h1(np.array([xm]))[0]) - float(h2(np.array([xm]))[0]))
        if d > 0.0:
            lhs += d * float(Q(np.array([v2]))[0] - Q(np.array([v1]))[0])
    return lhs, rhs


def step_composition_norm(dist, h):
    """Exact ||(h o Q) q||_1 for a step direction h and a locally AC Q."""
    zero = StepFunction(np.array([0.0, 1.0]), np.array([0.0]))
    lhs, _ = lipschitz_check(dist.cdf, h, zero)
    return lhs
