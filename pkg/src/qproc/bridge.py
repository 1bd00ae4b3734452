"""Brownian-bridge sampling and limit-law functionals.

Paths are generated left to right by conditional (Markov) increments, so the
finite-dimensional law on the grid is exactly Gaussian with covariance
min(u, v) - u v and hard zero endpoints; no series truncation is involved.
Writing C_k = B_k / (1 - u_k) turns the conditional recursion into a plain
cumulative sum, which is what the implementation evaluates.

Path functionals against a monotone Q integrate the linear interpolant of
the node values exactly: on each grid cell, integration by parts gives
int l dQ = l(d) Q(d) - l(c) Q(c) - slope * int_c^d Q(u) du, with the last
term supplied by the quantile's antiderivative.  Absolute-value functionals
split each cell at the interpolant's sign change first, so the integral of
|interpolant| is exact as well.  Atoms must sit on the grid and contribute
|B(atom)| * mass directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError, PreconditionError
from .functionals import TEST_FUNCTIONS, parse_functional
from .lsint import measure_of
from .rng import Stream, mix


@dataclass(frozen=True)
class BridgePath:
    """One bridge sample: node values on a grid with B(0) = B(1) = 0."""

    grid: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class LimitFunctionalSample:
    """iid draws of one functional of the limit process."""

    functional_id: str
    values: np.ndarray


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise GridError("grid must be a 1-d array with at least two points")
    if grid[0] != 0.0 or grid[-1] != 1.0:
        raise GridError("grid must include the endpoints 0 and 1")
    if np.any(np.diff(grid) <= 0.0):
        raise GridError("grid must be strictly increasing (no duplicates)")
    return grid


def sample_bridge(grid, seed):
    """Exact finite-dimensional bridge draw on the grid, keyed by seed."""
    grid = _check_grid(grid)
    m = grid.size
    values = np.zeros(m)
    if m > 2:
        z = Stream(seed).normals(m - 2)
        u_prev = grid[:-2]
        u_next = grid[1:-1]
        sigma = np.sqrt((u_next - u_prev) * (1.0 - u_next) / (1.0 - u_prev))
        coef = sigma / (1.0 - u_next)
        values[1:-1] = (1.0 - u_next) * np.cumsum(coef * z)
    return BridgePath(grid, values)


def default_grid(mu=None, size=4096, endpoint_points=64, endpoint_eps=1e-12):
    """Uniform grid plus measure breakpoints plus geometric endpoint refinement.

    The endpoint clusters matter exactly when the quantile density blows up
    at 0 or 1; adding them unconditionally only refines the partition.
    """
    pts = [np.linspace(0.0, 1.0, size + 1)]
    if endpoint_points > 0:
        geo = np.geomspace(endpoint_eps, 1.0 / size, endpoint_points, endpoint=False)
        pts.append(geo)
        pts.append(1.0 - geo)
    if mu is not None:
        pts.append(np.array([at.u for at in mu.atoms]))
        for piece in list(mu.ac_pieces) + list(mu.singular_pieces):
            pts.append(np.array([piece.lo, piece.hi]))
    grid = np.unique(np.concatenate(pts))
    return grid[(grid >= 0.0) & (grid <= 1.0)]


def _cells(path, window):
    a, b = window
    g = path.grid
    v = path.values
    c = np.clip(g[:-1], a, b)
    d = np.clip(g[1:], a, b)
    keep = c < d
    c, d = c[keep], d[keep]
    slope = (v[1:] - v[:-1])[keep] / (g[1:] - g[:-1])[keep]
    lc = v[:-1][keep] + slope * (c - g[:-1][keep])
    ld = v[:-1][keep] + slope * (d - g[:-1][keep])
    return c, d, lc, ld, slope


def _signed_cell_integrals(Q, c, d, lc, ld, slope):
    """Exact integral of the linear interpolant against dQ on each cell.

    Midpoint form of integration by parts: with m the cell midpoint,
    int l dQ = l(m) dQ + slope * (trapezoid(Q) - int Q du), whose second
    bracket vanishes identically on constant and linear quantile pieces and
    stays tiny elsewhere, keeping steep cells numerically clean.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        q_right = np.asarray(Q.right_limit(c), dtype=float)
        q_left = np.asarray(Q.left_limit(d), dtype=float)
        p = Q.cell_integral(c, d)
        w = d - c
        lm = 0.5 * (lc + ld)
        bracket = 0.5 * w * (q_right + q_left) - p
        out = lm * (q_left - q_right) + slope * bracket
        # cells whose quantile endpoint is infinite: the interpolant is
        # pinned to zero there (bridge ties), so the boundary term drops
        edge = ~np.isfinite(q_left) | ~np.isfinite(q_right)
        if np.any(edge):
            t_hi = np.where(ld == 0.0, 0.0, ld * q_left)
            t_lo = np.where(lc == 0.0, 0.0, lc * q_right)
            out = np.where(edge, t_hi - t_lo - slope * p, out)
    return out


def _integrate_nodes(mu, path, window, absolute, negate):
    Q = mu.source
    if Q is None:
        raise GridError("measure lacks its generating quantile")
    a, b = window
    for at in mu.atoms:
        if a <= at.u < b and not np.any(path.grid == at.u):
            raise GridError(f"grid does not refine atom at u={at.u}")
    c, d, lc, ld, slope = _cells(path, window)
    sign = -1.0 if negate else 1.0
    if not absolute:
        total = float(np.sum(_signed_cell_integrals(Q, c, d, lc, ld, slope))) * sign
    else:
        crossing = lc * ld < 0.0   # implies slope != 0
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(crossing, c - lc / slope, d)
        r = np.clip(r, c, d)
        first = _signed_cell_integrals(Q, c, r, lc, np.where(crossing, 0.0, ld), slope)
        second = np.where(crossing,
                          _signed_cell_integrals(Q, r, d, np.zeros_like(r), ld, slope),
                          0.0)
        total = float(np.sum(np.abs(first) + np.abs(second)))
    atom_total = 0.0
    if mu.atoms:
        us = np.array([at.u for at in mu.atoms])
        masses = np.array([at.mass for at in mu.atoms])
        sel = (us >= a) & (us < b)
        if np.any(sel):
            idx = np.searchsorted(path.grid, us[sel])
            bvals = path.values[idx]
            if absolute:
                atom_total = float(np.sum(np.abs(bvals) * masses[sel]))
            else:
                atom_total = sign * float(np.sum(bvals * masses[sel]))
    return total + atom_total


def bridge_dq_integral(path, mu, window=(0.0, 1.0)):
    """Integral of |B| over [a, b) against mu (grid must refine mu's atoms)."""
    return _integrate_nodes(mu, path, window, absolute=True, negate=False)


def bridge_signed_dq_integral(path, mu, window=(0.0, 1.0), negate=True):
    """Signed integral of -B (or B) over [a, b) against mu."""
    return _integrate_nodes(mu, path, window, absolute=False, negate=negate)


def _testfn_path(path, g):
    return BridgePath(path.grid, np.asarray(g(path.grid), dtype=float) * path.values)


def limit_functional_samples(dist, functional, reps, grid_size, seed):
    """iid draws of one functional of the limit process of sqrt(n)(Qn - Q).

    The L1-norm functionals require the full regularity property (otherwise
    no L1 limit exists); interval functionals are also meaningful for atomic
    fixtures, where they reduce to -B at the atom times its mass.
    """
    f = parse_functional(functional)
    if f.kind in ("zeta", "l1q") and not dist.meta.holds:
        raise PreconditionError(
            f"{dist.name} lacks the regularity property; the L1 limit law does not exist")
    if f.kind in ("absint", "testfn") and not math.isfinite(dist.meta.moment):
        raise PreconditionError(f"{dist.name} has a divergent moment integral")
    mu = measure_of(dist.quantile)
    grid = default_grid(mu, size=grid_size)
    values = np.empty(int(reps))
    for r in range(int(reps)):
        path = sample_bridge(grid, mix(seed, 0xB51D6E, r))
        if f.kind in ("zeta", "l1q"):
            values[r] = bridge_dq_integral(path, mu)
        elif f.kind == "absint":
            values[r] = bridge_dq_integral(path, mu, window=(f.a, f.b))
        elif f.kind == "interval":
            values[r] = bridge_signed_dq_integral(path, mu, window=(f.a, f.b))
        else:
            g = TEST_FUNCTIONS[f.test_id][0]
            values[r] = bridge_signed_dq_integral(_testfn_path(path, g), mu)
    return LimitFunctionalSample(f.text, values)
