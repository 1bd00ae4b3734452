"""Lebesgue-Stieltjes measures of monotone functions and integration.

``measure_of`` decomposes a quantile representation into atoms (its jumps),
an absolutely continuous part (declared densities), and singular-continuous
pieces (the middle-thirds construction).  Whether a piece is absolutely
continuous or singular is read off the representation, never inferred from
point values: absolute continuity is not decidable from evaluations.

Integration near the endpoints of (0, 1) works on dyadic shells
(1 - 2^-k, 1 - 2^-k-1], k = 1..40, after the substitution u = sin^2(t/2)
that removes square-root endpoint factors.  An integral is classified
divergent when the shell values stop decaying geometrically (ratio >= 0.95
over the last shells); otherwise the remaining tail is added by geometric
extrapolation.  Power-law integrands, which is what monotone densities
produce at the endpoints, are classified exactly by this rule as long as
their exponent stays clear of the 0.95 cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, RepresentationError, UnsupportedCombinationError
from .geninv import CLOSED, CONST, LINEAR, PiecewiseMonotone

_N_SHELLS = 40
_RATIO_CUTOFF = 0.95
_RATIO_WINDOW = 10
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)

MIDDLE_THIRDS = "middle-thirds"


@dataclass(frozen=True)
class Atom:
    u: float
    mass: float


@dataclass(frozen=True)
class AcPiece:
    lo: float
    hi: float
    density: Callable


@dataclass(frozen=True)
class SingularPiece:
    lo: float
    hi: float
    mass: float
    descriptor: str = MIDDLE_THIRDS


@dataclass(frozen=True)
class LsMeasure:
    """Measure on (0, 1) generated by a nondecreasing function."""

    atoms: tuple
    ac_pieces: tuple
    singular_pieces: tuple
    source: Optional[PiecewiseMonotone] = None

    @property
    def singular_continuous(self):
        return bool(self.singular_pieces)


def measure_of(Q):
    """Decompose the measure generated by a quantile representation."""
    if Q.orientation != "quantile":
        raise DomainError("measure_of expects a quantile representation")
    atoms = [Atom(u, hi - lo) for (u, lo, hi) in Q.jumps()]
    ac = []
    singular = []
    for seg in Q.segments:
        if seg.y1 <= seg.y0:
            continue
        if seg.kind == CONST:
            continue
        if seg.kind == LINEAR:
            slope = (seg.y1 - seg.y0) / (seg.hi - seg.lo)
            ac.append(AcPiece(seg.lo, seg.hi, _const_density(slope)))
        elif seg.singular:
            singular.append(SingularPiece(seg.lo, seg.hi, seg.y1 - seg.y0))
        elif seg.deriv is not None:
            ac.append(AcPiece(seg.lo, seg.hi, seg.deriv))
        else:
            raise RepresentationError(
                "increasing closed-form piece carries neither a density nor a singular flag")
    return LsMeasure(tuple(atoms), tuple(ac), tuple(singular), source=Q)


def _const_density(slope):
    def density(u):
        return np.full_like(np.asarray(u, dtype=float), slope)
    return density


# -- absolutely continuous part ---------------------------------------------


def _shell_quad(f, c, d):
    """Gauss-Legendre integral of f over (c, d) after u = sin^2(t/2)."""
    t0 = 2.0 * math.asin(math.sqrt(c))
    t1 = 2.0 * math.asin(math.sqrt(d))
    t = 0.5 * (t1 - t0) * _GL_NODES + 0.5 * (t0 + t1)
    u = np.sin(0.5 * t) ** 2
    w = 0.5 * np.sin(t)
    vals = np.asarray(f(u), dtype=float) * w
    return float(np.sum(vals * _GL_WEIGHTS) * 0.5 * (t1 - t0))


def _scan_endpoint(f, c, d, left):
    """Shell decomposition toward one endpoint; returns (value, evidence).

    ``left`` scans toward 0 over (c, min(d, 1/2)); otherwise toward 1 over
    (max(c, 1/2), d).  The caller guarantees the scanned endpoint is reached
    (c == 0 or d == 1).
    """
    shells = []
    full = []
    total = 0.0
    for k in range(1, _N_SHELLS + 1):
        if left:
            lo_k, hi_k = 2.0 ** -(k + 1), 2.0 ** -k
            lo_c, hi_c = max(c, lo_k), min(d, hi_k)
        else:
            lo_k, hi_k = 1.0 - 2.0 ** -k, 1.0 - 2.0 ** -(k + 1)
            lo_c, hi_c = max(c, lo_k), min(d, hi_k)
        if lo_c >= hi_c:
            continue
        s = _shell_quad(f, lo_c, hi_c)
        total += s
        shells.append(s)
        if lo_c == lo_k and hi_c == hi_k:
            full.append(s)
    ratios = []
    mags = [abs(s) for s in full if abs(s) > 1e-300]
    for prev, cur in zip(mags, mags[1:]):
        ratios.append(cur / prev)
    ratios = ratios[-_RATIO_WINDOW:]
    divergent = len(ratios) >= 3 and max(ratios) >= _RATIO_CUTOFF
    tail = 0.0
    if not divergent and ratios and full:
        r = float(np.median(ratios))
        if 0.0 < r < 1.0:
            tail = full[-1] * r / (1.0 - r)
    evidence = {"shells": shells, "ratios": ratios, "divergent": divergent, "tail": tail}
    return total + tail, evidence


def _ac_integral(f, c, d):
    """Integral of f over (c, d) in [0, 1] with endpoint shell handling."""
    evidence = {"left": None, "right": None}
    value = 0.0
    core_lo, core_hi = c, d
    if c == 0.0:
        v, ev = _scan_endpoint(f, c, min(d, 0.5), left=True)
        evidence["left"] = ev
        if ev["divergent"]:
            return math.inf, evidence
        value += v
        core_lo = min(d, 0.5)
    if d == 1.0:
        v, ev = _scan_endpoint(f, max(c, 0.5), d, left=False)
        evidence["right"] = ev
        if ev["divergent"]:
            return math.inf, evidence
        value += v
        core_hi = max(c, 0.5)
    if core_lo < core_hi:
        v, _err = quad(lambda u: float(f(np.asarray(u))), core_lo, core_hi,
                       epsabs=1e-11, epsrel=1e-11, limit=200)
        value += v
    return value, evidence


# -- singular-continuous part ------------------------------------------------


def _middle_thirds_integral(h, a, b, lo, hi, mass, depth=30, tol=1e-9):
    """Integral of h over [a, b) against the self-similar mass on [lo, hi].

    Splits cells by the recursion m([l, r]) = m(left third)/2 + m(right
    third)/2, stopping where the sampled oscillation of h on a cell is below
    ``tol`` (total error <= tol * mass).  Boundary cells still straddling
    a or b at the depth cap contribute at most 2^-depth * mass each.
    """
    clo = np.array([lo], dtype=float)
    chi = np.array([hi], dtype=float)
    cmass = np.array([mass], dtype=float)
    total = 0.0
    for level in range(depth):
        if clo.size == 0:
            break
        keep = (chi > a) & (clo < b)
        clo, chi, cmass = clo[keep], chi[keep], cmass[keep]
        if clo.size == 0:
            break
        inside = (clo >= a) & (chi <= b)
        hl = np.asarray(h(clo), dtype=float)
        hr = np.asarray(h(chi), dtype=float)
        hm = np.asarray(h(0.5 * (clo + chi)), dtype=float)
        osc = np.maximum(np.maximum(hl, hr), hm) - np.minimum(np.minimum(hl, hr), hm)
        done = inside & (osc <= tol)
        total += float(np.sum(cmass[done] * hm[done]))
        split = ~done
        clo, chi, cmass = clo[split], chi[split], cmass[split]
        w = (chi - clo) / 3.0
        new_lo = np.concatenate([clo, chi - w])
        new_hi = np.concatenate([clo + w, chi])
        clo, chi = new_lo, new_hi
        cmass = np.concatenate([0.5 * cmass, 0.5 * cmass])
    if clo.size:
        mid = 0.5 * (clo + chi)
        sel = (mid >= a) & (mid < b)
        total += float(np.sum(cmass[sel] * np.asarray(h(mid[sel]), dtype=float)))
    return total


# -- integration -------------------------------------------------------------


def _integrate_with_evidence(h, mu, window):
    a, b = float(window[0]), float(window[1])
    if not (0.0 <= a < b <= 1.0):
        raise DomainError(f"window [{a}, {b}) must be an ordered subinterval of [0, 1]")
    value = 0.0
    evidence = {"left": None, "right": None}
    if mu.atoms:
        us = np.array([at.u for at in mu.atoms])
        masses = np.array([at.mass for at in mu.atoms])
        sel = (us >= a) & (us < b)
        if np.any(sel):
            value += float(np.sum(np.asarray(h(us[sel]), dtype=float) * masses[sel]))
    for piece in mu.ac_pieces:
        c, d = max(a, piece.lo), min(b, piece.hi)
        if c >= d:
            continue
        def f(u, _p=piece):
            return np.asarray(h(u), dtype=float) * np.asarray(_p.density(u), dtype=float)
        v, ev = _ac_integral(f, c, d)
        for side in ("left", "right"):
            if ev[side] is not None:
                evidence[side] = ev[side]
        if math.isinf(v):
            return math.inf, evidence
        value += v
    for piece in mu.singular_pieces:
        if piece.descriptor != MIDDLE_THIRDS:
            raise UnsupportedCombinationError(
                f"no evaluation path for singular descriptor {piece.descriptor!r}")
        c, d = max(a, piece.lo), min(b, piece.hi)
        if c >= d:
            continue
        value += _middle_thirds_integral(h, c, d, piece.lo, piece.hi, piece.mass)
    return value, evidence


def ls_integrate(h, mu, window=(0.0, 1.0)):
    """Integral of h over [a, b) against mu; returns +inf on divergence.

    ``h`` must accept ndarrays.  Atoms at the left window edge are included,
    atoms at the right edge excluded, so ``ls_integrate(1, mu, (a, b))``
    equals Q(b) - Q(a) for the generating left-continuous Q.
    """
    value, _evidence = _integrate_with_evidence(h, mu, window)
    return value


def _sqrt_weight(u):
    u = np.asarray(u, dtype=float)
    return np.sqrt(np.clip(u * (1.0 - u), 0.0, None))


def qmoment(Q):
    """Square-root-weighted total variation of Q; +inf when it diverges."""
    value, _ = _integrate_with_evidence(_sqrt_weight, measure_of(Q), (0.0, 1.0))
    return value


@dataclass(frozen=True)
class PropertyQReport:
    """Regularity/moment verdict for a quantile function.

    ``locally_ac`` is true when the generated measure has neither atoms nor
    a singular-continuous part on (0, 1); ``moment`` is the square-root
    weighted integral (or +inf); the full property holds when both are
    satisfied.
    """

    locally_ac: bool
    moment: float
    diagnostics: dict

    @property
    def holds(self):
        return self.locally_ac and math.isfinite(self.moment)


def property_q_check(Q):
    mu = measure_of(Q)
    reasons = []
    for at in mu.atoms:
        reasons.append(f"atom at u={at.u:.17g} (mass {at.mass:.17g})")
    if mu.singular_continuous:
        reasons.append("singular-continuous component")
    moment, evidence = _integrate_with_evidence(_sqrt_weight, mu, (0.0, 1.0))
    if math.isinf(moment):
        reasons.append("moment integral divergent")
    diagnostics = {"reasons": reasons, "endpoints": evidence}
    return PropertyQReport(locally_ac=not mu.atoms and not mu.singular_continuous,
                           moment=moment, diagnostics=diagnostics)
