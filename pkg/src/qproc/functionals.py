"""Functional descriptors shared by the replication engine and the limit sampler.

The weak-convergence checks compare a finite panel of continuous functionals
of the scaled quantile difference against the same functionals of the limit
process: the L1 norm (``zeta`` via the cdf path, ``l1q`` via the quantile
path), signed and absolute interval integrals, and integrals against bounded
test functions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import empirics
from .errors import ConfigError

_INTERVAL_RE = re.compile(r"^(interval|absint)\(([^,]+),([^)]+)\)$")
_TESTFN_RE = re.compile(r"^testfn\((\w+)\)$")


def _g_zero(u):
    return np.zeros_like(np.asarray(u, dtype=float))


def _G_zero(u):
    return np.zeros_like(np.asarray(u, dtype=float))


def _g_sinpi(u):
    return np.sin(np.pi * np.asarray(u, dtype=float))


def _G_sinpi(u):
    return (1.0 - np.cos(np.pi * np.asarray(u, dtype=float))) / np.pi


def _g_poly(u):
    u = np.asarray(u, dtype=float)
    return u * (1.0 - u)


def _G_poly(u):
    u = np.asarray(u, dtype=float)
    return u * u / 2.0 - u ** 3 / 3.0


#: test-function registry: id -> (g, antiderivative of g)
TEST_FUNCTIONS = {
    "zero": (_g_zero, _G_zero),
    "sinpi": (_g_sinpi, _G_sinpi),
    "poly": (_g_poly, _G_poly),
}


@dataclass(frozen=True)
class Functional:
    kind: str            # zeta | l1q | interval | absint | testfn
    a: float = math.nan
    b: float = math.nan
    test_id: str = ""

    @property
    def text(self):
        if self.kind in ("interval", "absint"):
            return f"{self.kind}({self.a:g},{self.b:g})"
        if self.kind == "testfn":
            return f"testfn({self.test_id})"
        return self.kind

    @property
    def slug(self):
        return (self.text.replace("(", "_").replace(")", "")
                .replace(",", "_").replace(".", "p"))


def parse_functional(text):
    if isinstance(text, Functional):
        return text
    text = text.strip()
    if text in ("zeta", "l1q"):
        return Functional(text)
    m = _INTERVAL_RE.match(text)
    if m:
        kind, a, b = m.group(1), float(m.group(2)), float(m.group(3))
        if not 0.0 < a < b < 1.0:
            raise ConfigError(f"functional {text!r}: need 0 < a < b < 1")
        return Functional(kind, a, b)
    m = _TESTFN_RE.match(text)
    if m:
        tid = m.group(1)
        if tid not in TEST_FUNCTIONS:
            raise ConfigError(f"unknown test function {tid!r}; have {sorted(TEST_FUNCTIONS)}")
        return Functional("testfn", test_id=tid)
    raise ConfigError(f"cannot parse functional {text!r}")


def requires_finite_mean(f):
    return f.kind in ("zeta", "l1q")


_GQ_CACHE = {}


def _g_against_quantile(dist, test_id):
    """Integral of g(u) Q(u) du over (0, 1), cached per (distribution, g)."""
    key = (dist.spec_text, test_id)
    if key not in _GQ_CACHE:
        g = TEST_FUNCTIONS[test_id][0]
        val, _ = quad(lambda u: float(g(u) * dist.quantile(np.asarray(u))),
                      0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
        _GQ_CACHE[key] = val
    return _GQ_CACHE[key]


def empirical_value(f, data, dist):
    """Evaluate one functional of sqrt(n) (Qn - Q) exactly from the sample."""
    if f.kind == "zeta":
        return empirics.zeta_statistic(data, dist)
    if f.kind == "l1q":
        return empirics.l1_quantile_statistic(data, dist)
    if f.kind == "interval":
        return empirics.interval_integral(data, dist, f.a, f.b)
    if f.kind == "absint":
        return empirics.l1_quantile_statistic(data, dist, window=(f.a, f.b))
    if f.kind == "testfn":
        g, G = TEST_FUNCTIONS[f.test_id]
        breaks, levels = empirics._data_step_quantile(data)
        step_part = float(np.sum(levels * (G(breaks[1:]) - G(breaks[:-1]))))
        return math.sqrt(data.n) * (step_part - _g_against_quantile(dist, f.test_id))
    raise ConfigError(f"unknown functional kind {f.kind!r}")
