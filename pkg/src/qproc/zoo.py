"""Catalog of concrete distributions covering every regularity regime.

Each entry bundles a cdf and quantile representation (with exact
antiderivatives), the quantile density where one exists, a sampler, and a
regularity/moment report.  The catalog spans: smooth members with the full
regularity property (uniform, exponential, normal, logistic, heavy-tailed
pareto with alpha > 2), an atomic quantile (bernoulli), a singular-continuous
quantile (the middle-thirds staircase), and moment failures (pareto with
alpha <= 2).

Spec strings follow ``name(:key=value(,key=value)*)?``, e.g.
``bernoulli:p=0.3`` or ``normal:mu=0,sigma=2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit, ndtr, xlogy

from .errors import DomainError, SpecParseError
from .gauss import norm_pdf, norm_quantile
from .geninv import (INF, PiecewiseMonotone, closed_segment, const_segment,
                     linear_segment, make_cdf, make_quantile)
from .lsint import PropertyQReport, property_q_check
from .rng import Stream

# -- spec strings ------------------------------------------------------------


@dataclass(frozen=True)
class DistSpec:
    name: str
    params: dict
    text: str


_PARAM_TABLE = {
    "uniform": {"a": 0.0, "b": 1.0},
    "bernoulli": {"p": None},
    "exp": {"rate": 1.0},
    "pareto": {"alpha": None},
    "normal": {"mu": 0.0, "sigma": 1.0},
    "logistic": {"loc": 0.0, "scale": 1.0},
    "cantor": {},
}


def parse_spec(text):
    """Parse a distribution spec string; errors carry the byte offset."""
    if not text:
        raise SpecParseError("empty spec", 0)
    head, sep, rest = text.partition(":")
    name = head.strip()
    if name not in _PARAM_TABLE:
        raise SpecParseError(f"unknown distribution {name!r}", 0)
    allowed = _PARAM_TABLE[name]
    params = {k: v for k, v in allowed.items() if v is not None}
    if sep and not rest:
        raise SpecParseError("trailing ':' without parameters", len(head))
    offset = len(head) + len(sep)
    if rest:
        for token in rest.split(","):
            key, eq, val = token.partition("=")
            if not eq:
                raise SpecParseError(f"expected key=value, got {token!r}", offset)
            key = key.strip()
            if key not in allowed:
                raise SpecParseError(f"unknown parameter {key!r} for {name}", offset)
            try:
                value = float(val)
            except ValueError:
                raise SpecParseError(f"bad numeric value {val!r}", offset + len(key) + 1)
            params[key] = value
            offset += len(token) + 1
    _check_ranges(name, params, text)
    missing = [k for k, v in allowed.items() if v is None and k not in params]
    if missing:
        raise SpecParseError(f"{name} needs parameter {missing[0]!r}", len(text))
    return DistSpec(name, params, text)


def _check_ranges(name, params, text):
    def fail(msg, key):
        raise SpecParseError(msg, text.find(key) if key in text else 0)

    if name == "bernoulli" and "p" in params and not 0.0 < params["p"] < 1.0:
        fail(f"p={params['p']} outside (0, 1)", "p")
    if name == "exp" and params.get("rate", 1.0) <= 0.0:
        fail("rate must be positive", "rate")
    if name == "pareto" and "alpha" in params and params["alpha"] <= 0.0:
        fail("alpha must be positive", "alpha")
    if name == "normal" and params.get("sigma", 1.0) <= 0.0:
        fail("sigma must be positive", "sigma")
    if name == "logistic" and params.get("scale", 1.0) <= 0.0:
        fail("scale must be positive", "scale")
    if name == "uniform" and params.get("a", 0.0) >= params.get("b", 1.0):
        fail("need a < b", "a")


# -- the distribution bundle --------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """Immutable bundle of evaluators for one catalog entry."""

    name: str
    spec_text: str
    cdf: PiecewiseMonotone
    quantile: PiecewiseMonotone
    quantile_density: Optional[Callable]
    meta: PropertyQReport
    mean: float
    abs_mean: float
    sampler: Optional[Callable] = field(default=None, repr=False)

    @classmethod
    def from_parts(cls, name, cdf, quantile, quantile_density=None, sampler=None,
                   spec_text=""):
        meta = property_q_check(quantile)
        mean = float(quantile.integral(0.0, 1.0))
        u0 = float(cdf(0.0))
        if 0.0 < u0 < 1.0:
            abs_mean = float(-quantile.integral(0.0, u0) + quantile.integral(u0, 1.0))
        else:
            abs_mean = abs(mean)
        return cls(name, spec_text or name, cdf, quantile, quantile_density,
                   meta, mean, abs_mean, sampler)

    def quantile_integral(self, a, b):
        """Exact integral of the quantile function over [a, b]."""
        return self.quantile.integral(a, b)

    @property
    def finite_mean(self):
        return math.isfinite(self.abs_mean)


# -- builders -----------------------------------------------------------------


def _build_uniform(a=0.0, b=1.0):
    cdf = make_cdf([linear_segment(a, b, 0.0, 1.0)])
    quantile = make_quantile([linear_segment(0.0, 1.0, a, b)])
    width = b - a
    density = lambda u: np.full_like(np.asarray(u, dtype=float), width)
    return cdf, quantile, density, None


def _build_bernoulli(p):
    cdf = make_cdf([const_segment(0.0, 1.0, 1.0 - p)])
    quantile = make_quantile([const_segment(0.0, 1.0 - p, 0.0),
                              const_segment(1.0 - p, 1.0, 1.0)])
    return cdf, quantile, None, None


def _build_exp(rate=1.0):
    lam = rate

    def F(x):
        return -np.expm1(-lam * np.asarray(x, dtype=float))

    def Q(u):
        with np.errstate(divide="ignore"):
            return -np.log1p(-np.asarray(u, dtype=float)) / lam

    def F_prim(x):
        x = np.asarray(x, dtype=float)
        return x + np.expm1(-lam * x) / lam

    def Q_prim(u):
        u = np.asarray(u, dtype=float)
        return (xlogy(1.0 - u, 1.0 - u) + u) / lam

    def q_density(u):
        return 1.0 / (lam * (1.0 - np.asarray(u, dtype=float)))

    def f_density(x):
        return lam * np.exp(-lam * np.asarray(x, dtype=float))

    cdf = make_cdf([closed_segment(0.0, INF, 0.0, 1.0, F, inv=Q, prim=F_prim,
                                   deriv=f_density)])
    quantile = make_quantile([closed_segment(0.0, 1.0, 0.0, INF, Q, inv=F,
                                             prim=Q_prim, deriv=q_density)])
    return cdf, quantile, q_density, None


def _build_pareto(alpha):
    a = alpha

    def F(x):
        return 1.0 - np.power(np.asarray(x, dtype=float), -a)

    def Q(u):
        with np.errstate(divide="ignore"):
            return np.power(1.0 - np.asarray(u, dtype=float), -1.0 / a)

    if a != 1.0:
        def F_prim(x):
            x = np.asarray(x, dtype=float)
            return x - 1.0 + (np.power(x, 1.0 - a) - 1.0) / (a - 1.0)

        ex = (a - 1.0) / a

        def Q_prim(u):
            u = np.asarray(u, dtype=float)
            with np.errstate(divide="ignore"):
                return -np.power(1.0 - u, ex) / ex
    else:
        def F_prim(x):
            x = np.asarray(x, dtype=float)
            return x - 1.0 - np.log(x)

        def Q_prim(u):
            return -np.log1p(-np.asarray(u, dtype=float))

    def q_density(u):
        u = np.asarray(u, dtype=float)
        return np.power(1.0 - u, -1.0 / a - 1.0) / a

    def f_density(x):
        return a * np.power(np.asarray(x, dtype=float), -a - 1.0)

    cdf = make_cdf([closed_segment(1.0, INF, 0.0, 1.0, F, inv=Q, prim=F_prim,
                                   deriv=f_density)])
    quantile = make_quantile([closed_segment(0.0, 1.0, 1.0, INF, Q, inv=F,
                                             prim=Q_prim, deriv=q_density)])
    return cdf, quantile, q_density, None


def _build_normal(mu=0.0, sigma=1.0):
    def F(x):
        return ndtr((np.asarray(x, dtype=float) - mu) / sigma)

    def Q(u):
        return mu + sigma * norm_quantile(u)

    def F_prim(x):
        z = (np.asarray(x, dtype=float) - mu) / sigma
        # antiderivative of ndtr(z) in x, with limit 0 at -inf
        out = np.where(z < -40.0, 0.0,
                       sigma * (norm_pdf(np.clip(z, -40, 40))
                                + np.clip(z, -40, None) * ndtr(np.clip(z, -40, None))))
        big = z > 40.0
        if np.any(big):
            out = np.where(big, sigma * z, out)
        return out

    def Q_prim(u):
        u = np.asarray(u, dtype=float)
        return mu * u - sigma * norm_pdf(norm_quantile(u))

    def q_density(u):
        return sigma / norm_pdf(norm_quantile(u))

    def f_density(x):
        z = (np.asarray(x, dtype=float) - mu) / sigma
        return norm_pdf(z) / sigma

    cdf = make_cdf([closed_segment(-INF, INF, 0.0, 1.0, F, inv=Q, prim=F_prim,
                                   deriv=f_density)])
    quantile = make_quantile([closed_segment(0.0, 1.0, -INF, INF, Q, inv=F,
                                             prim=Q_prim, deriv=q_density)])
    return cdf, quantile, q_density, None


def _build_logistic(loc=0.0, scale=1.0):
    s = scale

    def F(x):
        return expit((np.asarray(x, dtype=float) - loc) / s)

    def Q(u):
        u = np.asarray(u, dtype=float)
        return loc + s * (np.log(u) - np.log1p(-u))

    def F_prim(x):
        z = (np.asarray(x, dtype=float) - loc) / s
        return s * np.logaddexp(0.0, z)

    def Q_prim(u):
        u = np.asarray(u, dtype=float)
        return loc * u + s * (xlogy(u, u) + xlogy(1.0 - u, 1.0 - u))

    def q_density(u):
        u = np.asarray(u, dtype=float)
        return s / (u * (1.0 - u))

    def f_density(x):
        p = expit((np.asarray(x, dtype=float) - loc) / s)
        return p * (1.0 - p) / s

    cdf = make_cdf([closed_segment(-INF, INF, 0.0, 1.0, F, inv=Q, prim=F_prim,
                                   deriv=f_density)])
    quantile = make_quantile([closed_segment(0.0, 1.0, -INF, INF, Q, inv=F,
                                             prim=Q_prim, deriv=q_density)])
    return cdf, quantile, q_density, None


# -- middle-thirds staircase ---------------------------------------------------

_TERNARY_DIGITS = 64
_INT_DEN = np.int64(1) << np.int64(60)


def _staircase_int64(num):
    """Staircase value of num / 2^60 via exact integer ternary digits."""
    n = num.astype(np.int64).copy()
    val = np.zeros(n.shape, dtype=float)
    active = np.ones(n.shape, dtype=bool)
    scale = 1.0
    for _ in range(_TERNARY_DIGITS):
        if not active.any():
            break
        scale *= 0.5
        n = n * 3
        d = n // _INT_DEN
        n = n - d * _INT_DEN
        hit_one = active & (d == 1)
        val[hit_one] += scale
        active = active & ~hit_one
        val[active] += (d[active] >> 1) * scale
    return val


def _staircase_exact(u):
    """Arbitrary-precision fallback for the far ends of (0, 1)."""
    num, den = float(u).as_integer_ratio()
    val = 0.0
    scale = 1.0
    for _ in range(_TERNARY_DIGITS):
        scale *= 0.5
        num *= 3
        d = num // den
        num -= d * den
        if d == 1:
            return val + scale
        val += (d >> 1) * scale
        if num == 0:
            break
    return val


def cantor_function(u):
    """Middle-thirds staircase on [0, 1] (64 ternary digits, exact)."""
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.zeros(arr.shape, dtype=float)
    out[arr >= 1.0] = 1.0
    mid = (arr > 0.0) & (arr < 1.0)
    bulk = mid & (arr >= 2.0 ** -8)
    if np.any(bulk):
        out[bulk] = _staircase_int64(np.rint(arr[bulk] * float(_INT_DEN)))
    rest = mid & ~bulk
    for i in np.nonzero(rest.ravel())[0]:
        out.ravel()[i] = _staircase_exact(arr.ravel()[i])
    return out.reshape(np.shape(u)) if np.ndim(u) else float(out[0])


def _staircase_cdf_int64(num):
    """Right-continuous inverse of the staircase for num / 2^60 in (0, 1)."""
    n = num.astype(np.int64).copy()
    val = np.zeros(n.shape, dtype=float)
    power = 1.0
    for _ in range(_TERNARY_DIGITS):
        power /= 3.0
        n = n * 2
        d = n // _INT_DEN
        n = n - d * _INT_DEN
        val += (2.0 * power) * d
    return val


def _staircase_cdf_exact(x):
    num, den = float(x).as_integer_ratio()
    val = 0.0
    power = 1.0
    for _ in range(_TERNARY_DIGITS):
        power /= 3.0
        num *= 2
        d = num // den
        num -= d * den
        val += 2.0 * power * d
        if num == 0:
            break
    return val


def cantor_cdf(x):
    """cdf whose generalized inverse is the staircase (binary-to-ternary map)."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(arr.shape, dtype=float)
    out[arr >= 1.0] = 1.0
    mid = (arr > 0.0) & (arr < 1.0)
    bulk = mid & (arr >= 2.0 ** -8)
    if np.any(bulk):
        out[bulk] = _staircase_cdf_int64(np.rint(arr[bulk] * float(_INT_DEN)))
    rest = mid & ~bulk
    for i in np.nonzero(rest.ravel())[0]:
        out.ravel()[i] = _staircase_cdf_exact(arr.ravel()[i])
    return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])


def _staircase_prim_scalar(x):
    """Integral of the staircase from 0 to x by self-similar splitting."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 0.5
    acc = 0.0
    coef = 1.0
    for _ in range(80):
        if x <= 0.0:
            return acc
        if x >= 1.0:
            return acc + coef * 0.5
        if x <= 1.0 / 3.0:
            coef /= 6.0
            x = 3.0 * x
        elif x <= 2.0 / 3.0:
            return acc + coef * (1.0 / 12.0 + 0.5 * (x - 1.0 / 3.0))
        else:
            acc += coef * 0.25 + coef * 0.5 * (x - 2.0 / 3.0)
            coef /= 6.0
            x = 3.0 * x - 2.0
    return acc


_staircase_prim = np.vectorize(_staircase_prim_scalar, otypes=[float])


def cantor_primitive(u):
    """Antiderivative of the staircase (certified self-similar recursion)."""
    return _staircase_prim(np.asarray(u, dtype=float))


def _cantor_sampler(stream, n):
    """Draw from the distribution whose quantile is the staircase.

    The law is purely atomic on dyadic rationals: a gap level m carries
    total mass (1/3)(2/3)^(m-1), split evenly over the 2^(m-1) gap values
    (2j - 1) / 2^m.  Levels are capped at 52, past double resolution.
    """
    u1 = stream.uniforms(n)
    u2 = stream.uniforms(n)
    m = np.ceil(np.log1p(-u1) / math.log(2.0 / 3.0))
    m = np.clip(m, 1, 52).astype(np.int64)
    count = np.power(2.0, (m - 1).astype(float))
    j = np.minimum(np.floor(u2 * count), count - 1)
    return np.ldexp(2.0 * j + 1.0, -m.astype(np.int32))


def _build_cantor():
    cdf = make_cdf([closed_segment(0.0, 1.0, 0.0, 1.0, cantor_cdf,
                                   inv=cantor_function)])
    quantile = make_quantile([closed_segment(0.0, 1.0, 0.0, 1.0, cantor_function,
                                             inv=cantor_cdf, prim=cantor_primitive,
                                             singular=True)])
    return cdf, quantile, None, _cantor_sampler


_BUILDERS = {
    "uniform": _build_uniform,
    "bernoulli": _build_bernoulli,
    "exp": _build_exp,
    "pareto": _build_pareto,
    "normal": _build_normal,
    "logistic": _build_logistic,
    "cantor": _build_cantor,
}


def make_distribution(spec):
    """Build the full bundle for a parsed spec (or spec string)."""
    if isinstance(spec, str):
        spec = parse_spec(spec)
    cdf, quantile, density, sampler = _BUILDERS[spec.name](**spec.params)
    return Distribution.from_parts(spec.name, cdf, quantile, density, sampler,
                                   spec_text=spec.text)


def sample(dist, n, seed):
    """n iid draws, sorted ascending; a pure function of (dist, n, seed)."""
    n = int(n)
    if n < 1:
        raise DomainError("sample size must be at least 1")
    stream = Stream(seed)
    if dist.sampler is not None:
        values = dist.sampler(stream, n)
    else:
        values = dist.quantile(stream.uniforms(n))
    return np.sort(np.asarray(values, dtype=float))
