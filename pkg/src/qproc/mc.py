"""Replication engine, Efron bootstrap, and two-sample comparisons.

Every replication r of an experiment draws its randomness from the keyed
substream ``mix(seed, key, r)``, so a summary is a pure function of its
configuration: reruns and different worker counts produce bit-identical
results (results are merged by replication index, never by completion
order).

The weak-convergence checks compare Monte Carlo samples of functionals of
sqrt(n)(Qn - Q) with samples of the same functionals of the limit process
through the exact two-sample Kolmogorov-Smirnov distance.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bridge as _bridge
from .empirics import EmpiricalData, empirical_quantile, zeta_statistic
from .errors import ConfigError, DomainError, PreconditionError
from .functionals import empirical_value, parse_functional, requires_finite_mean
from .lsint import measure_of
from .rng import Stream, mix
from .zoo import make_distribution, parse_spec, sample

_REP_KEY = 0x5EED
_DATA_KEY = 0xDA7A
_BOOT_KEY = 0xB007
_LIMIT_KEY = 0x117117

NOTE_DIVERGENT = ("DIVERGENT-RISK: the square-root-weighted moment integral of Q "
                  "diverges, so this statistic is not stochastically bounded in n")
NOTE_NO_L1_LIMIT = ("NO-L1-LIMIT: the quantile function has an atom or singular part, "
                    "so the scaled quantile difference has no L1 limit law")


@dataclass(frozen=True)
class BootstrapConfig:
    boot_reps: int
    datasets: int = 5


@dataclass(frozen=True)
class ExperimentConfig:
    dist: str
    n: int
    reps: int
    seed: int
    functionals: tuple = ("zeta",)
    bootstrap: Optional[BootstrapConfig] = None
    workers: int = 1
    compare_limit: bool = True
    limit_reps: Optional[int] = None
    limit_grid: int = 4096

    def __post_init__(self):
        if self.n < 1 or self.reps < 1:
            raise ConfigError("need n >= 1 and reps >= 1")
        for text in self.functionals:
            parse_functional(text)


@dataclass(frozen=True)
class FunctionalSummary:
    functional: str
    values: Optional[np.ndarray]
    mean: float
    var: float
    se: float
    q05: float
    q50: float
    q95: float
    ks_vs_limit: Optional[float] = None
    note: str = ""


@dataclass(frozen=True)
class McSummary:
    config: ExperimentConfig
    per_functional: tuple


@dataclass(frozen=True)
class BootstrapWeights:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.int64)
        if np.any(w < 0):
            raise ConfigError("bootstrap weights must be nonnegative")
        if int(w.sum()) != w.size:
            raise ConfigError("bootstrap weights must sum to the sample size")
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.weights.size


def efron_weights(n, seed):
    """One multinomial(n; 1/n, ..., 1/n) draw, deterministic in seed."""
    n = int(n)
    if n < 1:
        raise DomainError("need n >= 1")
    idx = Stream(seed).integers(n, n)
    return BootstrapWeights(np.bincount(idx, minlength=n))


def bootstrap_quantile(data, weights):
    """Generalized inverse of the weighted empirical cdf."""
    if weights.n != data.n:
        raise ConfigError(
            f"weights length {weights.n} does not match sample size {data.n}")
    star = np.repeat(data.sorted_sample, weights.weights)
    return empirical_quantile(EmpiricalData(star))


def _boot_l1_value(x, weights):
    """Exact sqrt(n) ||Qn* - Qn||_1: both are steps on the same k/n grid."""
    star = np.repeat(x, weights.weights)
    return math.sqrt(x.size) * float(np.mean(np.abs(star - x)))


def ks_two_sample(a, b):
    """Exact sup distance between two empirical cdfs over the merged support."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DomainError("both samples must be nonempty")
    merged = np.concatenate([a, b])
    ca = np.searchsorted(a, merged, side="right") / a.size
    cb = np.searchsorted(b, merged, side="right") / b.size
    return float(np.max(np.abs(ca - cb)))


# -- replication engine -------------------------------------------------------

_DIST_CACHE = {}


def _cached_dist(spec_text):
    if spec_text not in _DIST_CACHE:
        _DIST_CACHE[spec_text] = make_distribution(parse_spec(spec_text))
    return _DIST_CACHE[spec_text]


def _rep_block(spec_text, n, functional_texts, seed, indices):
    dist = _cached_dist(spec_text)
    fns = [parse_functional(t) for t in functional_texts]
    out = np.empty((len(indices), len(fns)))
    for i, r in enumerate(indices):
        data = EmpiricalData(sample(dist, n, mix(seed, _REP_KEY, r)))
        for j, f in enumerate(fns):
            out[i, j] = empirical_value(f, data, dist)
    return out


def _run_blocks(spec_text, n, functional_texts, seed, reps, workers):
    indices = np.arange(reps)
    if workers <= 1:
        return _rep_block(spec_text, n, functional_texts, seed, indices)
    chunks = np.array_split(indices, workers * 4)
    chunks = [c for c in chunks if c.size]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_rep_block, spec_text, n, functional_texts, seed, c)
                   for c in chunks]
        blocks = [f.result() for f in futures]   # submission order, not completion
    return np.vstack(blocks)


def _summarize(functional, values, ks=None, note=""):
    q05, q50, q95 = np.quantile(values, [0.05, 0.50, 0.95])
    var = float(np.var(values, ddof=1)) if values.size > 1 else 0.0
    return FunctionalSummary(functional, values, float(np.mean(values)), var,
                             math.sqrt(var / values.size), float(q05), float(q50),
                             float(q95), ks, note)


def _limit_available(f, dist):
    if f.kind in ("zeta", "l1q"):
        return dist.meta.holds
    if f.kind == "interval":
        return True
    return math.isfinite(dist.meta.moment)


def _regularity_note(f, dist):
    if not requires_finite_mean(f) or dist.meta.holds:
        return ""
    if not math.isfinite(dist.meta.moment):
        return NOTE_DIVERGENT
    return NOTE_NO_L1_LIMIT


def run_replications(config):
    """Monte Carlo samples of the requested functionals plus summaries.

    Divergent functionals (infinite-mean distributions) are reported as
    marker rows and the run continues with the rest.
    """
    dist = _cached_dist(config.dist)
    fns = [parse_functional(t) for t in config.functionals]
    active = [f for f in fns
              if dist.finite_mean or not (requires_finite_mean(f) or f.kind == "absint")]
    values = None
    if active:
        values = _run_blocks(config.dist, config.n, tuple(f.text for f in active),
                             config.seed, config.reps, config.workers)
    summaries = []
    col = 0
    limit_reps = config.limit_reps or config.reps
    for fidx, f in enumerate(fns):
        if f not in active:
            summaries.append(FunctionalSummary(
                f.text, None, math.inf, math.inf, math.inf, math.inf, math.inf,
                math.inf, None, "DIVERGENT: infinite-mean distribution"))
            continue
        vals = values[:, col]
        col += 1
        ks = None
        if config.compare_limit and _limit_available(f, dist):
            lim = _bridge.limit_functional_samples(
                dist, f, limit_reps, config.limit_grid,
                mix(config.seed, _LIMIT_KEY, fidx))
            ks = ks_two_sample(vals, lim.values)
        summaries.append(_summarize(f.text, vals, ks, _regularity_note(f, dist)))
    return McSummary(config, tuple(summaries))


# -- bootstrap ----------------------------------------------------------------


@dataclass(frozen=True)
class BootstrapResult:
    config: ExperimentConfig
    per_dataset: tuple          # FunctionalSummary per independent data set
    pooled: FunctionalSummary
    limit_values: Optional[np.ndarray]


def _boot_block(spec_text, n, seed, d, indices):
    dist = _cached_dist(spec_text)
    x = sample(dist, n, mix(seed, _DATA_KEY, d))
    out = np.empty(len(indices))
    for i, b in enumerate(indices):
        w = efron_weights(n, mix(seed, _BOOT_KEY, d, b))
        out[i] = _boot_l1_value(x, w)
    return out


def run_bootstrap(config):
    """Conditional bootstrap law of sqrt(n) ||Qn* - Qn||_1 per data set.

    For each independent data set the boot_reps conditional draws are
    summarized and, where the limit law exists, compared with the
    limit sample by the exact KS distance; a pooled summary follows.
    """
    if config.bootstrap is None:
        raise ConfigError("config.bootstrap must be set")
    if config.bootstrap.boot_reps < 1:
        raise ConfigError("need boot_reps >= 1")
    dist = _cached_dist(config.dist)
    B = config.bootstrap.boot_reps
    D = config.bootstrap.datasets
    limit_values = None
    if dist.meta.holds:
        lim = _bridge.limit_functional_samples(
            dist, "zeta", config.limit_reps or B, config.limit_grid,
            mix(config.seed, _LIMIT_KEY))
        limit_values = lim.values
    per_dataset = []
    all_vals = []
    indices = np.arange(B)
    for d in range(D):
        if config.workers <= 1:
            vals = _boot_block(config.dist, config.n, config.seed, d, indices)
        else:
            chunks = [c for c in np.array_split(indices, config.workers * 2) if c.size]
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                futures = [pool.submit(_boot_block, config.dist, config.n,
                                       config.seed, d, c) for c in chunks]
                vals = np.concatenate([f.result() for f in futures])
        ks = ks_two_sample(vals, limit_values) if limit_values is not None else None
        per_dataset.append(_summarize(f"dataset{d}", vals, ks))
        all_vals.append(vals)
    pooled_vals = np.concatenate(all_vals)
    pooled_ks = (ks_two_sample(pooled_vals, limit_values)
                 if limit_values is not None else None)
    pooled = _summarize("pooled", pooled_vals, pooled_ks)
    return BootstrapResult(config, tuple(per_dataset), pooled, limit_values)


# -- second moment ------------------------------------------------------------


@dataclass(frozen=True)
class SecondMomentReport:
    n_grid: tuple
    emp_second_moments: tuple    # (value, se) per n
    limit_second_moment: float
    limit_se: float
    rel_gap: float
    combined_se: float


def bridge_l1_sample(dist, reps, grid_size, seed):
    """Draws of the integral of |B| against the quantile's measure.

    Unlike the limit-law sampler this needs only a finite moment integral,
    which is the condition under which the second moments converge.
    """
    if not math.isfinite(dist.meta.moment):
        raise PreconditionError(f"{dist.name} has a divergent moment integral")
    mu = measure_of(dist.quantile)
    grid = _bridge.default_grid(mu, size=grid_size)
    vals = np.empty(int(reps))
    for r in range(int(reps)):
        path = _bridge.sample_bridge(grid, mix(seed, 0xB51D6E, r))
        vals[r] = _bridge.bridge_dq_integral(path, mu)
    return vals


def second_moment_check(dist, n_grid, reps, seed=1729, grid_size=4096):
    """Empirical E zeta_n^2 along an n grid against the limit second moment."""
    if not math.isfinite(dist.meta.moment):
        raise PreconditionError(f"{dist.name} has a divergent moment integral")
    emp = []
    for i, n in enumerate(n_grid):
        z = np.empty(int(reps))
        for r in range(int(reps)):
            data = EmpiricalData(sample(dist, int(n), mix(seed, _REP_KEY, i, r)))
            z[r] = zeta_statistic(data, dist)
        z2 = z * z
        emp.append((float(np.mean(z2)), float(np.std(z2, ddof=1) / math.sqrt(reps))))
    lim = bridge_l1_sample(dist, reps, grid_size, mix(seed, _LIMIT_KEY))
    lim2 = lim * lim
    lim_m = float(np.mean(lim2))
    lim_se = float(np.std(lim2, ddof=1) / math.sqrt(reps))
    last = emp[-1][0]
    if lim_m <= 1e-300 and last <= 1e-300:
        rel_gap = 0.0
    else:
        rel_gap = abs(last - lim_m) / max(lim_m, 1e-300)
    combined = math.hypot(emp[-1][1], lim_se) / max(lim_m, 1e-300)
    return SecondMomentReport(tuple(int(n) for n in n_grid), tuple(emp),
                              lim_m, lim_se, rel_gap, combined)
