"""Counter-based splittable random numbers.

The generator is a splitmix-style 64-bit mixer: output ``i`` of stream ``s``
is a pure function of ``(s, i)``, so any substream can be evaluated in any
order, on any worker, with identical results.  Substreams are derived by
keyed mixing, never by jumping, which keeps replication ``r`` of experiment
``e`` addressable as ``mix(seed, e, r)``.
"""

from __future__ import annotations

import numpy as np

from .gauss import norm_quantile

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# numpy intentionally wraps unsigned arithmetic; silence the overflow chatter
# locally rather than globally.
_WRAP = {"over": "ignore"}


def _mix64(z):
    z = np.uint64(z) if np.isscalar(z) else z.astype(np.uint64, copy=True)
    with np.errstate(**_WRAP):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def mix(seed, *keys):
    """Derive a substream seed from ``seed`` and integer keys."""
    s = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(**_WRAP):
        for k in keys:
            kk = np.uint64(int(k) & 0xFFFFFFFFFFFFFFFF)
            s = _mix64(s ^ _mix64(kk + _GOLDEN))
    return int(s)


class Stream:
    """Sequential view of one splitmix stream; all output is counter-indexed."""

    def __init__(self, seed):
        self._seed = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
        self._counter = 0

    def _raw(self, m):
        idx = np.arange(self._counter + 1, self._counter + m + 1, dtype=np.uint64)
        self._counter += m
        with np.errstate(**_WRAP):
            return _mix64(self._seed + idx * _GOLDEN)

    def uniforms(self, m):
        """``m`` doubles strictly inside (0, 1)."""
        bits = self._raw(int(m)) >> np.uint64(11)
        return (bits.astype(np.float64) + 0.5) * (2.0 ** -53)

    def normals(self, m):
        return norm_quantile(self.uniforms(m))

    def integers(self, m, upper):
        """``m`` integers uniform on {0, ..., upper-1} (rejection-free scaling)."""
        u = self.uniforms(m)
        return np.minimum((u * upper).astype(np.int64), upper - 1)
