"""Pure numpy kernels; same contract as the compiled ``_kernels`` module.

Uniforms are a stateless function of ``(key, index, slot)``:

    h = mix64(mix64(key + index * GOLDEN) + slot * SLOT_MULT)
    u = ((h >> 11) + 0.5) * 2**-53          # in (0, 1), never 0 or 1

Gamma variate ``index`` consumes slot 0 for the shape < 1 boost and slots
``1 + 3k, 2 + 3k, 3 + 3k`` for Marsaglia-Tsang attempt ``k`` (two for the
Box-Muller normal, one for the acceptance test).
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
SLOT_MULT = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_POW_M53 = 1.1102230246251565e-16
TWO_PI = 6.283185307179586

NAME = "python"


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _uniform(key: int, index: np.ndarray, slot) -> np.ndarray:
    k = np.uint64(key)
    slot = np.asarray(slot, dtype=np.uint64)
    h = _mix64(_mix64(k + index * GOLDEN) + slot * SLOT_MULT)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_POW_M53


def _indices(start: int, count: int, ncoord: int) -> np.ndarray:
    rows = np.arange(start, start + count, dtype=np.uint64)
    return (rows[:, None] * np.uint64(ncoord) + np.arange(ncoord, dtype=np.uint64)).ravel()


def uniform_grid(key: int, start: int, count: int, ncoord: int, slot: int) -> np.ndarray:
    """``(count, ncoord)`` uniforms for rows ``start .. start+count-1`` at one slot."""
    if count == 0:
        return np.empty((0, ncoord))
    with np.errstate(over="ignore"):
        return _uniform(key, _indices(start, count, ncoord), slot).reshape(count, ncoord)


def gamma_grid(key: int, start: int, count: int, shapes, rate: float) -> np.ndarray:
    """``(count, len(shapes))`` gamma variates; column ``j`` has shape ``shapes[j]``."""
    shapes = np.ascontiguousarray(shapes, dtype=np.float64)
    ncoord = shapes.size
    if count == 0:
        return np.empty((0, ncoord))
    idx = _indices(start, count, ncoord)
    a = np.tile(shapes, count)
    boost = a < 1.0
    aa = np.where(boost, a + 1.0, a)
    d = aa - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty(idx.size)
    pending = np.arange(idx.size)
    k = 0
    with np.errstate(over="ignore"):
        while pending.size:
            ip = idx[pending]
            u1 = _uniform(key, ip, 1 + 3 * k)
            u2 = _uniform(key, ip, 2 + 3 * k)
            u = _uniform(key, ip, 3 + 3 * k)
            x = np.sqrt(-2.0 * np.log(u1)) * np.cos(TWO_PI * u2)
            dp, cp = d[pending], c[pending]
            v = 1.0 + cp * x
            positive = v > 0.0
            v = v * v * v
            x2 = x * x
            squeeze = u < 1.0 - 0.0331 * x2 * x2
            with np.errstate(invalid="ignore", divide="ignore"):
                full = np.log(u) < 0.5 * x2 + dp * (1.0 - v + np.log(v))
            accept = positive & (squeeze | full)
            out[pending[accept]] = dp[accept] * v[accept]
            pending = pending[~accept]
            k += 1
        if boost.any():
            ub = _uniform(key, idx[boost], 0)
            out[boost] = out[boost] * np.power(ub, 1.0 / a[boost])
    return (out / rate).reshape(count, ncoord)
