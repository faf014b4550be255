"""Exact samplers for both ensemble variants.

Randomness is counter based: a stream is a 64-bit key derived from
``(seed, stream_id, purpose)`` and every uniform is a pure function of
``(key, index, slot)``. Batches are cut into fixed chunks of
:data:`CHUNK_SIZE` rows, chunk ``c`` using ``stream_id = c``, so the output
depends on ``(spec, count, seed)`` only, never on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ptrmt import _backend, _fallback
from ptrmt.core import (
    Bounded,
    BoundedExponents,
    EnsembleSpec,
    ExponentTriple,
    InvalidParameterError,
    MatrixParams,
    Unbounded,
    spacings,
)

CHUNK_SIZE = 65536
MASK64 = (1 << 64) - 1
SIGN_SLOT = 1 << 63

_PURPOSES = {
    "gamma": 0x01,
    "unbounded": 0x02,
    "bounded": 0x03,
    "rejection": 0x04,
    "mc": 0x05,
}


def _mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream_id: int, purpose: str) -> int:
    tag = _PURPOSES[purpose]
    k = _mix64(seed + 0x9E3779B97F4A7C15)
    k = _mix64(k ^ _mix64(stream_id * 0xD1B54A32D192ED03 + 0x632BE59BD9B4E019))
    return _mix64(k + tag * 0x8CB92BA72F3D8DD7)


def _as_u64(value: int, name: str) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ValueError(f"{name} must be an integer")
    value = int(value)
    if not -(1 << 63) <= value <= MASK64:
        raise ValueError(f"{name} must fit in 64 bits")
    return value & MASK64


def kernels_for(backend: str | None):
    if backend is None:
        return _backend.kernels
    if backend == "python":
        return _fallback
    if backend == "compiled":
        from ptrmt import _kernels

        return _kernels
    raise ValueError(f"unknown backend {backend!r}")


class RngStream:
    """A reproducible stream ``(seed, stream_id)`` with a row cursor.

    Each scalar draw (one gamma variate, one matrix) consumes one row.
    """

    def __init__(self, seed: int, stream_id: int = 0, backend: str | None = None):
        self.seed = _as_u64(seed, "seed")
        self.stream_id = _as_u64(stream_id, "stream_id")
        self.position = 0
        self.kernels = kernels_for(backend)

    def key(self, purpose: str) -> int:
        return stream_key(self.seed, self.stream_id, purpose)

    def advance(self, rows: int = 1) -> int:
        start = self.position
        self.position += rows
        return start

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, position={self.position})"


def gamma_variate(shape: float, rate: float, rng: RngStream) -> float:
    """One draw with density proportional to ``x^(shape-1) exp(-rate x)``."""
    if not (math.isfinite(shape) and shape > 0):
        raise ValueError(f"shape > 0 required, got {shape}")
    if not (math.isfinite(rate) and rate > 0):
        raise ValueError(f"rate > 0 required, got {rate}")
    row = rng.advance()
    return float(rng.kernels.gamma_grid(rng.key("gamma"), row, 1, [shape], rate)[0, 0])


def _unbounded_block(kernels, key: int, start: int, count: int, alpha: float, t: ExponentTriple):
    shapes = [k + 0.5 for k in t.half_exponents]
    magnitude = np.sqrt(kernels.gamma_grid(key, start, count, shapes, alpha))
    # one sign uniform per coordinate, columns in (x1, y1, x2, y2) order
    u = kernels.uniform_grid(key, start, count, 4, SIGN_SLOT)
    return np.where(u < 0.5, -magnitude, magnitude)


def _bounded_block(kernels, key: int, start: int, count: int, b: BoundedExponents):
    shapes = [a / 2.0 for a in b.alphas] + [1.0]
    g = kernels.gamma_grid(key, start, count, shapes, 1.0)
    t = g[:, :4] / g.sum(axis=1, keepdims=True)
    x = np.sqrt(t)
    # (x1, x2, x3, x4) -> (x1, y1, x2, y2) with y1 = x3, y2 = x4
    return x[:, [0, 2, 1, 3]]


def sample_unbounded(alpha: float, t: ExponentTriple, rng: RngStream) -> MatrixParams:
    """``|coord| = sqrt(Gamma(k + 1/2, rate=alpha))`` with a fair random sign."""
    spec = Unbounded(alpha, t)
    row = rng.advance()
    out = _unbounded_block(rng.kernels, rng.key("unbounded"), row, 1, spec.alpha, spec.exponents)
    return MatrixParams.from_sequence(out[0])


def sample_bounded(b: BoundedExponents, rng: RngStream) -> MatrixParams:
    """Dirichlet(a1/2, a2/2, a3/2, a4/2, 1) with slack; coordinates are square roots."""
    row = rng.advance()
    out = _bounded_block(rng.kernels, rng.key("bounded"), row, 1, b)
    return MatrixParams.from_sequence(out[0])


def _check_rejection_admissible(b: BoundedExponents) -> None:
    if min(b.alphas) < 1.0:
        raise InvalidParameterError(
            f"rejection sampler needs all alphas >= 1, got {b.alphas}"
        )


def _rejection_rows(key: int, rows: np.ndarray, b: BoundedExponents) -> tuple[np.ndarray, int]:
    """Accepted points for each row index, plus the total number of proposals."""
    expo = np.array(b.alphas) - 1.0
    out = np.empty((rows.size, 4))
    pending = np.arange(rows.size)
    proposals = 0
    k = 0
    with np.errstate(over="ignore"):
        while pending.size:
            idx = rows[pending].astype(np.uint64)
            x = np.column_stack([_fallback._uniform(key, idx, 5 * k + c) for c in range(4)])
            u = _fallback._uniform(key, idx, 5 * k + 4)
            proposals += pending.size
            inside = np.sum(x * x, axis=1) <= 1.0
            accept = inside & (u < np.prod(x ** expo, axis=1))
            out[pending[accept]] = x[accept]
            pending = pending[~accept]
            k += 1
    return out[:, [0, 2, 1, 3]], proposals


def sample_bounded_rejection(b: BoundedExponents, rng: RngStream) -> MatrixParams:
    """Oracle sampler: uniform proposals on the unit cube, thinned to the density."""
    _check_rejection_admissible(b)
    row = rng.advance()
    out, _ = _rejection_rows(rng.key("rejection"), np.array([row]), b)
    return MatrixParams.from_sequence(out[0])


def rejection_batch(b: BoundedExponents, count: int, seed: int, stream_id: int = 0):
    """``count`` rejection draws as an array; returns ``(params, proposals)``."""
    _check_rejection_admissible(b)
    key = stream_key(_as_u64(seed, "seed"), _as_u64(stream_id, "stream_id"), "rejection")
    return _rejection_rows(key, np.arange(count, dtype=np.uint64), b)


@dataclass(frozen=True)
class SampleBatch:
    params: np.ndarray = field(repr=False)
    spec: EnsembleSpec
    seed: int
    chunk_size: int = CHUNK_SIZE

    def __len__(self) -> int:
        return self.params.shape[0]

    def __iter__(self) -> Iterator[MatrixParams]:
        for row in self.params:
            yield MatrixParams.from_sequence(row)

    @property
    def spacings(self) -> np.ndarray:
        return spacings(self.params)


def _chunks(count: int, chunk_size: int) -> list[tuple[int, int]]:
    return [(c, min(chunk_size, count - c * chunk_size)) for c in range(-(-count // chunk_size))]


def sample_batch(
    spec: EnsembleSpec,
    count: int,
    seed: int,
    workers: int = 1,
    backend: str | None = None,
) -> SampleBatch:
    if count < 0:
        raise ValueError("count >= 0 required")
    seed = _as_u64(seed, "seed")
    kernels = kernels_for(backend)
    if isinstance(spec, Unbounded):
        purpose = "unbounded"

        def run(chunk):
            c, n = chunk
            return _unbounded_block(kernels, stream_key(seed, c, purpose), 0, n, spec.alpha, spec.exponents)
    elif isinstance(spec, Bounded):
        purpose = "bounded"

        def run(chunk):
            c, n = chunk
            return _bounded_block(kernels, stream_key(seed, c, purpose), 0, n, spec.exponents)
    else:
        raise TypeError(f"not an ensemble spec: {spec!r}")

    chunks = _chunks(count, CHUNK_SIZE)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    params = np.concatenate(parts) if parts else np.empty((0, 4))
    return SampleBatch(params, spec, seed)


def uniforms(rng: RngStream, count: int, ncoord: int, slot: int = 0) -> np.ndarray:
    """``(count, ncoord)`` uniforms from the stream's ``mc`` sub-key."""
    start = rng.advance(count)
    return rng.kernels.uniform_grid(rng.key("mc"), start, count, ncoord, slot)


def normals(rng: RngStream, count: int, ncoord: int) -> np.ndarray:
    """Box-Muller standard normals, two uniform slots per value."""
    start = rng.advance(count)
    key = rng.key("mc")
    u1 = rng.kernels.uniform_grid(key, start, count, ncoord, 1)
    u2 = rng.kernels.uniform_grid(key, start, count, ncoord, 2)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_fallback.TWO_PI * u2)
