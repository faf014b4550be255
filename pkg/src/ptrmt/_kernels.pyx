# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled counter-based uniforms and Marsaglia-Tsang gamma variates.

Bit-for-bit the same scheme as ``ptrmt._fallback``; the loops run without
the GIL so ``sample_batch`` workers can overlap.
"""

import numpy as np

from libc.math cimport cos, log, pow, sqrt
from libc.stdint cimport uint64_t

NAME = "compiled"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t SLOT_MULT = 0xD1B54A32D192ED03ULL
cdef double TWO_POW_M53 = 1.1102230246251565e-16
cdef double TWO_PI = 6.283185307179586


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double uniform(uint64_t key, uint64_t index, uint64_t slot) noexcept nogil:
    cdef uint64_t h = mix64(mix64(key + index * GOLDEN) + slot * SLOT_MULT)
    return (<double>(h >> 11) + 0.5) * TWO_POW_M53


cdef double gamma_one(uint64_t key, uint64_t index, double shape) noexcept nogil:
    cdef double a = shape + 1.0 if shape < 1.0 else shape
    cdef double d = a - 1.0 / 3.0
    cdef double c = 1.0 / sqrt(9.0 * d)
    cdef double x, x2, v, u, g
    cdef uint64_t k = 0
    while True:
        x = sqrt(-2.0 * log(uniform(key, index, 1 + 3 * k))) * cos(TWO_PI * uniform(key, index, 2 + 3 * k))
        u = uniform(key, index, 3 + 3 * k)
        v = 1.0 + c * x
        if v > 0.0:
            v = v * v * v
            x2 = x * x
            if u < 1.0 - 0.0331 * x2 * x2:
                g = d * v
                break
            if log(u) < 0.5 * x2 + d * (1.0 - v + log(v)):
                g = d * v
                break
        k += 1
    if shape < 1.0:
        g = g * pow(uniform(key, index, 0), 1.0 / shape)
    return g


def uniform_grid(key, Py_ssize_t start, Py_ssize_t count, Py_ssize_t ncoord, slot):
    cdef double[:, ::1] out = np.empty((count, ncoord))
    cdef uint64_t k = <uint64_t>key
    cdef uint64_t s = <uint64_t>slot
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(count):
            for j in range(ncoord):
                out[i, j] = uniform(k, <uint64_t>((start + i) * ncoord + j), s)
    return np.asarray(out)


def gamma_grid(key, Py_ssize_t start, Py_ssize_t count, shapes, double rate):
    cdef double[::1] sh = np.ascontiguousarray(shapes, dtype=np.float64)
    cdef Py_ssize_t ncoord = sh.shape[0]
    cdef double[:, ::1] out = np.empty((count, ncoord))
    cdef uint64_t k = <uint64_t>key
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(count):
            for j in range(ncoord):
                out[i, j] = gamma_one(k, <uint64_t>((start + i) * ncoord + j), sh[j]) / rate
    return np.asarray(out)
