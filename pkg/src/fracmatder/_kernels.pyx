# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: the L1 history sum and the wait-first Monte Carlo walker.

Must stay numerically interchangeable with ``_pykernels``; the random
streams are bit-identical, floating point results agree to libm rounding.
"""

import numpy as np

from libc.math cimport sin, pow, log, M_PI
from libc.stdint cimport uint64_t, int64_t

BACKEND_NAME = "compiled"

cdef double _U52 = 1.0 / 4503599627370496.0  # 2**-52


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline void _seed(uint64_t* s, uint64_t seed, uint64_t stream) noexcept nogil:
    cdef uint64_t x = _mix64(_mix64(seed) ^ stream)
    cdef int i
    for i in range(4):
        x += <uint64_t>0x9E3779B97F4A7C15ULL
        s[i] = _mix64(x)


cdef inline uint64_t _next(uint64_t* s) noexcept nogil:
    cdef uint64_t result = _rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


cdef inline double _uniform(uint64_t* s) noexcept nogil:
    return (<double>(_next(s) >> 12) + 0.5) * _U52


cdef inline double _kanter(double a, double inv_a, double ratio, double u1, double u2) noexcept nogil:
    cdef double v = M_PI * u1
    cdef double w = -log(u2)
    return sin(a * v) / pow(sin(v), inv_a) * pow(sin((1.0 - a) * v) / w, ratio)


def seed_state(uint64_t seed, uint64_t stream):
    state = np.empty(4, dtype=np.uint64)
    cdef uint64_t[::1] st = state
    _seed(&st[0], seed, stream)
    return state


def fill_uniforms(uint64_t[::1] state, double[::1] out):
    cdef Py_ssize_t i
    with nogil:
        for i in range(out.shape[0]):
            out[i] = _uniform(&state[0])


def stable_draws(double a, uint64_t[::1] state, double[::1] out):
    cdef double inv_a = 1.0 / a
    cdef double ratio = (1.0 - a) / a
    cdef double u1, u2
    cdef Py_ssize_t i
    with nogil:
        for i in range(out.shape[0]):
            u1 = _uniform(&state[0])
            u2 = _uniform(&state[0])
            out[i] = _kanter(a, inv_a, ratio, u1, u2)


def history_sum(const double[::1] w, const double[:, ::1] buf, Py_ssize_t n,
                Py_ssize_t col0, double[::1] out):
    cdef Py_ssize_t j, k
    cdef Py_ssize_t m = out.shape[0]
    cdef double wj
    with nogil:
        for k in range(m):
            out[k] = 0.0
        for j in range(n):
            wj = w[j]
            for k in range(m):
                out[k] += wj * buf[j, col0 + k]


def wait_first_positions(double a, double scale, double t, uint64_t seed,
                         uint64_t stream0, int64_t[::1] steps, double[::1] pos,
                         int64_t budget):
    """Simulate ``pos.shape[0]`` walkers on streams ``stream0, stream0 + 1, ...``.

    ``pos[r]`` receives the subordinator value at the last lattice point not
    exceeding ``t``; ``steps[r]`` the first index ``k`` with ``T(hk) > t``, or
    ``-1`` when the budget ran out. Returns the number of budget failures.
    """
    cdef double inv_a = 1.0 / a
    cdef double ratio = (1.0 - a) / a
    cdef uint64_t s[4]
    cdef Py_ssize_t r
    cdef int64_t k
    cdef double T, Tn, u1, u2
    cdef int64_t failures = 0
    with nogil:
        for r in range(pos.shape[0]):
            _seed(s, seed, stream0 + <uint64_t>r)
            T = 0.0
            k = 0
            while True:
                if k >= budget:
                    failures += 1
                    steps[r] = -1
                    pos[r] = T
                    break
                k += 1
                u1 = _uniform(s)
                u2 = _uniform(s)
                Tn = T + scale * _kanter(a, inv_a, ratio, u1, u2)
                if Tn > t:
                    steps[r] = k
                    pos[r] = T
                    break
                T = Tn
    return failures
