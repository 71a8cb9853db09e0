"""Pure numpy fallback for the routines in ``_kernels.pyx``.

The random number streams (SplitMix64-seeded xoshiro256**) are bit-identical
to the compiled ones; the walker loop is vectorized across trajectories.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_U52 = 1.0 / 4503599627370496.0  # 2**-52

_u = np.uint64


def _mix64_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _seed_ints(seed: int, stream: int) -> list[int]:
    x = _mix64_int(_mix64_int(seed & _MASK) ^ (stream & _MASK))
    out = []
    for _ in range(4):
        x = (x + _GOLDEN) & _MASK
        out.append(_mix64_int(x))
    return out


def _rotl_int(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def _next_int(s: list[int]) -> int:
    result = (_rotl_int((s[1] * 5) & _MASK, 7) * 9) & _MASK
    t = (s[1] << 17) & _MASK
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl_int(s[3], 45)
    return result


def _uniform_int(s: list[int]) -> float:
    return ((_next_int(s) >> 12) + 0.5) * _U52


def _kanter(a: float, u1, u2):
    v = np.pi * u1
    w = -np.log(u2)
    return np.sin(a * v) / np.power(np.sin(v), 1.0 / a) * np.power(
        np.sin((1.0 - a) * v) / w, (1.0 - a) / a
    )


def seed_state(seed: int, stream: int) -> np.ndarray:
    return np.array(_seed_ints(seed, stream), dtype=np.uint64)


def fill_uniforms(state: np.ndarray, out: np.ndarray) -> None:
    s = [int(v) for v in state]
    for i in range(out.shape[0]):
        out[i] = _uniform_int(s)
    state[:] = s


def stable_draws(a: float, state: np.ndarray, out: np.ndarray) -> None:
    u = np.empty(2 * out.shape[0])
    fill_uniforms(state, u)
    out[:] = _kanter(a, u[0::2], u[1::2])


def history_sum(w: np.ndarray, buf: np.ndarray, n: int, col0: int, out: np.ndarray) -> None:
    # row by row, in the compiled loop order: a BLAS gemv would reorder the
    # sums and break the exact mirror symmetry of the scheme
    m = out.shape[0]
    tmp = np.empty(m)
    out[:] = 0.0
    for j in range(n):
        np.multiply(buf[j, col0 : col0 + m], w[j], out=tmp)
        out += tmp


# {{{ vectorized walkers


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _u(30))) * _u(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _u(27))) * _u(0x94D049BB133111EB)
    return z ^ (z >> _u(31))


def _seed_vec(seed: int, streams: np.ndarray) -> list[np.ndarray]:
    x = _mix64_vec(np.full(streams.shape, _mix64_int(seed & _MASK), dtype=np.uint64) ^ streams)
    out = []
    for _ in range(4):
        x = x + _u(_GOLDEN)
        out.append(_mix64_vec(x))
    return out


def _rotl_vec(x: np.ndarray, k: int) -> np.ndarray:
    return (x << _u(k)) | (x >> _u(64 - k))


def _uniform_vec(s: list[np.ndarray]) -> np.ndarray:
    s0, s1, s2, s3 = s
    result = _rotl_vec(s1 * _u(5), 7) * _u(9)
    t = s1 << _u(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s[3] = _rotl_vec(s3, 45)
    return ((result >> _u(12)).astype(np.float64) + 0.5) * _U52


def wait_first_positions(
    a: float,
    scale: float,
    t: float,
    seed: int,
    stream0: int,
    steps: np.ndarray,
    pos: np.ndarray,
    budget: int,
) -> int:
    count = pos.shape[0]
    streams = np.arange(count, dtype=np.uint64) + _u(stream0 & _MASK)
    with np.errstate(over="ignore"):
        state = _seed_vec(seed, streams)
    active = np.arange(count)
    T = np.zeros(count)
    k = 0
    while active.size:
        if k >= budget:
            steps[active] = -1
            pos[active] = T
            return int(active.size)
        k += 1
        u1 = _uniform_vec(state)
        u2 = _uniform_vec(state)
        Tn = T + scale * _kanter(a, u1, u2)
        done = Tn > t
        if done.any():
            idx = active[done]
            steps[idx] = k
            pos[idx] = T[done]
            keep = ~done
            active = active[keep]
            T = Tn[keep]
            state = [s[keep] for s in state]
        else:
            T = Tn
    return 0


# }}}
