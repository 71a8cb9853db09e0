"""Monte Carlo for the wait-first Lévy-walk scaling limit.

The stable subordinator is simulated on the lattice ``hk`` by the exact
recursion ``T(hk) = T(h(k-1)) + h^{1/α} ξ_k`` with one-sided stable ``ξ_k``
(Kanter's representation). A one-sided walk jumps right by the waiting time,
so the motion ``L(hk)`` shares the draws and coincides with ``T``. The
wait-first position at time ``t`` is ``L((k* - 1) h)`` with
``k* = min{k : T(hk) > t}``.

Random numbers are xoshiro256** streams seeded through SplitMix64 from
``(seed, stream)``; trajectory ``r`` of a run uses stream ``stream + r``, so
results do not depend on how trajectories are split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from types import ModuleType

import numpy as np

from fracmatder import _backend
from fracmatder.core import AlphaParam, MeshSpec, as_alpha, cell_index
from fracmatder.errors import ConfigError, PathBudgetError

__all__ = [
    "DEFAULT_BUDGET",
    "EmpiricalPdf",
    "RandomStream",
    "RngSeed",
    "SubordinatorPath",
    "estimate_pdf",
    "sample_positive_stable",
    "simulate_coupled_paths",
    "wait_first_position",
]

DEFAULT_BUDGET = 10**8
_U64 = 1 << 64
_CHUNK = 1 << 14


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and 0 <= v < _U64):
                raise ConfigError(f"{name} must be an integer in [0, 2^64), got {v!r}")
            object.__setattr__(self, name, int(v))

    def child(self, offset: int) -> RngSeed:
        return RngSeed(self.seed, (self.stream + offset) % _U64)


def _as_seed(seed: RngSeed | int) -> RngSeed:
    return seed if isinstance(seed, RngSeed) else RngSeed(int(seed))


class RandomStream:
    """One xoshiro256** stream; not safe for concurrent use."""

    def __init__(self, seed: RngSeed | int, kernels: ModuleType | None = None) -> None:
        self.seed = _as_seed(seed)
        self._k = _backend.kernels if kernels is None else kernels
        self._state = self._k.seed_state(self.seed.seed, self.seed.stream)

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` doubles strictly inside ``(0, 1)``."""
        out = np.empty(int(n))
        self._k.fill_uniforms(self._state, out)
        return out

    def stable(self, alpha: float, n: int) -> np.ndarray:
        out = np.empty(int(n))
        self._k.stable_draws(float(alpha), self._state, out)
        return out


def sample_positive_stable(alpha: float | AlphaParam, rng: RandomStream, size: int | None = None):
    """Draws with ``E exp(-sξ) = exp(-s^α)`` (Kanter's representation).

    Each draw consumes two uniforms, ``V = π U_1`` then ``W = -log U_2``.
    """
    a = as_alpha(alpha).alpha
    xi = rng.stable(a, 1 if size is None else size)
    if not np.all(xi > 0):
        raise RuntimeError("non-positive one-sided stable draw")
    return float(xi[0]) if size is None else xi


# {{{ paths


@dataclass(frozen=True)
class SubordinatorPath:
    """``values[k] = T(hk)`` for ``k = 0..K`` and the draws ``xi[k-1]`` behind each step."""

    h: float
    alpha: float
    values: np.ndarray
    xi: np.ndarray


def simulate_coupled_paths(
    alpha: float | AlphaParam,
    h: float,
    T: float,
    rng: RandomStream,
    budget: int = DEFAULT_BUDGET,
) -> tuple[SubordinatorPath, np.ndarray]:
    """Simulate the subordinator until it exceeds ``T``, and the coupled motion.

    Returns the path and the motion values ``L(hk)``, which equal the
    subordinator for the one-sided walk.
    """
    a = as_alpha(alpha).alpha
    if not (h > 0 and T > 0):
        raise ConfigError(f"need h > 0 and T > 0, got h={h}, T={T}")
    scale = h ** (1.0 / a)
    pieces = []
    total = 0.0
    drawn = 0
    chunk = 1024
    while True:
        take = min(chunk, budget - drawn)
        if take <= 0:
            raise PathBudgetError(f"subordinator did not pass T={T}", budget)
        xi = sample_positive_stable(a, rng, take)
        steps = scale * xi
        # sequential accumulation, matching the walker kernels
        vals = np.cumsum(np.concatenate(([total], steps)))[1:]
        hit = np.flatnonzero(vals > T)
        if hit.size:
            k = int(hit[0]) + 1
            pieces.append((xi[:k], vals[:k]))
            break
        pieces.append((xi, vals))
        total = float(vals[-1])
        drawn += take
        chunk = min(2 * chunk, 1 << 20)
    xi_all = np.concatenate([p[0] for p in pieces])
    values = np.concatenate([[0.0]] + [p[1] for p in pieces])
    T_path = SubordinatorPath(h=float(h), alpha=a, values=values, xi=xi_all)
    # jumps of the motion are the same draws, all to the right
    motion = np.concatenate([[0.0], np.cumsum(scale * xi_all)])
    return T_path, motion


def wait_first_position(paths: tuple[SubordinatorPath, np.ndarray], t: float) -> float:
    """``L((k* - 1) h)`` with ``k* = min{k : T(hk) > t}``."""
    path, motion = paths
    if t < 0:
        raise ConfigError(f"t must be non-negative, got {t}")
    if not path.values[-1] > t:
        raise ConfigError(f"t={t} lies beyond the simulated horizon {path.values[-1]}")
    k_star = int(np.searchsorted(path.values, t, side="right"))
    return float(motion[k_star - 1])


# }}}


# {{{ density estimate


@dataclass(frozen=True)
class EmpiricalPdf:
    """Histogram of wait-first positions on the cells of ``mesh``.

    ``density = counts / (n_traj h)``; positions outside the window go to
    ``overflow``.
    """

    mesh: MeshSpec
    t: float
    alpha: float
    n_traj: int
    counts: np.ndarray
    overflow: int
    mean_steps: float

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.n_traj * self.mesh.h)

    @property
    def overflow_mass(self) -> float:
        return self.overflow / self.n_traj

    def total_mass(self) -> float:
        """Binned plus overflow mass, from integer counts (exactly 1)."""
        return (int(self.counts.sum()) + self.overflow) / self.n_traj


def _run_chunk(kernels, a, scale, t, seed, stream0, count, budget, mesh):
    steps = np.empty(count, dtype=np.int64)
    pos = np.empty(count)
    failures = kernels.wait_first_positions(a, scale, t, seed, stream0, steps, pos, budget)
    ok = steps >= 0
    if np.any((pos[ok] < 0) | (pos[ok] > t)):
        raise RuntimeError("wait-first position outside [0, t]")
    idx = cell_index(pos[ok], mesh.h) - mesh.i_min
    inside = (idx >= 0) & (idx < mesh.n_cells)
    counts = np.bincount(idx[inside], minlength=mesh.n_cells).astype(np.int64)
    overflow = int(np.count_nonzero(~inside))
    return counts, overflow, int(failures), int(steps[ok].sum())


def estimate_pdf(
    alpha: float | AlphaParam,
    h: float,
    t: float,
    n_traj: int,
    mesh: MeshSpec,
    seed: RngSeed | int = 0,
    *,
    workers: int = 1,
    kernels: ModuleType | None = None,
    budget: int = DEFAULT_BUDGET,
) -> EmpiricalPdf:
    """Bin ``n_traj`` wait-first positions at time ``t`` into the cells of ``mesh``.

    Trajectories are cut into fixed chunks and reduced in chunk order, so
    the result does not depend on ``workers``. Trajectories that exhaust
    ``budget`` lattice steps are collected and reported together as one
    :class:`PathBudgetError`.
    """
    a = as_alpha(alpha).alpha
    if n_traj < 1:
        raise ConfigError(f"n_traj must be >= 1, got {n_traj}")
    if not (h > 0 and t > 0):
        raise ConfigError(f"need h > 0 and t > 0, got h={h}, t={t}")
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    seed = _as_seed(seed)
    kernels = _backend.kernels if kernels is None else kernels
    scale = h ** (1.0 / a)
    starts = range(0, n_traj, _CHUNK)

    def job(start: int):
        count = min(_CHUNK, n_traj - start)
        stream0 = (seed.stream + start) % _U64
        return _run_chunk(kernels, a, scale, t, seed.seed, stream0, count, budget, mesh)

    if workers == 1:
        results = [job(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, starts))

    counts = np.zeros(mesh.n_cells, dtype=np.int64)
    overflow = failures = total_steps = 0
    for c, o, f, st in results:
        counts += c
        overflow += o
        failures += f
        total_steps += st
    if failures:
        raise PathBudgetError("wait-first trajectories did not pass t", budget, failures)
    return EmpiricalPdf(
        mesh=mesh,
        t=float(t),
        alpha=a,
        n_traj=int(n_traj),
        counts=counts,
        overflow=overflow,
        mean_steps=total_steps / n_traj,
    )


# }}}
