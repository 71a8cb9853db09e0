"""Explicit finite-volume upwind / L1 marching.

For the ``+`` direction one level reads

.. math::

    u^n_{i-1} = \\sum_{j=0}^{n-1} (b_{n-j} - b_{n-j+1}) u^j_{i-(n-j+1)}
        + h^\\alpha \\Gamma(2-\\alpha) f^{m}_i,

with ``m = n`` for the standard scheme and ``m = n + 1`` for the step-ahead
variant; the ``-`` direction is the mirror image. Values outside the spatial
window are zero (zero inflow), so the window must contain the support of the
solution on the downwind side; :func:`check_domain` verifies this before
marching.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import ModuleType
from typing import Callable

import numpy as np

from fracmatder import _backend
from fracmatder.analytic import SourceSpec, source_cell_averages
from fracmatder.core import (
    AlphaParam,
    Direction,
    FieldHistory,
    L1Coefficients,
    MeshSpec,
    as_alpha,
    cell_index,
    l1_coefficients,
)
from fracmatder.errors import ConfigError, DomainOfDependenceError

__all__ = [
    "InitialCondition",
    "SchemeVariant",
    "SourceTable",
    "check_domain",
    "fit_mesh",
    "march",
    "step",
    "valid_cells",
]


class SchemeVariant(enum.Enum):
    """``STANDARD`` takes the source at ``t_n``, ``STEP_AHEAD`` at ``t_{n+1}``."""

    STANDARD = "standard"
    STEP_AHEAD = "step-ahead"

    @property
    def lag(self) -> int:
        return 0 if self is SchemeVariant.STANDARD else 1

    @classmethod
    def parse(cls, value: str | SchemeVariant) -> SchemeVariant:
        if isinstance(value, SchemeVariant):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ConfigError(f"unknown scheme {value!r}; expected 'standard' or 'step-ahead'") from None


# {{{ initial conditions


class InitialKind(enum.Enum):
    ZERO = "zero"
    DIRAC = "dirac"
    SAMPLED = "sampled"


_GL3_NODES = np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)]) * 0.5
_GL3_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


@dataclass(frozen=True)
class InitialCondition:
    """Initial cell averages ``u^0``.

    ``dirac(at)`` puts ``1/h`` into the cell containing ``at`` so the
    discrete mass is exactly one; ``sampled(func)`` averages ``func`` over
    each cell with the 3-point Gauss rule.
    """

    kind: InitialKind
    at: float = 0.0
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False, repr=False)

    @classmethod
    def zero(cls) -> InitialCondition:
        return cls(InitialKind.ZERO)

    @classmethod
    def dirac(cls, at: float = 0.0) -> InitialCondition:
        if not math.isfinite(at):
            raise ConfigError(f"Dirac location must be finite, got {at!r}")
        return cls(InitialKind.DIRAC, at=float(at))

    @classmethod
    def sampled(cls, func: Callable[[np.ndarray], np.ndarray]) -> InitialCondition:
        return cls(InitialKind.SAMPLED, func=func)

    def reflect(self) -> InitialCondition:
        if self.kind is InitialKind.SAMPLED:
            f = self.func
            return InitialCondition.sampled(lambda x: f(-x))
        return InitialCondition(self.kind, at=-self.at)

    def cell_averages(self, mesh: MeshSpec) -> np.ndarray:
        out = np.zeros(mesh.n_cells)
        if self.kind is InitialKind.DIRAC:
            i = cell_index(self.at, mesh.h)
            if not mesh.contains(i):
                raise DomainOfDependenceError(
                    f"initial Dirac mass at x={self.at} lies in cell {i}, outside "
                    f"[{mesh.i_min}, {mesh.i_max}]",
                    index=i,
                )
            out[i - mesh.i_min] = 1.0 / mesh.h
        elif self.kind is InitialKind.SAMPLED:
            x = mesh.x[:, None] + _GL3_NODES * mesh.h
            out[:] = np.asarray(self.func(x), dtype=np.float64) @ _GL3_WEIGHTS
        return out

    def support_cells(self, mesh: MeshSpec) -> tuple[int, int] | None:
        if self.kind is InitialKind.ZERO:
            return None
        if self.kind is InitialKind.DIRAC:
            i = cell_index(self.at, mesh.h)
            return (i, i)
        nz = np.flatnonzero(self.cell_averages(mesh))
        if nz.size == 0:
            return None
        return (mesh.i_min + int(nz[0]), mesh.i_min + int(nz[-1]))

    def to_dict(self) -> dict:
        if self.kind is InitialKind.SAMPLED:
            raise ConfigError("a sampled initial condition cannot be serialized")
        out: dict = {"kind": self.kind.value}
        if self.kind is InitialKind.DIRAC:
            out["at"] = self.at
        return out

    @classmethod
    def from_dict(cls, data: dict) -> InitialCondition:
        kind = data.get("kind")
        if kind == "zero":
            return cls.zero()
        if kind == "dirac":
            return cls.dirac(float(data.get("at", 0.0)))
        raise ConfigError(f"unknown initial condition {data!r}")


# }}}


# {{{ source table


class SourceTable:
    """Cell averages ``f^n_i`` for levels ``0..n_steps + 1`` and cells ``i_min - 1..i_max + 1``.

    Computed once and shared by both scheme variants. Level 0 of the
    singular kinds is never used by either scheme and is stored as zero.
    """

    def __init__(self, source: SourceSpec, mesh: MeshSpec, alpha: float | AlphaParam) -> None:
        self.source = source
        self.mesh = mesh
        self.alpha = as_alpha(alpha)
        cells = np.arange(mesh.i_min - 1, mesh.i_max + 2)
        self._rows = np.zeros((mesh.n_steps + 2, cells.size))
        first = 1 if source.is_density else 0
        for n in range(first, mesh.n_steps + 2):
            self._rows[n] = source_cell_averages(source, cells, n, mesh, self.alpha)
        if not np.all(np.isfinite(self._rows)):
            raise FloatingPointError("non-finite source cell averages")
        self._rows.flags.writeable = False

    def row(self, n: int, offset: int = 0) -> np.ndarray:
        """``f^n_i`` for ``i = i_min + offset .. i_max + offset`` (``|offset| <= 1``)."""
        if not 0 <= n < self._rows.shape[0]:
            raise IndexError(f"source level {n} outside 0..{self._rows.shape[0] - 1}")
        if abs(offset) > 1:
            raise IndexError("source rows are padded by one cell on each side")
        start = 1 + offset
        return self._rows[n, start : start + self.mesh.n_cells]

    def frame(self, n: int) -> np.ndarray:
        return self.row(n, 0)


# }}}


# {{{ domain of dependence


def _source_reach(
    source: SourceSpec, direction: Direction, mesh: MeshSpec, variant: SchemeVariant
):
    # target cells of f^{n+lag} and how far they travel by the final level
    s = direction.sign
    for n in range(1, mesh.n_steps + 1):
        cells = source.support_cells(n + variant.lag, mesh.h)
        if cells is None:
            continue
        lo, hi = cells
        travel = mesh.n_steps - n
        yield (
            None if lo is None else lo - s,
            None if hi is None else hi - s,
            travel,
        )


def check_domain(
    ic: InitialCondition,
    source: SourceSpec,
    direction: Direction,
    mesh: MeshSpec,
    variant: SchemeVariant = SchemeVariant.STANDARD,
) -> None:
    """Raise :class:`DomainOfDependenceError` if bounded data can leave the window.

    Every bounded support edge must land inside the window, and the
    downwind edge must stay inside after moving one cell per step. Unbounded
    sides (power and sampled data, the right tail of jump-first) are the
    caller's responsibility; the window is then a truncation with zero
    inflow.
    """
    s = direction.sign
    N = mesh.n_steps

    def fail(idx: int, what: str) -> None:
        raise DomainOfDependenceError(
            f"{what} reaches cell {idx}, outside the window [{mesh.i_min}, {mesh.i_max}]",
            index=idx,
        )

    def check(lo, hi, travel, what):
        for edge in (lo, hi):
            if edge is not None and not mesh.contains(edge):
                fail(edge, what)
        downwind = hi if s > 0 else lo
        if downwind is not None and not mesh.contains(downwind + s * travel):
            fail(downwind + s * travel, what + " after transport")

    # a sampled initial condition is truncated to the window like a sampled source
    if ic.kind is InitialKind.DIRAC:
        sup = ic.support_cells(mesh)
        check(sup[0], sup[1], N, "initial condition")
    for lo, hi, travel in _source_reach(source, direction, mesh, variant):
        check(lo, hi, travel, f"{source.kind.value} source")


def fit_mesh(
    h: float,
    T: float,
    ic: InitialCondition,
    source: SourceSpec,
    direction: Direction,
    variant: SchemeVariant = SchemeVariant.STANDARD,
    extent: tuple[float, float] | None = None,
) -> MeshSpec:
    """Smallest window holding the bounded data and its transport.

    Unbounded sides of the data need ``extent = (x_lo, x_hi)``, which is
    also used to widen the window.
    """
    probe = MeshSpec.from_horizon(h, T, 0, 0)
    N = probe.n_steps
    s = direction.sign
    lo_all: list[int] = []
    hi_all: list[int] = []
    unbounded = False

    def add(lo, hi, travel):
        nonlocal unbounded
        if lo is None or hi is None:
            unbounded = True
        if lo is not None:
            lo_all.append(lo + min(0, s * travel))
        if hi is not None:
            hi_all.append(hi + max(0, s * travel))

    if ic.kind is InitialKind.DIRAC:
        i = cell_index(ic.at, h)
        add(i, i, N)
    elif ic.kind is InitialKind.SAMPLED and extent is None:
        raise ConfigError("a sampled initial condition needs an explicit extent")
    for lo, hi, travel in _source_reach(source, direction, probe, variant):
        add(lo, hi, travel)
    if extent is not None:
        lo_all.append(cell_index(extent[0], h))
        hi_all.append(cell_index(extent[1], h))
    elif unbounded:
        raise ConfigError(f"the {source.kind.value} source is unbounded; pass extent=(x_lo, x_hi)")
    if not lo_all:
        lo_all, hi_all = [0], [0]
    return MeshSpec(h=float(h), i_min=min(lo_all), i_max=max(hi_all), n_steps=N)


def valid_cells(mesh: MeshSpec, direction: Direction, n: int) -> np.ndarray:
    """Mask of cells at level ``n`` whose characteristic starts inside the window.

    Only these cells are free of the zero-inflow truncation when the data
    extend past the upwind edge.
    """
    c = mesh.cells
    if direction is Direction.PLUS:
        return c - n >= mesh.i_min
    return c + n <= mesh.i_max


# }}}


# {{{ marching


def step(
    history: FieldHistory,
    table: SourceTable,
    direction: Direction,
    variant: SchemeVariant,
    coeffs: L1Coefficients,
    kernels: ModuleType | None = None,
) -> np.ndarray:
    """Compute level ``history.n + 1`` without storing it."""
    if history.skew is not direction:
        raise ConfigError("the history must be skewed along the marching direction")
    kernels = _backend.kernels if kernels is None else kernels
    mesh = history.mesh
    n = history.n + 1
    if n > mesh.n_steps:
        raise IndexError(f"level {n} exceeds n_steps={mesh.n_steps}")
    a = coeffs.alpha.alpha
    out = np.empty(mesh.n_cells)
    kernels.history_sum(
        coeffs.weights(n), history.skewed_buffer, n, history.column_offset(n), out
    )
    # target m takes f at m + 1 (plus) or m - 1 (minus)
    out += mesh.h**a * math.gamma(2.0 - a) * table.row(n + variant.lag, direction.sign)
    return out


def march(
    ic: InitialCondition,
    source: SourceSpec,
    direction: Direction,
    alpha: float | AlphaParam,
    mesh: MeshSpec,
    variant: SchemeVariant = SchemeVariant.STANDARD,
    *,
    table: SourceTable | None = None,
    kernels: ModuleType | None = None,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> FieldHistory:
    """Run the scheme to ``mesh.n_steps`` and return the full history.

    ``callback(n, frame)`` is invoked after each stored level (including 0).
    """
    a = as_alpha(alpha)
    check_domain(ic, source, direction, mesh, variant)
    if table is None:
        table = SourceTable(source, mesh, a)
    elif table.source != source or table.mesh != mesh or table.alpha != a:
        raise ConfigError("source table was built for a different problem")
    coeffs = l1_coefficients(a, mesh.n_steps + 2)
    history = FieldHistory(mesh, ic.cell_averages(mesh), skew=direction)
    if callback is not None:
        callback(0, history.frame(0))
    for n in range(1, mesh.n_steps + 1):
        history.append(step(history, table, direction, variant, coeffs, kernels))
        if callback is not None:
            callback(n, history.frame(n))
    return history


# }}}
