"""Grid and field data model, L1 weights and the discrete fractional material derivative.

The discrete operator at cell ``i`` and level ``n`` is

.. math::

    \\delta^\\alpha_\\pm u^n_i = \\frac{h^{-\\alpha}}{\\Gamma(2-\\alpha)}
        \\Big[u^n_{i\\mp 1} - \\sum_{j=0}^{n-1} (b_{n-j} - b_{n-j+1})
        u^j_{i\\mp(n-j+1)}\\Big],
    \\qquad b_k = k^{1-\\alpha} - (k-1)^{1-\\alpha}.

Every stencil entry ``u^j_{i∓(n-j+1)}`` sits on the lattice characteristic
``i ∓ n = const``, so the history is stored skewed (one column per
characteristic) and a time step reduces to a weighted sum of rows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from fracmatder.errors import ConfigError, DomainOfDependenceError

__all__ = [
    "AlphaParam",
    "Direction",
    "FieldHistory",
    "L1Coefficients",
    "MeshSpec",
    "as_alpha",
    "cell_index",
    "discrete_matder",
    "l1_coefficients",
    "special_beta",
    "special_gamma",
]


# {{{ parameters


@dataclass(frozen=True)
class AlphaParam:
    """Fractional order, strictly inside ``(0, 1)``."""

    alpha: float

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not (0.0 < a < 1.0) or not math.isfinite(a):
            raise ConfigError(f"alpha must lie in the open interval (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    def __float__(self) -> float:
        return self.alpha


def as_alpha(alpha: float | AlphaParam) -> AlphaParam:
    return alpha if isinstance(alpha, AlphaParam) else AlphaParam(alpha)


class Direction(enum.Enum):
    """Orientation of the operator.

    ``PLUS`` follows the characteristics ``x - t = C`` (transport to the right),
    ``MINUS`` follows ``x + t = C``.
    """

    PLUS = 1
    MINUS = -1

    @property
    def sign(self) -> int:
        return self.value

    @classmethod
    def parse(cls, value: str | Direction) -> Direction:
        if isinstance(value, Direction):
            return value
        key = value.strip().lower()
        if key in ("plus", "+", "right"):
            return cls.PLUS
        if key in ("minus", "-", "left"):
            return cls.MINUS
        raise ConfigError(f"unknown direction {value!r}; expected 'plus' or 'minus'")


# }}}


# {{{ mesh


def cell_index(x: float | np.ndarray, h: float) -> np.ndarray | int:
    """Index of the half-open cell ``((i - 1/2) h, (i + 1/2) h]`` containing ``x``."""
    i = np.ceil(np.asarray(x, dtype=float) / h - 0.5).astype(np.int64)
    return int(i) if i.ndim == 0 else i


@dataclass(frozen=True)
class MeshSpec:
    """Uniform space-time lattice ``x_i = i h``, ``t_n = n h``.

    Space and time share the step ``h``; the spatial window holds the cells
    ``i_min..i_max`` (inclusive) and the horizon is ``T = n_steps * h``.
    """

    h: float
    i_min: int
    i_max: int
    n_steps: int

    def __post_init__(self) -> None:
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ConfigError(f"mesh step must be positive, got h={self.h!r}")
        if self.n_steps < 1:
            raise ConfigError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.i_max < self.i_min:
            raise ConfigError(f"empty window: i_min={self.i_min} > i_max={self.i_max}")

    @classmethod
    def from_horizon(cls, h: float, T: float, i_min: int, i_max: int) -> MeshSpec:
        n = round(T / h)
        if n < 1 or abs(n * h - T) > 1e-9 * max(1.0, T):
            raise ConfigError(f"horizon T={T} is not a positive multiple of h={h}")
        return cls(h=float(h), i_min=int(i_min), i_max=int(i_max), n_steps=int(n))

    @property
    def T(self) -> float:
        return self.n_steps * self.h

    @property
    def n_cells(self) -> int:
        return self.i_max - self.i_min + 1

    @property
    def cells(self) -> np.ndarray:
        return np.arange(self.i_min, self.i_max + 1, dtype=np.int64)

    @property
    def x(self) -> np.ndarray:
        return self.cells * self.h

    def t(self, n: int) -> float:
        return n * self.h

    def contains(self, i: int) -> bool:
        return self.i_min <= i <= self.i_max


# }}}


# {{{ special functions


def special_gamma(z: float) -> float:
    """Gamma function for strictly positive real arguments."""
    if not z > 0:
        raise ConfigError(f"gamma is only supported for positive arguments, got {z!r}")
    return math.gamma(z)


def special_beta(a: float, b: float) -> float:
    """Beta function ``B(a, b)`` for strictly positive arguments."""
    if not (a > 0 and b > 0):
        raise ConfigError(f"beta requires positive arguments, got a={a!r}, b={b!r}")
    if a + b < 170.0:
        return math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


# }}}


# {{{ L1 coefficients


class L1Coefficients:
    """The L1 weights ``b_1..b_K``; index with ``coeffs[k]`` for ``1 <= k <= K``."""

    def __init__(self, alpha: AlphaParam, values: np.ndarray) -> None:
        self.alpha = alpha
        # values[0] is a zero pad so that values[k] == b_k
        self._b = values
        self._b.flags.writeable = False
        self._d = np.zeros_like(values)
        self._d[1:-1] = values[1:-1] - values[2:]
        self._d.flags.writeable = False
        # reversed copy so that weights(n) is a contiguous slice
        self._rev = self._d[::-1].copy()
        self._rev.flags.writeable = False

    @property
    def K(self) -> int:
        return self._b.size - 1

    @property
    def b(self) -> np.ndarray:
        """Array view ``[b_1, ..., b_K]``."""
        return self._b[1:]

    def __getitem__(self, k: int) -> float:
        if not 1 <= k <= self.K:
            raise IndexError(f"coefficient index {k} outside 1..{self.K}")
        return float(self._b[k])

    def __len__(self) -> int:
        return self.K

    def weights(self, n: int) -> np.ndarray:
        """History weights ``b_{n-j} - b_{n-j+1}`` for ``j = 0..n-1``."""
        if not 1 <= n <= self.K - 1:
            raise IndexError(f"weights for level {n} need b up to {n + 1}, have {self.K}")
        return self._rev[self.K - n : self.K]


def l1_coefficients(alpha: float | AlphaParam, K: int) -> L1Coefficients:
    """Compute ``b_k = k^{1-α} - (k-1)^{1-α}`` for ``k = 1..K``.

    Uses ``b_k = -k^{1-α} expm1((1-α) log1p(-1/k))`` to avoid the cancellation
    of the naive difference for large ``k``.
    """
    a = as_alpha(alpha)
    if K < 1:
        raise ConfigError(f"K must be >= 1, got {K}")
    beta = 1.0 - a.alpha
    k = np.arange(2, K + 1, dtype=np.float64)
    b = np.empty(K + 1)
    b[0] = 0.0
    b[1] = 1.0
    b[2:] = -(k**beta) * np.expm1(beta * np.log1p(-1.0 / k))
    return L1Coefficients(a, b)


# }}}


# {{{ field history


class FieldHistory:
    """Cell averages ``u^n_i`` for all levels ``0..n`` on a fixed window.

    Storage is skewed along the characteristics of ``skew`` so that the
    values ``u^j_{i ∓ (n - j)}`` needed by one step form a contiguous column
    block. Frames are exposed as read-only views. Values outside the window
    read as zero. Single writer: only :meth:`append` mutates.
    """

    def __init__(
        self,
        mesh: MeshSpec,
        initial: np.ndarray,
        skew: Direction = Direction.PLUS,
        capacity: int | None = None,
    ) -> None:
        self.mesh = mesh
        self.skew = skew
        self.capacity = mesh.n_steps + 1 if capacity is None else int(capacity)
        if self.capacity < 1:
            raise ConfigError("history capacity must be at least one frame")
        m = mesh.n_cells
        self._shift = self.capacity - 1
        self._buf = np.zeros((self.capacity, m + self._shift))
        self._count = 0
        self.append(initial)

    @classmethod
    def from_frames(
        cls,
        mesh: MeshSpec,
        frames: Sequence[np.ndarray] | np.ndarray,
        skew: Direction = Direction.PLUS,
    ) -> FieldHistory:
        frames = list(frames)
        hist = cls(mesh, frames[0], skew=skew, capacity=max(len(frames), mesh.n_steps + 1))
        for f in frames[1:]:
            hist.append(f)
        return hist

    def _col0(self, n: int) -> int:
        return self._shift - n if self.skew is Direction.PLUS else n

    @property
    def skewed_buffer(self) -> np.ndarray:
        """Raw storage; row ``j`` holds level ``j`` starting at column :meth:`column_offset`."""
        return self._buf

    def column_offset(self, n: int) -> int:
        return self._col0(n)

    @property
    def n(self) -> int:
        """Index of the latest stored level."""
        return self._count - 1

    def __len__(self) -> int:
        return self._count

    def append(self, frame: np.ndarray) -> None:
        frame = np.asarray(frame, dtype=np.float64)
        m = self.mesh.n_cells
        if frame.shape != (m,):
            raise ConfigError(f"frame has shape {frame.shape}, expected ({m},)")
        if self._count >= self.capacity:
            raise ConfigError(f"history is full ({self.capacity} frames)")
        if not np.all(np.isfinite(frame)):
            raise FloatingPointError(f"non-finite values in frame {self._count}")
        c = self._col0(self._count)
        self._buf[self._count, c : c + m] = frame
        self._count += 1

    def frame(self, n: int) -> np.ndarray:
        if not 0 <= n < self._count:
            raise IndexError(f"level {n} not stored (have 0..{self.n})")
        c = self._col0(n)
        view = self._buf[n, c : c + self.mesh.n_cells]
        view = view.view()
        view.flags.writeable = False
        return view

    @property
    def frames(self) -> np.ndarray:
        """Copy of all stored levels as an ``(n + 1, n_cells)`` array."""
        return np.stack([self.frame(n) for n in range(self._count)])

    def value(self, n: int, i: int) -> float:
        if not self.mesh.contains(i):
            raise DomainOfDependenceError(
                f"cell {i} outside window [{self.mesh.i_min}, {self.mesh.i_max}]", index=i
            )
        return float(self.frame(n)[i - self.mesh.i_min])

    def characteristic_block(self, n: int) -> np.ndarray:
        """Rows ``0..n-1`` of the skewed buffer aligned with level ``n``'s cells.

        Entry ``[j, k]`` is ``u^j`` on the characteristic through cell
        ``i_min + k`` at level ``n`` (zero where it lies outside the window).
        """
        if n > self._count:
            raise IndexError(f"level {n} needs levels 0..{n - 1}, have 0..{self.n}")
        if n >= self.capacity:
            raise IndexError(f"level {n} exceeds capacity {self.capacity}")
        c = self._col0(n)
        return self._buf[:n, c : c + self.mesh.n_cells]


# }}}


# {{{ discrete operator


def discrete_matder(
    history: FieldHistory,
    i: int,
    n: int,
    direction: Direction,
    alpha: float | AlphaParam,
    mesh: MeshSpec | None = None,
    coeffs: L1Coefficients | None = None,
) -> float:
    """Evaluate the discrete fractional material derivative at cell ``i``, level ``n``."""
    a = as_alpha(alpha)
    mesh = history.mesh if mesh is None else mesh
    if n < 1:
        raise ConfigError(f"the discrete operator needs n >= 1, got {n}")
    if n > history.n:
        raise IndexError(f"level {n} not stored (have 0..{history.n})")
    s = direction.sign
    stencil = [i - s * (n - j + 1) for j in range(n)] + [i - s]
    for idx in stencil:
        if not mesh.contains(idx):
            raise DomainOfDependenceError(
                f"stencil of cell {i} at level {n} reaches cell {idx} outside "
                f"[{mesh.i_min}, {mesh.i_max}]",
                index=idx,
            )
    if coeffs is None or coeffs.K < n + 1:
        coeffs = l1_coefficients(a, n + 1)
    w = coeffs.weights(n)
    past = np.array([history.value(j, stencil[j]) for j in range(n)])
    bracket = history.value(n, i - s) - float(np.dot(w, past))
    return mesh.h ** (-a.alpha) / special_gamma(2.0 - a.alpha) * bracket


# }}}
