"""Closed-form solutions, source terms and the solvability condition.

The density problems are one-sided Lévy walks started at the origin:

* wait-first: ``f = t^{-α}/Γ(1-α) δ(x)``, density supported on ``(0, t)``;
* jump-first: ``f = α x^{-α-1}/Γ(1-α) H(x - t)``, density on ``(t, ∞)``;
* standard: ``f = t^{-α}/Γ(1-α) δ(x - t)``, solution ``δ(x - t)``.

Dirac sources are sifted analytically everywhere; point values of a Dirac
mass are never produced, only cell averages.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import betainc

from fracmatder.core import AlphaParam, Direction, MeshSpec, as_alpha, cell_index
from fracmatder.errors import AccuracyError, ConfigError

__all__ = [
    "GeneralIVP",
    "Normalization",
    "SourceKind",
    "SourceSpec",
    "general_solution",
    "jump_first_cell_averages",
    "jump_first_normalization",
    "jump_first_tail_bound",
    "pdf_jump_first",
    "pdf_standard",
    "pdf_wait_first",
    "power_source_solution",
    "solvability_integral",
    "solvability_target",
    "source_cell_average",
    "source_cell_averages",
    "source_value",
    "standard_cell_averages",
    "wait_first_cell_averages",
    "wait_first_normalization",
]

SampledSource = Callable[[np.ndarray, np.ndarray], np.ndarray]


# {{{ source description


class SourceKind(enum.Enum):
    ZERO = "zero"
    POWER = "power"
    WAIT_FIRST = "wait-first"
    JUMP_FIRST = "jump-first"
    STANDARD = "standard"
    SAMPLED = "sampled"


_SINGULAR = (SourceKind.WAIT_FIRST, SourceKind.JUMP_FIRST, SourceKind.STANDARD)
_EVEN = (SourceKind.ZERO, SourceKind.POWER, SourceKind.WAIT_FIRST)


@dataclass(frozen=True)
class SourceSpec:
    """Symbolic right-hand side ``f(x, t)``.

    Use the factory methods; ``mu`` is only meaningful for ``POWER``
    (``f = t^mu``) and ``func`` only for ``SAMPLED``, where it must accept
    numpy arrays ``(x, t)`` and broadcast. ``reflected`` stands for
    ``f(-x, t)``, the source of the left-moving walks; it is dropped for the
    kinds that are even in ``x``.
    """

    kind: SourceKind
    mu: float | None = None
    func: SampledSource | None = field(default=None, compare=False, repr=False)
    reflected: bool = False

    def __post_init__(self) -> None:
        if self.kind is SourceKind.POWER:
            if self.mu is None or not (self.mu > 0 and math.isfinite(self.mu)):
                raise ConfigError(f"power source needs mu > 0, got {self.mu!r}")
            object.__setattr__(self, "mu", float(self.mu))
        elif self.mu is not None:
            raise ConfigError(f"mu is only accepted for the power source, not {self.kind.value}")
        if (self.kind is SourceKind.SAMPLED) != (self.func is not None):
            raise ConfigError("a callable is required for, and only for, the sampled source")
        if self.kind in _EVEN:
            object.__setattr__(self, "reflected", False)

    @classmethod
    def zero(cls) -> SourceSpec:
        return cls(SourceKind.ZERO)

    @classmethod
    def power(cls, mu: float) -> SourceSpec:
        return cls(SourceKind.POWER, mu=mu)

    @classmethod
    def wait_first(cls) -> SourceSpec:
        return cls(SourceKind.WAIT_FIRST)

    @classmethod
    def jump_first(cls) -> SourceSpec:
        return cls(SourceKind.JUMP_FIRST)

    @classmethod
    def standard(cls) -> SourceSpec:
        return cls(SourceKind.STANDARD)

    @classmethod
    def sampled(cls, func: SampledSource) -> SourceSpec:
        return cls(SourceKind.SAMPLED, func=func)

    def reflect(self) -> SourceSpec:
        """The source ``f(-x, t)``."""
        return SourceSpec(self.kind, mu=self.mu, func=self.func, reflected=not self.reflected)

    @property
    def is_density(self) -> bool:
        """True for the three Lévy-walk sources, which satisfy the solvability condition."""
        return self.kind in _SINGULAR

    def support_cells(self, n: int, h: float) -> tuple[int | None, int | None] | None:
        """Cells where ``f(·, t_n)`` may be nonzero as ``(lo, hi)``.

        ``None`` in a slot means unbounded on that side, ``None`` overall
        means the source vanishes identically.
        """
        if self.reflected:
            cells = SourceSpec(self.kind, self.mu, self.func).support_cells(n, h)
            if cells is None:
                return None
            lo, hi = cells
            return (None if hi is None else -hi, None if lo is None else -lo)
        k = self.kind
        if k is SourceKind.ZERO:
            return None
        if k is SourceKind.WAIT_FIRST:
            return (0, 0)
        if k is SourceKind.STANDARD:
            i = cell_index(n * h, h)
            return (i, i)
        if k is SourceKind.JUMP_FIRST:
            return (cell_index(n * h, h), None)
        return (None, None)

    def to_dict(self) -> dict:
        if self.kind is SourceKind.SAMPLED:
            raise ConfigError("a sampled source cannot be serialized")
        out: dict = {"kind": self.kind.value}
        if self.mu is not None:
            out["mu"] = self.mu
        if self.reflected:
            out["reflected"] = True
        return out

    @classmethod
    def from_dict(cls, data: dict) -> SourceSpec:
        try:
            kind = SourceKind(data["kind"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"unknown source description {data!r}") from exc
        if kind is SourceKind.SAMPLED:
            raise ConfigError("a sampled source cannot be deserialized")
        return cls(kind, mu=data.get("mu"), reflected=bool(data.get("reflected", False)))


def solvability_target(t: float, alpha: float | AlphaParam) -> float:
    """Total source mass ``t^{-α}/Γ(1-α)`` required of a density problem."""
    a = as_alpha(alpha).alpha
    return t ** (-a) / math.gamma(1.0 - a)


def source_value(source: SourceSpec, x, t, alpha: float | AlphaParam):
    """Point values of a source without Dirac part."""
    a = as_alpha(alpha).alpha
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if source.reflected:
        x = -x
    k = source.kind
    if k is SourceKind.ZERO:
        out = np.zeros(np.broadcast(x, t).shape)
    elif k is SourceKind.POWER:
        out = np.broadcast_to(t**source.mu, np.broadcast(x, t).shape).copy()
    elif k is SourceKind.JUMP_FIRST:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x > t, a * x ** (-a - 1.0) / math.gamma(1.0 - a), 0.0)
    elif k is SourceKind.SAMPLED:
        out = np.asarray(source.func(x, t), dtype=np.float64)
    else:
        raise ConfigError(f"the {k.value} source contains a Dirac mass and has no point values")
    return float(out) if out.ndim == 0 else out


# }}}


# {{{ densities


def pdf_wait_first(x, t: float, alpha: float | AlphaParam):
    """Wait-first density ``sin(πα)/π x^{α-1} (t - x)^{-α}`` on the open interval ``(0, t)``."""
    a = as_alpha(alpha).alpha
    if not t > 0:
        raise ConfigError(f"t must be positive, got {t}")
    x = np.asarray(x, dtype=np.float64)
    inside = (x > 0) & (x < t)
    xs = np.where(inside, x, 0.5 * t)
    out = np.where(inside, math.sin(math.pi * a) / math.pi * xs ** (a - 1.0) * (t - xs) ** (-a), 0.0)
    return float(out) if out.ndim == 0 else out


def pdf_jump_first(x, t: float, alpha: float | AlphaParam):
    """Jump-first density ``sin(πα)/π (1/x) (t/(x - t))^α`` for ``x > t``."""
    a = as_alpha(alpha).alpha
    if not t > 0:
        raise ConfigError(f"t must be positive, got {t}")
    x = np.asarray(x, dtype=np.float64)
    inside = x > t
    xs = np.where(inside, x, 2.0 * t)
    out = np.where(inside, math.sin(math.pi * a) / math.pi / xs * (t / (xs - t)) ** a, 0.0)
    return float(out) if out.ndim == 0 else out


def pdf_standard(cell, t: float, mesh: MeshSpec):
    """Cell average of ``δ(x - t)``: ``1/h`` on the cell containing ``t``."""
    if not t > 0:
        raise ConfigError(f"t must be positive, got {t}")
    cell = np.asarray(cell)
    out = np.where(cell == cell_index(t, mesh.h), 1.0 / mesh.h, 0.0)
    return float(out) if out.ndim == 0 else out


def _cell_edges(cells, h: float) -> tuple[np.ndarray, np.ndarray]:
    c = np.asarray(cells, dtype=np.float64)
    return (c - 0.5) * h, (c + 0.5) * h


def wait_first_cell_averages(cells, t: float, h: float, alpha: float | AlphaParam) -> np.ndarray:
    """Exact cell averages of :func:`pdf_wait_first` from its Beta-law CDF."""
    a = as_alpha(alpha).alpha
    lo, hi = _cell_edges(cells, h)

    def cdf(x):
        return betainc(a, 1.0 - a, np.clip(x / t, 0.0, 1.0))

    return (cdf(hi) - cdf(lo)) / h


def jump_first_cell_averages(cells, t: float, h: float, alpha: float | AlphaParam) -> np.ndarray:
    """Exact cell averages of :func:`pdf_jump_first`.

    ``t / X`` follows the Beta(α, 1 - α) law, so the survival function is
    ``I_{t/x}(α, 1 - α)``.
    """
    a = as_alpha(alpha).alpha
    lo, hi = _cell_edges(cells, h)

    def sf(x):
        with np.errstate(divide="ignore"):
            w = np.where(x > t, t / np.maximum(x, t), 1.0)
        return betainc(a, 1.0 - a, w)

    return (sf(lo) - sf(hi)) / h


def standard_cell_averages(cells, t: float, h: float) -> np.ndarray:
    cells = np.asarray(cells)
    return np.where(cells == cell_index(t, h), 1.0 / h, 0.0)


def jump_first_tail_bound(t: float, x_max: float, alpha: float | AlphaParam) -> float:
    """Upper bound ``sin(πα)/π (t/(x_max - t))^α / α`` on the jump-first mass beyond ``x_max``."""
    a = as_alpha(alpha).alpha
    if not x_max > t:
        raise ConfigError(f"x_max must exceed t, got x_max={x_max}, t={t}")
    return math.sin(math.pi * a) / math.pi * (t / (x_max - t)) ** a / a


@dataclass(frozen=True)
class Normalization:
    integral: float
    error_estimate: float
    tail_bound: float = 0.0


def _quad(*args, **kwargs) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(*args, **kwargs)[:2]
    return val, err


_QOPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=400)


def wait_first_normalization(t: float, alpha: float | AlphaParam) -> Normalization:
    """``∫_0^t pdf_wait_first dx`` by quadrature, one endpoint singularity per half."""
    a = as_alpha(alpha).alpha
    c = math.sin(math.pi * a) / math.pi
    m = 0.5 * t
    left, e1 = _quad(lambda x: c * (t - x) ** (-a), 0.0, m, weight="alg", wvar=(a - 1.0, 0.0), **_QOPTS)
    right, e2 = _quad(lambda x: c * x ** (a - 1.0), m, t, weight="alg", wvar=(0.0, -a), **_QOPTS)
    return Normalization(left + right, e1 + e2)


def jump_first_normalization(
    t: float, alpha: float | AlphaParam, x_max: float | None = None
) -> Normalization:
    """``∫_t^∞ pdf_jump_first dx``: quadrature on ``(t, x_max)`` plus the tail integral.

    The truncation bound at ``x_max`` (default ``10^3 t``) is reported
    alongside; the far tail is integrated after the substitution ``x = t/w``.
    """
    a = as_alpha(alpha).alpha
    x_max = 1e3 * t if x_max is None else float(x_max)
    c = math.sin(math.pi * a) / math.pi
    bound = jump_first_tail_bound(t, x_max, a)
    near, e1 = _quad(
        lambda x: c / x * t**a, t, 2.0 * t, weight="alg", wvar=(-a, 0.0), **_QOPTS
    )
    mid, e2 = _quad(lambda x: pdf_jump_first(x, t, a), 2.0 * t, x_max, points=[4 * t, 16 * t, 64 * t], **_QOPTS)
    # ∫_{x_max}^∞ in w = t/x: c w^{α-1} (1 - w)^{-α} on (0, t/x_max)
    w_max = t / x_max
    tail, e3 = _quad(lambda w: c * (1.0 - w) ** (-a), 0.0, w_max, weight="alg", wvar=(a - 1.0, 0.0), **_QOPTS)
    return Normalization(near + mid + tail, e1 + e2 + e3, bound)


def power_source_solution(t, alpha: float | AlphaParam, mu: float):
    """Solution of ``D^α u = t^μ`` with zero data: ``Γ(μ+1)/Γ(μ+1+α) t^{μ+α}``."""
    a = as_alpha(alpha).alpha
    t = np.asarray(t, dtype=np.float64)
    out = math.gamma(mu + 1.0) / math.gamma(mu + 1.0 + a) * t ** (mu + a)
    return float(out) if out.ndim == 0 else out


# }}}


# {{{ general solution


@dataclass(frozen=True)
class GeneralIVP:
    """``D^α_± u = f`` with trace ``lim_{t→0+} I^{1-α}_t u = φ(x)`` on ``(0, T]``.

    ``phi=None`` means ``φ ≡ 0``, which is the only trace accepted for the
    density problems.
    """

    alpha: AlphaParam
    direction: Direction
    source: SourceSpec
    T: float
    phi: Callable[[float], float] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_alpha(self.alpha))
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ConfigError(f"horizon must be positive, got T={self.T!r}")
        if self.source.is_density and self.phi is not None:
            raise ConfigError("density problems require a vanishing trace (phi ≡ 0)")


def _dirac_sift(kernel_s: float, t: float, a: float, weight: float = 1.0) -> float:
    # (1/Γ(α)) (t - s*)^{α-1} s*^{-α}/Γ(1-α) at the sifted time s*
    if not 0.0 < kernel_s < t:
        return 0.0
    return weight * (t - kernel_s) ** (a - 1.0) * kernel_s ** (-a) * math.sin(math.pi * a) / math.pi


def general_solution(ivp: GeneralIVP, x: float, t: float, tol: float = 1e-10) -> float:
    """Evaluate the solution formula at ``(x, t)``.

    ``u = t^{α-1}/Γ(α) φ(x ∓ t) + 1/Γ(α) ∫_0^t (t - s)^{α-1} f(x ∓ (t - s), s) ds``.
    Regular sources use the algebraic-weight quadrature and must meet
    ``tol`` (absolute); Dirac sources are sifted in closed form. Points on the
    support line of the standard source carry a Dirac mass and are rejected.
    """
    a = ivp.alpha.alpha
    if not 0.0 < t <= ivp.T * (1.0 + 1e-12):
        raise ConfigError(f"t={t} outside (0, T={ivp.T}]")
    if ivp.source.reflected:
        # u(x) solves the mirrored problem at -x with the opposite direction
        phi = ivp.phi
        mirrored = GeneralIVP(
            ivp.alpha,
            Direction(-ivp.direction.sign),
            ivp.source.reflect(),
            ivp.T,
            None if phi is None else (lambda y: phi(-y)),
        )
        return general_solution(mirrored, -x, t, tol)
    sgn = ivp.direction.sign
    value = 0.0
    if ivp.phi is not None:
        value += t ** (a - 1.0) / math.gamma(a) * float(ivp.phi(x - sgn * t))

    src = ivp.source
    k = src.kind
    if k is SourceKind.ZERO:
        return value
    if k is SourceKind.WAIT_FIRST:
        # δ(x ∓ (t - s)) fires at s* = t ∓ x
        return value + _dirac_sift(t - sgn * x, t, a)
    if k is SourceKind.STANDARD:
        if sgn > 0:
            if x == t:
                raise ConfigError("the standard walk solution is δ(x - t); no point value on x = t")
            return value
        # δ(x + t - 2s) = δ(s - (x + t)/2) / 2
        return value + _dirac_sift(0.5 * (x + t), t, a, weight=0.5)

    g_a = math.gamma(a)
    upper = t
    if k is SourceKind.JUMP_FIRST:
        # H(y - s) with y = x ∓ (t - s)
        if sgn > 0:
            if not x > t:
                return value
        else:
            upper = min(t, 0.5 * (x + t))
            if upper <= 0:
                return value

    def f(s: float) -> float:
        return float(source_value(src, x - sgn * (t - s), s, a))

    if upper < t:
        integral, err = _quad(lambda s: (t - s) ** (a - 1.0) * f(s), 0.0, upper, epsabs=0.1 * tol, epsrel=1e-12, limit=400)
    else:
        integral, err = _quad(f, 0.0, t, weight="alg", wvar=(0.0, a - 1.0), epsabs=0.1 * tol, epsrel=1e-12, limit=400)
    if not (err <= tol * max(1.0, abs(integral)) and math.isfinite(integral)):
        raise AccuracyError(f"source convolution at (x={x}, t={t}) missed tolerance {tol}", err)
    return value + integral / g_a


# }}}


# {{{ solvability


def solvability_integral(
    source: SourceSpec,
    t: float,
    alpha: float | AlphaParam,
    tol: float = 1e-8,
    domain: tuple[float, float] | None = None,
) -> tuple[float, bool]:
    """Return ``∫ f(x, t) dx`` and whether it equals ``t^{-α}/Γ(1-α)`` to relative ``tol``.

    Dirac and Heaviside kinds are integrated in closed form over the real
    line. ``domain`` truncates the power and sampled sources (the power
    source has infinite mass on the line).
    """
    a = as_alpha(alpha).alpha
    if not t > 0:
        raise ConfigError(f"t must be positive, got {t}")
    target = solvability_target(t, a)
    k = source.kind
    if k in _SINGULAR:
        integral = target
    elif k is SourceKind.ZERO:
        integral = 0.0
    elif k is SourceKind.POWER:
        if domain is None:
            integral = math.inf
        else:
            integral = (domain[1] - domain[0]) * t**source.mu
    else:
        lo, hi = (-math.inf, math.inf) if domain is None else domain
        integral, err = _quad(
            lambda x: float(source.func(x, t)), lo, hi, epsabs=0.1 * tol * target, epsrel=0.1 * tol, limit=400
        )
        if not (math.isfinite(integral) and err <= tol * max(target, abs(integral))):
            raise AccuracyError("sampled source is not integrable to the requested tolerance", err)
    return integral, bool(abs(integral - target) <= tol * target)


# }}}


# {{{ cell averages of sources


_GL3_NODES = np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)]) * 0.5
_GL3_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


def source_cell_averages(
    source: SourceSpec, cells, n: int, mesh: MeshSpec, alpha: float | AlphaParam
) -> np.ndarray:
    """``(1/h) ∫_cell f(x, t_n) dx`` for an array of cells, in closed form per kind."""
    a = as_alpha(alpha).alpha
    h = mesh.h
    cells = np.asarray(cells, dtype=np.int64)
    if source.reflected:
        cells = -cells
    k = source.kind
    if k in _SINGULAR and n < 1:
        raise ConfigError(f"the {k.value} source is singular at t = 0; need n >= 1, got {n}")
    if n < 0:
        raise ConfigError(f"time level must be non-negative, got {n}")
    tn = n * h
    if k is SourceKind.ZERO:
        return np.zeros(cells.shape)
    if k is SourceKind.POWER:
        return np.full(cells.shape, tn**source.mu)
    if k is SourceKind.WAIT_FIRST:
        return np.where(cells == 0, solvability_target(tn, a) / h, 0.0)
    if k is SourceKind.STANDARD:
        return np.where(cells == cell_index(tn, h), solvability_target(tn, a) / h, 0.0)
    if k is SourceKind.JUMP_FIRST:
        lo = np.maximum((cells - 0.5) * h, tn)
        hi = (cells + 0.5) * h
        live = hi > lo
        lo = np.where(live, lo, 1.0)
        hi = np.where(live, hi, 2.0)
        # lo^{-α} - hi^{-α} without cancellation
        mass = -(lo ** (-a)) * np.expm1(-a * np.log(hi / lo))
        return np.where(live, mass / (math.gamma(1.0 - a) * h), 0.0)
    # a reflected source averaged over cell i is the plain one over cell -i
    centers = cells[..., None] * h + _GL3_NODES * h
    vals = np.asarray(source.func(centers, np.full(centers.shape, tn)), dtype=np.float64)
    return vals @ _GL3_WEIGHTS


def source_cell_average(
    source: SourceSpec, cell: int, n: int, mesh: MeshSpec, alpha: float | AlphaParam
) -> float:
    return float(source_cell_averages(source, np.array([cell]), n, mesh, alpha)[0])


# }}}
