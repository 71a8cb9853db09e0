"""Norms, error tables, rate fits, mass series and timings."""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import asdict, dataclass, field
from types import ModuleType
from typing import Any, Callable, Sequence

import numpy as np

from fracmatder.analytic import SourceSpec, power_source_solution, wait_first_cell_averages
from fracmatder.core import AlphaParam, Direction, FieldHistory, MeshSpec, as_alpha
from fracmatder.errors import ConfigError
from fracmatder.fvm import InitialCondition, SchemeVariant, fit_mesh, march, valid_cells
from fracmatder.stochastic import RngSeed, estimate_pdf

__all__ = [
    "ErrorRow",
    "RateFit",
    "RunReport",
    "discrete_norm",
    "error_vs_reference",
    "fit_rate",
    "mass_series",
    "median_time",
    "power_convergence",
    "space_time_max_error",
    "timing_compare",
    "wait_first_convergence",
]

Reference = Callable[[np.ndarray, float], np.ndarray]


# {{{ norms


def discrete_norm(frame: np.ndarray, p: float, h: float) -> float:
    """``(h Σ |u_i|^p)^{1/p}`` for ``p`` in ``{1, 2}``, ``max |u_i|`` for ``p = inf``."""
    u = np.abs(np.asarray(frame, dtype=np.float64))
    if u.size == 0:
        return 0.0
    if p == 1:
        return float(h * u.sum())
    if p == 2:
        return float(math.sqrt(h * np.dot(u, u)))
    if p == math.inf:
        return float(u.max())
    raise ConfigError(f"unsupported norm p={p!r}; use 1, 2 or inf")


def error_vs_reference(
    history: FieldHistory,
    reference: Reference,
    n: int,
    p: float,
    h: float | None = None,
    mask: np.ndarray | None = None,
) -> float:
    """Norm of ``u^n - reference(cells, t_n)``, optionally on a subset of cells."""
    mesh = history.mesh
    h = mesh.h if h is None else h
    cells = mesh.cells
    err = history.frame(n) - np.asarray(reference(cells, n * mesh.h), dtype=np.float64)
    if mask is not None:
        err = err[mask]
    return discrete_norm(err, p, h)


def space_time_max_error(
    history: FieldHistory,
    reference: Reference,
    mask: Callable[[int], np.ndarray] | None = None,
) -> float:
    """``max_n max_i |u^n_i - reference|`` over levels ``1..n``."""
    worst = 0.0
    for n in range(1, history.n + 1):
        m = None if mask is None else mask(n)
        worst = max(worst, error_vs_reference(history, reference, n, math.inf, mask=m))
    return worst


def mass_series(history: FieldHistory, h: float | None = None) -> np.ndarray:
    """``‖u^n‖_{1,h}`` for every stored level."""
    h = history.mesh.h if h is None else h
    return np.array([discrete_norm(history.frame(n), 1, h) for n in range(len(history))])


# }}}


# {{{ rate fit


@dataclass(frozen=True)
class RateFit:
    """Slope of ``log2 e`` against ``log2 h`` on ``[h_min, h_max]``."""

    rate: float
    residual: float
    h_min: float
    h_max: float
    n_points: int
    excluded_h: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _lsq(x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), y - A @ coef


def fit_rate(errors: Sequence[tuple[float, float]]) -> RateFit:
    """Least-squares convergence rate.

    The coarsest point is dropped when its squared residual exceeds three
    times the mean and at least three points remain; the report records it.
    """
    pts = sorted((float(h), float(e)) for h, e in errors)
    if len(pts) < 3:
        raise ConfigError(f"a rate fit needs at least 3 points, got {len(pts)}")
    if any(not (h > 0 and e > 0) for h, e in pts):
        raise ConfigError("rate fit needs positive step sizes and errors")
    x = np.log2([h for h, _ in pts])
    y = np.log2([e for _, e in pts])
    rate, res = _lsq(x, y)
    excluded = None
    sq = res**2
    # the floor keeps round-off on exact power laws from triggering it
    if len(pts) >= 4 and sq[-1] > max(3.0 * sq.mean(), 1e-12):
        excluded = pts[-1][0]
        pts = pts[:-1]
        x, y = x[:-1], y[:-1]
        rate, res = _lsq(x, y)
    return RateFit(
        rate=rate,
        residual=float(np.sqrt(np.mean(res**2))),
        h_min=pts[0][0],
        h_max=pts[-1][0],
        n_points=len(pts),
        excluded_h=excluded,
    )


# }}}


# {{{ convergence studies


@dataclass(frozen=True)
class ErrorRow:
    h: float
    l2: float
    linf: float
    seconds: float


def power_convergence(
    alpha: float | AlphaParam,
    mu: float,
    hs: Sequence[float],
    T: float = 1.0,
    direction: Direction = Direction.PLUS,
    variant: SchemeVariant = SchemeVariant.STANDARD,
    kernels: ModuleType | None = None,
) -> tuple[list[ErrorRow], RateFit]:
    """Errors of the ``f = t^μ`` problem against ``Γ(μ+1)/Γ(μ+1+α) t^{μ+α}``.

    The window is ``[-T, T]``; only cells whose characteristic starts inside
    it are compared. ``linf`` is the maximum over all levels and cells,
    ``l2`` the final-level norm; the rate is fitted to ``linf``.
    """
    a = as_alpha(alpha)
    src = SourceSpec.power(mu)
    rows = []
    for h in hs:
        mesh = fit_mesh(h, T, InitialCondition.zero(), src, direction, variant, extent=(-T, T))

        def ref(cells, t):
            return np.full(cells.shape, power_source_solution(t, a, mu))

        t0 = time.perf_counter()
        hist = march(InitialCondition.zero(), src, direction, a, mesh, variant, kernels=kernels)
        secs = time.perf_counter() - t0
        linf = space_time_max_error(hist, ref, lambda n: valid_cells(mesh, direction, n))
        N = mesh.n_steps
        l2 = error_vs_reference(hist, ref, N, 2, mask=valid_cells(mesh, direction, N))
        rows.append(ErrorRow(h=float(h), l2=l2, linf=linf, seconds=secs))
    return rows, fit_rate([(r.h, r.linf) for r in rows])


def wait_first_convergence(
    alpha: float | AlphaParam,
    hs: Sequence[float],
    T: float = 1.0,
    variant: SchemeVariant = SchemeVariant.STANDARD,
    kernels: ModuleType | None = None,
) -> tuple[list[ErrorRow], RateFit]:
    """Final-time errors of the wait-first density against exact cell averages.

    Both norms run over the whole window; the rate is fitted to ``l2``.
    """
    a = as_alpha(alpha)
    src = SourceSpec.wait_first()
    ic = InitialCondition.dirac(0.0)
    rows = []
    for h in hs:
        mesh = fit_mesh(h, T, ic, src, Direction.PLUS, variant)

        def ref(cells, t, h=h):
            return wait_first_cell_averages(cells, t, h, a)

        t0 = time.perf_counter()
        hist = march(ic, src, Direction.PLUS, a, mesh, variant, kernels=kernels)
        secs = time.perf_counter() - t0
        N = mesh.n_steps
        rows.append(
            ErrorRow(
                h=float(h),
                l2=error_vs_reference(hist, ref, N, 2),
                linf=error_vs_reference(hist, ref, N, math.inf),
                seconds=secs,
            )
        )
    return rows, fit_rate([(r.h, r.l2) for r in rows])


# }}}


# {{{ timing and reports


def median_time(fn: Callable[[], Any], repeats: int = 3) -> tuple[float, Any]:
    """Median wall-clock of ``repeats`` calls (monotonic clock) and the last result."""
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def timing_compare(
    alpha: float | AlphaParam = 0.5,
    h: float = 2.0**-10,
    t: float = 1.0,
    n_trajs: Sequence[int] = (10**5, 10**6),
    seed: RngSeed | int = 0,
    variant: SchemeVariant = SchemeVariant.STEP_AHEAD,
    fv_repeats: int = 3,
    mc_repeats: int = 3,
    kernels: ModuleType | None = None,
    with_data: bool = False,
):
    """Single-threaded wall-clock and L1 error of FV and MC for the wait-first density.

    Both methods share the grid of the FV run; errors are against exact
    cell averages at time ``t``. With ``with_data`` the FV history and the
    Monte Carlo estimates are returned too, as ``(report, history, pdfs)``.
    """
    a = as_alpha(alpha)
    ic = InitialCondition.dirac(0.0)
    src = SourceSpec.wait_first()
    mesh = fit_mesh(h, t, ic, src, Direction.PLUS, variant)
    ref = wait_first_cell_averages(mesh.cells, t, h, a)

    fv_time, hist = median_time(
        lambda: march(ic, src, Direction.PLUS, a, mesh, variant, kernels=kernels), fv_repeats
    )
    fv_err = discrete_norm(hist.frame(mesh.n_steps) - ref, 1, h)
    out: dict = {
        "alpha": a.alpha,
        "h": h,
        "t": t,
        "variant": variant.value,
        "fv": {"seconds": fv_time, "l1_error": fv_err, "repeats": fv_repeats},
        "mc": [],
    }
    pdfs = []
    for n in n_trajs:
        mc_time, pdf = median_time(
            lambda n=n: estimate_pdf(a, h, t, n, mesh, seed, workers=1, kernels=kernels),
            mc_repeats,
        )
        out["mc"].append(
            {
                "n_traj": int(n),
                "seconds": mc_time,
                "l1_error": discrete_norm(pdf.density - ref, 1, h),
                "overflow_mass": pdf.overflow_mass,
                "mean_steps": pdf.mean_steps,
                "repeats": mc_repeats,
                "ratio_to_fv": mc_time / fv_time,
            }
        )
        pdfs.append(pdf)
    if with_data:
        return out, hist, pdfs
    return out


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if hasattr(v, "to_dict"):
        return _jsonable(v.to_dict())
    if hasattr(v, "__dataclass_fields__"):
        return _jsonable(asdict(v))
    return v


@dataclass
class RunReport:
    """Everything a harness run produced; :meth:`to_dict` is JSON-ready."""

    metadata: dict = field(default_factory=dict)
    errors: list[ErrorRow] = field(default_factory=list)
    rate: RateFit | None = None
    mass: np.ndarray | None = None
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "metadata": self.metadata,
                "errors": self.errors,
                "rate": self.rate,
                "mass": self.mass,
                "timings": self.timings,
            }
        )


# }}}
