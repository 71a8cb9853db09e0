"""Command-line front end.

Subcommands ``solve``, ``converge``, ``mc`` and ``compare`` write CSV tables
plus a JSON sidecar into the output directory (``--output``, else
``$FRACMATDER_OUTPUT``, else ``./fracmatder-out``). Exit codes: 0 success,
2 configuration error, 3 accuracy failure, 4 resource failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from fracmatder import _backend
from fracmatder.analytic import SourceKind, SourceSpec, wait_first_cell_averages
from fracmatder.core import AlphaParam, Direction
from fracmatder.errors import AccuracyError, ConfigError, DomainOfDependenceError, PathBudgetError
from fracmatder.fvm import InitialCondition, SchemeVariant, fit_mesh, march
from fracmatder.metrics import (
    discrete_norm,
    mass_series,
    power_convergence,
    timing_compare,
    wait_first_convergence,
)
from fracmatder.stochastic import RngSeed, estimate_pdf

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ACCURACY = 3
EXIT_RESOURCE = 4

OUTPUT_ENV = "FRACMATDER_OUTPUT"
DEFAULT_OUTPUT = "fracmatder-out"

COMMANDS = ("solve", "converge", "mc", "compare")
SOURCES = ("zero", "power", "wait-first", "jump-first", "standard")


# {{{ config


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: tuple[float, ...] = (0.5,)
    direction: str = "plus"
    source: str = "wait-first"
    mu: float | None = None
    ic: str = "dirac"
    ic_at: float = 0.0
    h: tuple[float, ...] = (2.0**-10,)
    T: float = 1.0
    scheme: str = "step-ahead"
    x_min: float | None = None
    x_max: float | None = None
    n_traj: tuple[int, ...] = (10**5,)
    seed: int = 0
    workers: int = 1
    output: str = DEFAULT_OUTPUT
    all_frames: bool = False
    mc_repeats: int = 1
    backend: str | None = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for name in ("alpha", "h", "n_traj"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for a in self.alpha:
            AlphaParam(a)
        if not self.h or any(not (h > 0 and math.isfinite(h)) for h in self.h):
            raise ConfigError(f"step sizes must be positive, got {self.h}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ConfigError(f"T must be positive, got {self.T}")
        Direction.parse(self.direction)
        SchemeVariant.parse(self.scheme)
        if self.source not in SOURCES:
            raise ConfigError(f"unknown source {self.source!r}; choose from {', '.join(SOURCES)}")
        self.source_spec()
        if self.ic not in ("zero", "dirac"):
            raise ConfigError(f"unknown initial condition {self.ic!r}; choose zero or dirac")
        if any(n < 1 for n in self.n_traj) or not self.n_traj:
            raise ConfigError(f"n_traj must be positive, got {self.n_traj}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.mc_repeats < 1:
            raise ConfigError(f"mc_repeats must be >= 1, got {self.mc_repeats}")
        RngSeed(self.seed)
        if self.command in ("solve", "mc") and (len(self.h) != 1 or len(self.alpha) != 1):
            raise ConfigError(f"{self.command} takes a single --h and a single --alpha")
        if self.command in ("mc", "compare"):
            if self.source != "wait-first":
                raise ConfigError(
                    f"Monte Carlo covers the wait-first walk only; simulating the {self.source} "
                    "walk is outside the scope of this tool"
                )
            if self.direction != "plus":
                raise ConfigError("Monte Carlo simulates the right-moving (plus) walk only")
            if len(self.h) != 1 or len(self.alpha) != 1:
                raise ConfigError(f"{self.command} takes a single --h and a single --alpha")
        if self.command == "converge" and self.source not in ("power", "wait-first"):
            raise ConfigError("converge supports the power and wait-first sources")
        if self.command == "converge" and len(self.h) < 3:
            raise ConfigError("converge needs at least three step sizes")
        if self.backend is not None:
            _backend.get(self.backend)

    def source_spec(self) -> SourceSpec:
        if self.source == "power":
            return SourceSpec.power(self.mu if self.mu is not None else float("nan"))
        if self.mu is not None:
            raise ConfigError("--mu only applies to the power source")
        spec = SourceSpec(SourceKind(self.source))
        # the minus problems use the mirrored walk sources
        return spec.reflect() if self.direction == "minus" else spec

    def initial(self) -> InitialCondition:
        return InitialCondition.zero() if self.ic == "zero" else InitialCondition.dirac(self.ic_at)

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("alpha", "h", "n_traj"):
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)


# }}}


# {{{ output


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path: Path, data: dict) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True, allow_nan=True)
        f.write("\n")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _kernels(cfg: RunConfig):
    return _backend.get(cfg.backend)


# }}}


# {{{ commands


def _extent(cfg: RunConfig):
    if cfg.x_min is None and cfg.x_max is None:
        return None
    if cfg.x_min is None or cfg.x_max is None or not cfg.x_min < cfg.x_max:
        raise ConfigError("--x-min and --x-max must be given together with x_min < x_max")
    return (cfg.x_min, cfg.x_max)


def cmd_solve(cfg: RunConfig) -> list[Path]:
    alpha = cfg.alpha[0]
    h = cfg.h[0]
    direction = Direction.parse(cfg.direction)
    variant = SchemeVariant.parse(cfg.scheme)
    src = cfg.source_spec()
    ic = cfg.initial()
    mesh = fit_mesh(h, cfg.T, ic, src, direction, variant, extent=_extent(cfg))
    hist = march(ic, src, direction, alpha, mesh, variant, kernels=_kernels(cfg))
    out = _outdir(cfg)
    N = mesh.n_steps
    paths = [out / "solution.csv", out / "solution.json"]
    write_csv(paths[0], ["i", "x", "u"], zip(mesh.cells.tolist(), mesh.x, hist.frame(N)))
    if cfg.all_frames:
        paths.append(out / "frames.csv")

        def rows():
            for n in range(N + 1):
                for i, x, u in zip(mesh.cells.tolist(), mesh.x, hist.frame(n)):
                    yield (n, repr(n * h), i, x, u)

        write_csv(paths[-1], ["n", "t", "i", "x", "u"], rows())
    write_json(
        paths[1],
        {
            "config": cfg.to_dict(),
            "mesh": asdict(mesh),
            "mass": mass_series(hist).tolist(),
            "columns": {"i": "cell index", "x": "cell centre i*h", "u": "cell average at t = T"},
        },
    )
    return paths


def cmd_converge(cfg: RunConfig) -> list[Path]:
    direction = Direction.parse(cfg.direction)
    variant = SchemeVariant.parse(cfg.scheme)
    out = _outdir(cfg)
    table = []
    fits = []
    for alpha in cfg.alpha:
        if cfg.source == "power":
            rows, fit = power_convergence(
                alpha, cfg.source_spec().mu, cfg.h, cfg.T, direction, variant, kernels=_kernels(cfg)
            )
        else:
            rows, fit = wait_first_convergence(alpha, cfg.h, cfg.T, variant, kernels=_kernels(cfg))
        table.extend((alpha, r.h, r.l2, r.linf) for r in rows)
        fits.append({"alpha": alpha, "fitted_norm": "linf" if cfg.source == "power" else "l2", **fit.to_dict()})
    paths = [out / "converge.csv", out / "converge.json"]
    write_csv(paths[0], ["alpha", "h", "l2", "linf"], table)
    write_json(paths[1], {"config": cfg.to_dict(), "fits": fits})
    return paths


def _mc_mesh(cfg: RunConfig):
    return fit_mesh(
        cfg.h[0], cfg.T, InitialCondition.dirac(0.0), SourceSpec.wait_first(), Direction.PLUS,
        SchemeVariant.STEP_AHEAD,
    )


def cmd_mc(cfg: RunConfig) -> list[Path]:
    alpha = cfg.alpha[0]
    h = cfg.h[0]
    mesh = _mc_mesh(cfg)
    pdf = estimate_pdf(
        alpha, h, cfg.T, cfg.n_traj[0], mesh, RngSeed(cfg.seed), workers=cfg.workers, kernels=_kernels(cfg)
    )
    out = _outdir(cfg)
    paths = [out / "mc.csv", out / "mc.json"]
    write_csv(
        paths[0], ["i", "x", "count", "density"], zip(mesh.cells.tolist(), mesh.x, pdf.counts.tolist(), pdf.density)
    )
    ref = wait_first_cell_averages(mesh.cells, cfg.T, h, alpha)
    write_json(
        paths[1],
        {
            "config": cfg.to_dict(),
            "mesh": asdict(mesh),
            "n_traj": pdf.n_traj,
            "overflow": pdf.overflow,
            "mean_steps": pdf.mean_steps,
            "l1_error": discrete_norm(pdf.density - ref, 1, h),
        },
    )
    return paths


def cmd_compare(cfg: RunConfig) -> list[Path]:
    alpha = cfg.alpha[0]
    h = cfg.h[0]
    timing, hist, pdfs = timing_compare(
        alpha,
        h,
        cfg.T,
        cfg.n_traj,
        RngSeed(cfg.seed),
        SchemeVariant.parse(cfg.scheme),
        mc_repeats=cfg.mc_repeats,
        kernels=_kernels(cfg),
        with_data=True,
    )
    mesh = hist.mesh
    ref = wait_first_cell_averages(mesh.cells, cfg.T, h, alpha)
    out = _outdir(cfg)
    paths = [out / "compare.csv", out / "compare.json"]
    header = ["i", "x", "analytic", "fv"] + [f"mc_{n}" for n in cfg.n_traj]
    columns = [p.density for p in pdfs]
    write_csv(paths[0], header, zip(mesh.cells.tolist(), mesh.x, ref, hist.frame(mesh.n_steps), *columns))
    write_json(paths[1], {"config": cfg.to_dict(), "timing": timing})
    return paths


_DISPATCH = {"solve": cmd_solve, "converge": cmd_converge, "mc": cmd_mc, "compare": cmd_compare}


# }}}


# {{{ argument parsing


def parse_step(text: str) -> float:
    """Accept ``0.25``, ``2^-4`` or ``2**-4``."""
    s = text.strip().replace("**", "^")
    try:
        if "^" in s:
            base, exp = s.split("^", 1)
            return float(base) ** float(exp)
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a step size: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracmatder",
        description="Finite-volume solver for the fractional material derivative, "
        "with Levy-walk references and a Monte Carlo cross-check.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, nargs="+", default=[0.5], help="fractional order(s) in (0, 1)")
    common.add_argument("--h", type=parse_step, nargs="+", default=None, help="step size(s), e.g. 2^-10")
    common.add_argument("--T", type=float, default=1.0, help="horizon / observation time")
    common.add_argument("--output", "-o", default=None, help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    common.add_argument("--backend", choices=["python", "compiled"], default=None)

    fv = argparse.ArgumentParser(add_help=False)
    fv.add_argument("--direction", choices=["plus", "minus"], default="plus")
    fv.add_argument("--scheme", choices=["standard", "step-ahead"], default="step-ahead")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--n-traj", type=int, nargs="+", default=None)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--workers", type=int, default=None, help="threads for Monte Carlo (default: all cores)")

    p = sub.add_parser("solve", parents=[common, fv], help="march one problem and write the final frame")
    p.add_argument("--source", choices=SOURCES, default="wait-first")
    p.add_argument("--mu", type=float, default=None, help="exponent of the power source t^mu")
    p.add_argument("--ic", choices=["zero", "dirac"], default=None)
    p.add_argument("--ic-at", type=float, default=0.0)
    p.add_argument("--x-min", type=float, default=None)
    p.add_argument("--x-max", type=float, default=None)
    p.add_argument("--all-frames", action="store_true")

    p = sub.add_parser("converge", parents=[common, fv], help="grid refinement study")
    p.add_argument("--source", choices=["power", "wait-first"], default="wait-first")
    p.add_argument("--mu", type=float, default=None)

    p = sub.add_parser("mc", parents=[common, mc], help="Monte Carlo density of the wait-first walk")
    p.add_argument("--source", choices=SOURCES, default="wait-first")

    p = sub.add_parser("compare", parents=[common, fv, mc], help="FV vs MC vs exact densities and timings")
    p.add_argument("--mc-repeats", type=int, default=1, help="timed Monte Carlo repetitions (FV always uses 3)")
    p.add_argument("--source", choices=SOURCES, default="wait-first")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    output = ns.output or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT
    kw: dict = dict(
        command=ns.command,
        alpha=tuple(ns.alpha),
        h=tuple(ns.h) if ns.h else _default_steps(ns.command),
        T=ns.T,
        output=output,
        source=ns.source,
        backend=ns.backend,
    )
    for name in ("direction", "scheme", "mu", "ic_at", "x_min", "x_max", "seed", "all_frames", "mc_repeats"):
        if hasattr(ns, name):
            kw[name] = getattr(ns, name)
    if hasattr(ns, "ic"):
        kw["ic"] = ns.ic or ("dirac" if ns.source in ("wait-first", "jump-first", "standard") else "zero")
    if hasattr(ns, "n_traj"):
        default = (10**5,) if ns.command == "mc" else (10**5, 10**6)
        kw["n_traj"] = tuple(ns.n_traj) if ns.n_traj else default
        kw["workers"] = ns.workers if ns.workers is not None else (os.cpu_count() or 1)
    return RunConfig(**kw)


def _default_steps(command: str) -> tuple[float, ...]:
    if command == "converge":
        return tuple(2.0**-k for k in range(5, 10))
    return (2.0**-10,)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = config_from_args(ns)
        paths = _DISPATCH[cfg.command](cfg)
    except (ConfigError, DomainOfDependenceError) as exc:
        print(f"fracmatder: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AccuracyError as exc:
        print(f"fracmatder: accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (PathBudgetError, MemoryError, OSError) as exc:
        print(f"fracmatder: resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    for p in paths:
        print(p)
    return EXIT_OK


# }}}
