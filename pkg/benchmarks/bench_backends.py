"""Compare the compiled kernels with the numpy fallback.

Times a full wait-first march (the L1 history sums) and the Monte Carlo
walker on both backends and checks that they agree. Usage::

    python benchmarks/bench_backends.py [--k 10] [--n-traj 20000] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from fracmatder import _backend
from fracmatder.core import Direction
from fracmatder.analytic import SourceSpec
from fracmatder.fvm import InitialCondition, SchemeVariant, fit_mesh, march
from fracmatder.metrics import median_time
from fracmatder.stochastic import estimate_pdf


def run(k: int, n_traj: int, alpha: float, repeats: int) -> dict:
    h = 2.0**-k
    ic = InitialCondition.dirac(0.0)
    src = SourceSpec.wait_first()
    mesh = fit_mesh(h, 1.0, ic, src, Direction.PLUS, SchemeVariant.STEP_AHEAD)
    out: dict = {"h": h, "alpha": alpha, "n_traj": n_traj, "backends": {}}
    frames = {}
    densities = {}
    for name in _backend.available():
        kern = _backend.get(name)
        t_fv, hist = median_time(
            lambda: march(ic, src, Direction.PLUS, alpha, mesh, SchemeVariant.STEP_AHEAD, kernels=kern),
            repeats,
        )
        t_mc, pdf = median_time(lambda: estimate_pdf(alpha, h, 1.0, n_traj, mesh, 1, kernels=kern), repeats)
        frames[name] = hist.frame(mesh.n_steps)
        densities[name] = pdf.density
        out["backends"][name] = {
            "march_seconds": t_fv,
            "mc_seconds": t_mc,
            "mc_us_per_step": 1e6 * t_mc / (n_traj * pdf.mean_steps),
        }
    if len(frames) == 2:
        out["march_identical"] = bool(np.array_equal(frames["python"], frames["compiled"]))
        diff = np.abs(densities["python"] - densities["compiled"]).sum() * h
        out["mc_density_l1_difference"] = float(diff)
        b = out["backends"]
        out["speedup_march"] = b["python"]["march_seconds"] / b["compiled"]["march_seconds"]
        out["speedup_mc"] = b["python"]["mc_seconds"] / b["compiled"]["mc_seconds"]
    return out


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--k", type=int, default=10, help="h = 2^-k")
    p.add_argument("--n-traj", type=int, default=20000)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--json", default=None)
    ns = p.parse_args(argv)
    res = run(ns.k, ns.n_traj, ns.alpha, ns.repeats)
    print(json.dumps(res, indent=2))
    if ns.json:
        with open(ns.json, "w") as f:
            json.dump(res, f, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
