from __future__ import annotations

import numpy as np
import pytest

from fracmatder.analytic import SourceSpec
from fracmatder.core import Direction
from fracmatder.errors import ConfigError, PathBudgetError
from fracmatder.fvm import InitialCondition, SchemeVariant, fit_mesh
from fracmatder.stochastic import (
    RandomStream,
    RngSeed,
    estimate_pdf,
    sample_positive_stable,
    simulate_coupled_paths,
    wait_first_position,
)


def _mesh(h):
    return fit_mesh(h, 1.0, InitialCondition.dirac(0.0), SourceSpec.wait_first(), Direction.PLUS, SchemeVariant.STEP_AHEAD)


def test_seed_validation():
    with pytest.raises(ConfigError):
        RngSeed(-1)
    with pytest.raises(ConfigError):
        RngSeed(0, 1 << 64)
    assert RngSeed(5, 2).child(3) == RngSeed(5, 5)


def test_uniforms_and_determinism(kernels):
    a = RandomStream(RngSeed(11, 4), kernels).uniforms(10000)
    b = RandomStream(RngSeed(11, 4), kernels).uniforms(10000)
    c = RandomStream(RngSeed(11, 5), kernels).uniforms(10000)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.all((a > 0) & (a < 1))
    assert abs(a.mean() - 0.5) < 0.01


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_stable_laplace_transform(alpha, kernels):
    xi = sample_positive_stable(alpha, RandomStream(1, kernels), 200000)
    assert np.all(xi > 0)
    for s in (0.5, 1.0, 2.0):
        assert np.exp(-s * xi).mean() == pytest.approx(np.exp(-(s**alpha)), abs=5e-3)
    assert isinstance(sample_positive_stable(alpha, RandomStream(1, kernels)), float)


def test_path_matches_kernel_walker(kernels):
    a, h, t = 0.5, 2.0**-6, 1.0
    seed = RngSeed(9, 100)
    mesh = _mesh(h)
    pdf = estimate_pdf(a, h, t, 1, mesh, seed, kernels=kernels)
    paths = simulate_coupled_paths(a, h, t, RandomStream(seed, kernels))
    x = wait_first_position(paths, t)
    path, motion = paths
    assert path.values[-1] > t and path.values[-2] <= t
    assert np.array_equal(path.values, motion)
    assert 0 <= x <= t
    from fracmatder.core import cell_index

    i = cell_index(x, h)
    assert pdf.counts[i - mesh.i_min] == 1


def test_estimate_pdf_properties(kernels):
    mesh = _mesh(2.0**-5)
    pdf = estimate_pdf(0.5, mesh.h, 1.0, 5000, mesh, 3, kernels=kernels)
    assert pdf.total_mass() == 1.0
    assert pdf.overflow == 0
    assert pdf.counts.sum() == 5000
    assert pdf.mean_steps > 1


def test_worker_independence():
    mesh = _mesh(2.0**-5)
    n = 40000  # three chunks
    one = estimate_pdf(0.5, mesh.h, 1.0, n, mesh, 7, workers=1)
    many = estimate_pdf(0.5, mesh.h, 1.0, n, mesh, 7, workers=4)
    assert np.array_equal(one.counts, many.counts)
    assert one.mean_steps == many.mean_steps


def test_budget_error(kernels):
    mesh = _mesh(2.0**-5)
    with pytest.raises(PathBudgetError) as exc:
        estimate_pdf(0.5, mesh.h, 1.0, 100, mesh, 0, kernels=kernels, budget=1)
    assert exc.value.failures > 0
    with pytest.raises(PathBudgetError):
        simulate_coupled_paths(0.5, 2.0**-10, 1.0, RandomStream(0, kernels), budget=2)


def test_validation():
    mesh = _mesh(2.0**-4)
    with pytest.raises(ConfigError):
        estimate_pdf(0.5, mesh.h, 1.0, 0, mesh)
    with pytest.raises(ConfigError):
        estimate_pdf(0.5, mesh.h, 1.0, 10, mesh, workers=0)
    paths = simulate_coupled_paths(0.5, 2.0**-4, 1.0, RandomStream(0))
    with pytest.raises(ConfigError):
        wait_first_position(paths, paths[0].values[-1] + 1)
