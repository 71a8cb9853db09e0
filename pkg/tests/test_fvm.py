from __future__ import annotations

import math

import numpy as np
import pytest

from fracmatder import _backend
from fracmatder.analytic import SourceSpec, wait_first_cell_averages
from fracmatder.core import Direction, FieldHistory, MeshSpec, l1_coefficients
from fracmatder.errors import ConfigError, DomainOfDependenceError
from fracmatder.fvm import (
    InitialCondition,
    SchemeVariant,
    SourceTable,
    check_domain,
    fit_mesh,
    march,
    step,
    valid_cells,
)
from fracmatder.metrics import mass_series

WF = SourceSpec.wait_first()
DIRAC = InitialCondition.dirac(0.0)


def test_zero_problem(kernels):
    mesh = MeshSpec(0.1, -5, 5, 10)
    hist = march(InitialCondition.zero(), SourceSpec.zero(), Direction.PLUS, 0.5, mesh, kernels=kernels)
    assert not hist.frames.any()


@pytest.mark.parametrize("direction", list(Direction))
def test_first_step_of_dirac(direction, kernels):
    a, h = 0.5, 0.125
    mesh = MeshSpec(h, -4, 4, 2)
    hist = march(DIRAC, SourceSpec.zero(), direction, a, mesh, kernels=kernels)
    want = np.zeros(mesh.n_cells)
    want[direction.sign - mesh.i_min] = (1 - (math.sqrt(2) - 1)) / h
    np.testing.assert_allclose(hist.frame(1), want, rtol=1e-15)


def test_step_folds_to_march(kernels):
    a = 0.4
    for variant in SchemeVariant:
        mesh = fit_mesh(2.0**-5, 1.0, DIRAC, WF, Direction.PLUS, variant)
        ref = march(DIRAC, WF, Direction.PLUS, a, mesh, variant, kernels=kernels)
        table = SourceTable(WF, mesh, a)
        coeffs = l1_coefficients(a, mesh.n_steps + 2)
        hist = FieldHistory(mesh, DIRAC.cell_averages(mesh), Direction.PLUS)
        for _ in range(mesh.n_steps):
            hist.append(step(hist, table, Direction.PLUS, variant, coeffs, kernels))
        assert np.array_equal(hist.frames, ref.frames)


@pytest.mark.parametrize("variant", list(SchemeVariant))
def test_density_is_nonnegative_and_supported(variant, kernels):
    mesh = fit_mesh(2.0**-6, 1.0, DIRAC, WF, Direction.PLUS, variant)
    hist = march(DIRAC, WF, Direction.PLUS, 0.3, mesh, variant, kernels=kernels)
    assert np.all(hist.frames >= 0)


def test_superposition():
    a, h = 0.6, 2.0**-5
    g = SourceSpec.sampled(lambda x, t: np.exp(-x * x) * np.cos(3 * t))
    ic = InitialCondition.sampled(lambda x: np.exp(-(x - 0.5) ** 2))
    mesh = fit_mesh(h, 1.0, ic, g, Direction.PLUS, extent=(-3.0, 4.0))
    both = march(ic, g, Direction.PLUS, a, mesh).frames
    only_ic = march(ic, SourceSpec.zero(), Direction.PLUS, a, mesh).frames
    only_src = march(InitialCondition.zero(), g, Direction.PLUS, a, mesh).frames
    np.testing.assert_allclose(both, only_ic + only_src, atol=1e-12)


@pytest.mark.parametrize("variant", list(SchemeVariant))
def test_mirror_symmetry(variant, kernels):
    a, h = 0.5, 2.0**-6
    jf = SourceSpec.jump_first()
    ext = (-3.0, 3.0)
    mp = fit_mesh(h, 1.0, DIRAC, jf, Direction.PLUS, variant, extent=ext)
    mm = fit_mesh(h, 1.0, DIRAC, jf.reflect(), Direction.MINUS, variant, extent=ext)
    assert (mm.i_min, mm.i_max) == (-mp.i_max, -mp.i_min)
    up = march(DIRAC, jf, Direction.PLUS, a, mp, variant, kernels=kernels).frames
    um = march(DIRAC, jf.reflect(), Direction.MINUS, a, mm, variant, kernels=kernels).frames
    assert np.array_equal(up, um[:, ::-1])


def test_domain_checks():
    h = 0.125
    small = MeshSpec(h, -1, 4, 8)
    with pytest.raises(DomainOfDependenceError):
        check_domain(DIRAC, WF, Direction.PLUS, small)
    with pytest.raises(DomainOfDependenceError):
        check_domain(InitialCondition.dirac(3.0), SourceSpec.zero(), Direction.PLUS, small)
    with pytest.raises(DomainOfDependenceError):
        InitialCondition.dirac(9.0).cell_averages(small)
    with pytest.raises(ConfigError):
        fit_mesh(h, 1.0, InitialCondition.zero(), SourceSpec.power(1.0), Direction.PLUS)
    m = fit_mesh(h, 1.0, DIRAC, WF, Direction.PLUS)
    assert (m.i_min, m.i_max) == (-1, 8)
    check_domain(DIRAC, WF, Direction.PLUS, m)


def test_valid_cells():
    m = MeshSpec(1.0, 0, 5, 3)
    np.testing.assert_array_equal(valid_cells(m, Direction.PLUS, 2), [0, 0, 1, 1, 1, 1])
    np.testing.assert_array_equal(valid_cells(m, Direction.MINUS, 2), [1, 1, 1, 1, 0, 0])


def test_step_requires_matching_skew():
    mesh = MeshSpec(0.1, -2, 2, 2)
    hist = FieldHistory(mesh, np.zeros(5), Direction.MINUS)
    table = SourceTable(SourceSpec.zero(), mesh, 0.5)
    with pytest.raises(ConfigError):
        step(hist, table, Direction.PLUS, SchemeVariant.STANDARD, l1_coefficients(0.5, 4))


def test_table_mismatch():
    mesh = MeshSpec(0.1, -2, 2, 2)
    table = SourceTable(SourceSpec.zero(), mesh, 0.5)
    with pytest.raises(ConfigError):
        march(InitialCondition.zero(), SourceSpec.zero(), Direction.PLUS, 0.4, mesh, table=table)


@pytest.mark.skipif(len(_backend.available()) < 2, reason="compiled kernels not built")
def test_backends_agree_bitwise():
    mesh = fit_mesh(2.0**-7, 1.0, DIRAC, WF, Direction.PLUS, SchemeVariant.STEP_AHEAD)
    out = [
        march(DIRAC, WF, Direction.PLUS, 0.5, mesh, SchemeVariant.STEP_AHEAD, kernels=_backend.get(n)).frames
        for n in ("python", "compiled")
    ]
    assert np.array_equal(out[0], out[1])


def test_step_ahead_mass_bounded():
    mesh = fit_mesh(2.0**-7, 1.0, DIRAC, WF, Direction.PLUS, SchemeVariant.STEP_AHEAD)
    hist = march(DIRAC, WF, Direction.PLUS, 0.5, mesh, SchemeVariant.STEP_AHEAD)
    m = mass_series(hist)
    assert m[0] == pytest.approx(1.0) and m.max() <= 1 + 1e-12
    # and the density is close to the exact cell averages
    ref = wait_first_cell_averages(mesh.cells, 1.0, mesh.h, 0.5)
    assert np.abs(hist.frame(mesh.n_steps) - ref).sum() * mesh.h < 0.2


def test_initial_condition_roundtrip():
    for ic in (InitialCondition.zero(), InitialCondition.dirac(0.25)):
        assert InitialCondition.from_dict(ic.to_dict()) == ic
    assert InitialCondition.dirac(0.25).reflect() == InitialCondition.dirac(-0.25)
