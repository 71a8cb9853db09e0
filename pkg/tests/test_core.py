from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracmatder.core import (
    AlphaParam,
    Direction,
    FieldHistory,
    MeshSpec,
    cell_index,
    discrete_matder,
    l1_coefficients,
    special_beta,
    special_gamma,
)
from fracmatder.errors import ConfigError, DomainOfDependenceError

alphas = st.floats(min_value=1e-3, max_value=1 - 1e-3)


# {{{ parameters and mesh


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.5, 1.5, math.nan, math.inf])
def test_alpha_rejects_closed_interval(bad):
    with pytest.raises(ConfigError):
        AlphaParam(bad)


def test_direction_parse():
    assert Direction.parse("plus") is Direction.PLUS
    assert Direction.parse("-") is Direction.MINUS
    assert Direction.PLUS.sign == 1 and Direction.MINUS.sign == -1
    with pytest.raises(ConfigError):
        Direction.parse("up")


def test_cell_index_half_open():
    h = 0.25
    # cell i is ((i - 1/2) h, (i + 1/2) h]
    assert cell_index(0.125, h) == 0
    assert cell_index(0.12500001, h) == 1
    assert cell_index(-0.125, h) == -1
    assert cell_index(0.0, h) == 0
    np.testing.assert_array_equal(cell_index(np.array([0.3, -0.3]), h), [1, -1])


def test_mesh():
    m = MeshSpec.from_horizon(0.25, 1.0, -2, 3)
    assert m.n_steps == 4 and m.n_cells == 6 and m.T == 1.0
    np.testing.assert_array_equal(m.cells, np.arange(-2, 4))
    assert m.contains(3) and not m.contains(4)
    with pytest.raises(ConfigError):
        MeshSpec.from_horizon(0.3, 1.0, 0, 1)
    with pytest.raises(ConfigError):
        MeshSpec(0.1, 2, 1, 3)


# }}}


# {{{ special functions


@given(st.floats(min_value=0.05, max_value=20.0))
def test_gamma_matches_mpmath(z):
    assert special_gamma(z) == pytest.approx(float(mpmath.gamma(z)), rel=1e-13)


@given(st.floats(min_value=0.05, max_value=10.0), st.floats(min_value=0.05, max_value=10.0))
def test_beta_matches_mpmath(a, b):
    assert special_beta(a, b) == pytest.approx(float(mpmath.beta(a, b)), rel=1e-12)


# }}}


# {{{ L1 coefficients


def test_b2():
    c = l1_coefficients(0.5, 4)
    assert c[1] == 1.0
    assert c[2] == pytest.approx(math.sqrt(2) - 1, rel=1e-15)


@settings(max_examples=50)
@given(alphas, st.integers(min_value=2, max_value=4000))
def test_coefficient_identities(alpha, K):
    c = l1_coefficients(alpha, K)
    b = c.b
    # decreasing, positive, telescoping sum, mean value lower bound
    assert np.all(b > 0)
    assert np.all(np.diff(b) <= 0)
    assert math.fsum(b) == pytest.approx(K ** (1 - alpha), rel=1e-12)
    k = np.arange(1, K + 1)
    assert np.all(b >= (1 - alpha) * k ** (-alpha) * (1 - 1e-12))


def test_coefficients_match_mpmath_at_large_k():
    a = 0.3
    c = l1_coefficients(a, 10**6)
    for k in (10, 1000, 10**6):
        exact = mpmath.mpf(k) ** (1 - a) - mpmath.mpf(k - 1) ** (1 - a)
        assert c[k] == pytest.approx(float(exact), rel=1e-14)


def test_weights_order():
    c = l1_coefficients(0.4, 8)
    w = c.weights(3)
    # j = 0..2 gets b_{3-j} - b_{4-j}
    np.testing.assert_allclose(w, [c[3] - c[4], c[2] - c[3], c[1] - c[2]])
    with pytest.raises(IndexError):
        c.weights(8)


# }}}


# {{{ history


def test_history_frames_and_skew():
    mesh = MeshSpec(1.0, 0, 4, 3)
    for skew in Direction:
        hist = FieldHistory(mesh, np.arange(5.0), skew=skew)
        hist.append(np.arange(5.0) + 10)
        np.testing.assert_array_equal(hist.frame(1), np.arange(5.0) + 10)
        assert hist.value(0, 4) == 4.0
        with pytest.raises(ValueError):
            hist.frame(1)[0] = 1.0
        with pytest.raises(DomainOfDependenceError):
            hist.value(0, 5)
        block = hist.characteristic_block(2)
        s = skew.sign
        # row j is u^j on the characteristic through cell i at level 2
        for k, i in enumerate(mesh.cells):
            for j in range(2):
                src = i - s * (2 - j)
                want = hist.value(j, src) if mesh.contains(src) else 0.0
                assert block[j, k] == want


def test_history_rejects_bad_frames():
    mesh = MeshSpec(1.0, 0, 2, 1)
    hist = FieldHistory(mesh, np.zeros(3))
    with pytest.raises(ConfigError):
        hist.append(np.zeros(4))
    with pytest.raises(FloatingPointError):
        hist.append(np.array([0.0, np.nan, 0.0]))
    hist.append(np.zeros(3))
    with pytest.raises(ConfigError):
        hist.append(np.zeros(3))


# }}}


# {{{ discrete operator


def _const_history(mesh, direction, value):
    return FieldHistory.from_frames(mesh, [np.zeros(mesh.n_cells), np.full(mesh.n_cells, value)], direction)


def test_discrete_matder_first_level():
    # u^0 = 0, u^1 = 1: D = h^{-α}/Γ(2-α)
    a, h = 0.5, 0.1
    mesh = MeshSpec(h, -3, 3, 1)
    for d in Direction:
        hist = _const_history(mesh, d, 1.0)
        got = discrete_matder(hist, 0, 1, d, a)
        assert got == pytest.approx(h**-a / math.gamma(2 - a), rel=1e-14)


def test_discrete_matder_mirror():
    rng = np.random.default_rng(3)
    mesh = MeshSpec(0.1, -6, 6, 4)
    frames = rng.normal(size=(5, mesh.n_cells))
    hp = FieldHistory.from_frames(mesh, frames, Direction.PLUS)
    hm = FieldHistory.from_frames(mesh, frames[:, ::-1], Direction.MINUS)
    for i in range(-1, 2):
        assert discrete_matder(hp, i, 4, Direction.PLUS, 0.3) == pytest.approx(
            discrete_matder(hm, -i, 4, Direction.MINUS, 0.3), rel=1e-13
        )


def test_discrete_matder_domain_error():
    mesh = MeshSpec(0.1, 0, 4, 3)
    hist = FieldHistory.from_frames(mesh, np.zeros((4, 5)), Direction.PLUS)
    with pytest.raises(DomainOfDependenceError) as exc:
        discrete_matder(hist, 2, 3, Direction.PLUS, 0.5)
    assert exc.value.index == -2
    with pytest.raises(ConfigError):
        discrete_matder(hist, 2, 0, Direction.PLUS, 0.5)


# }}}
