from __future__ import annotations

import math

import numpy as np
import pytest

from fracmatder.core import Direction
from fracmatder.errors import ConfigError
from fracmatder.quadrature import matder_quadrature_oracle, riemann_liouville_integral


@pytest.mark.parametrize("order", [0.1, 0.5, 0.9])
def test_rl_integral_of_power(order):
    # I^ν s^p at τ = Γ(p+1)/Γ(p+1+ν) τ^{p+ν}
    p, tau = 1.7, 1.3
    val, err = riemann_liouville_integral(lambda s: s**p, tau, order)
    exact = math.gamma(p + 1) / math.gamma(p + 1 + order) * tau ** (p + order)
    assert val == pytest.approx(exact, rel=1e-12)
    assert err < 1e-10


@pytest.mark.parametrize("alpha", [0.001, 0.25, 0.5, 0.75, 0.999])
@pytest.mark.parametrize("direction", list(Direction))
def test_traveling_wave(alpha, direction):
    # u = U(x ∓ t) is constant along characteristics: D^α u = t^{-α}/Γ(1-α) U(x ∓ t)
    U = lambda z: math.exp(-(z**2)) + 0.3 * z
    s = direction.sign
    x, t = 0.7, 1.3
    got = matder_quadrature_oracle(lambda x, t: U(x - s * t), x, t, direction, alpha)
    assert got == pytest.approx(t ** (-alpha) / math.gamma(1 - alpha) * U(x - s * t), rel=1e-9)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_power_in_time(alpha):
    # D^α t^{α+2} = Γ(α+3)/2 t^2
    got = matder_quadrature_oracle(lambda x, t: t ** (alpha + 2), 0.0, 1.0, Direction.PLUS, alpha)
    assert got == pytest.approx(math.gamma(alpha + 3) / 2, rel=1e-9)


def test_half_order_value():
    got = matder_quadrature_oracle(lambda x, t: t**2.5, 0.0, 1.0, Direction.PLUS, 0.5)
    assert got == pytest.approx(1.6616755, abs=1e-7)


def test_zero_and_validation():
    assert matder_quadrature_oracle(lambda x, t: 0.0, 0.3, 1.0, Direction.MINUS, 0.4) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ConfigError):
        matder_quadrature_oracle(lambda x, t: t, 0.0, 0.0, Direction.PLUS, 0.5)
    with pytest.raises(ConfigError):
        matder_quadrature_oracle(lambda x, t: t, 0.0, 1.0, Direction.PLUS, 0.5, tol=0.0)


def test_continuous_in_alpha():
    u = lambda x, t: (x - t) ** 2 * t + t**3
    vals = [matder_quadrature_oracle(u, 0.4, 1.0, Direction.PLUS, a) for a in np.linspace(0.3, 0.32, 3)]
    assert abs(vals[1] - vals[0]) < 0.02 * abs(vals[0])
    assert abs(vals[2] - vals[1]) < 0.02 * abs(vals[1])
