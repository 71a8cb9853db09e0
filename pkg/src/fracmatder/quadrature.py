"""Pointwise evaluation of the fractional material derivative by quadrature.

Along the characteristic through ``(x, t)`` the operator is a Riemann-Liouville
derivative of ``U(s) = u(x ∓ (t - s), s)``:

.. math::

    D^\\alpha_\\pm u(x, t) = \\frac{d}{d\\tau}\\Big|_{\\tau = t}
        \\frac{1}{\\Gamma(1-\\alpha)} \\int_0^\\tau (\\tau - s)^{-\\alpha} U(s)\\, ds.

The weakly singular integral is handled by algebraic-weight quadrature
(QUADPACK's QAWS), the outer derivative by Richardson-extrapolated central
differences.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from fracmatder.core import AlphaParam, Direction, as_alpha
from fracmatder.errors import AccuracyError, ConfigError

__all__ = [
    "matder_quadrature_oracle",
    "riemann_liouville_integral",
]

Field = Callable[[float, float], float]


def _scalar(g: Callable[[float], float]) -> Callable[[float], float]:
    return lambda s: float(g(s))


def riemann_liouville_integral(
    g: Callable[[float], float],
    tau: float,
    order: float,
    rtol: float = 1e-14,
) -> tuple[float, float]:
    """Compute ``I^order g(tau) = 1/Γ(order) ∫_0^tau (tau - s)^{order-1} g(s) ds``.

    The range is split at ``tau / 2``: the kernel singularity at ``s = tau``
    goes to the algebraic-weight rule of QUADPACK (QAWS), the left half to
    plain adaptive quadrature so that mild singularities of ``g`` at 0 do not
    spoil the result. Returns the value and the combined error estimate.
    """
    if not 0.0 < order <= 1.0:
        raise ConfigError(f"integration order must lie in (0, 1], got {order}")
    if tau < 0:
        raise ConfigError(f"tau must be non-negative, got {tau}")
    if tau == 0:
        return 0.0, 0.0
    f = _scalar(g)
    a = order - 1.0
    opts = dict(epsabs=rtol * 1e-1, epsrel=rtol, limit=400)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        left, e1 = quad(lambda s: (tau - s) ** a * f(s), 0.0, 0.5 * tau, **opts)
        right, e2 = quad(f, 0.5 * tau, tau, weight="alg", wvar=(0.0, a), **opts)
    c = 1.0 / math.gamma(order)
    return c * (left + right), c * (e1 + e2)


def _ridders(
    f: Callable[[float], float], x: float, h0: float, ntab: int = 12
) -> tuple[float, float]:
    """Richardson-extrapolated central difference (Ridders' tableau)."""
    con = 1.4
    con2 = con * con
    a = np.zeros((ntab, ntab))
    hh = h0
    a[0, 0] = (f(x + hh) - f(x - hh)) / (2.0 * hh)
    best, err = a[0, 0], math.inf
    for i in range(1, ntab):
        hh /= con
        a[0, i] = (f(x + hh) - f(x - hh)) / (2.0 * hh)
        fac = con2
        for j in range(1, i + 1):
            a[j, i] = (a[j - 1, i] * fac - a[j - 1, i - 1]) / (fac - 1.0)
            fac *= con2
            errt = max(abs(a[j, i] - a[j - 1, i]), abs(a[j, i] - a[j - 1, i - 1]))
            if errt <= err:
                err = errt
                best = a[j, i]
        if abs(a[i, i] - a[i - 1, i - 1]) >= 2.0 * err:
            break
    return float(best), float(err)


def matder_quadrature_oracle(
    u: Field,
    x: float,
    t: float,
    direction: Direction,
    alpha: float | AlphaParam,
    tol: float = 1e-8,
) -> float:
    """Evaluate :math:`D^\\alpha_\\pm u(x, t)` from the pointwise representation.

    ``u`` is called with scalars and must be defined slightly past ``t``
    along the characteristic (the derivative is centred at ``t``).
    Raises :class:`~fracmatder.errors.AccuracyError` when the extrapolated
    error estimate exceeds ``tol`` (absolute, relative for values above 1).
    """
    a = as_alpha(alpha)
    if not t > 0:
        raise ConfigError(f"the oracle needs t > 0, got {t}")
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    s = direction.sign

    def U(sv: float) -> float:
        return u(x - s * (t - sv), sv)

    def phi(tau: float) -> float:
        return riemann_liouville_integral(U, tau, 1.0 - a.alpha)[0]

    # Ridders starts coarse and shrinks; Φ is smooth on (0, 2t) only
    h0 = min(0.5 * t, 0.1 * max(1.0, t))
    value, err = _ridders(phi, t, h0)
    if not err <= tol * max(1.0, abs(value)):
        raise AccuracyError("characteristic derivative did not converge", err)
    return value
