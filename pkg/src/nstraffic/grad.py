"""Grad moment closure: orthonormal velocity polynomials and the
three-field (density, velocity, pressure) truncation."""
from __future__ import annotations

import numpy as np

from .kinetic import (
    _ret,
    aggressiveness,
    collective_relaxation_time,
    equilibrium_distribution,
)
from .params import GradMoments, KineticPoint, ModelParams


def equilibrium_pressure(rho, v, alpha):
    """Second central moment of the equilibrium distribution, ``rho v^2/alpha``."""
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    return _ret(rho * v * v / alpha)


def equilibrium_third_moment(rho, v, alpha):
    """Third central moment of the equilibrium distribution, ``2 rho v^3/alpha^2``."""
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    return _ret(2.0 * rho * v**3 / alpha**2)


def orthonormal_polynomials(n_max: int, alpha: float, s) -> np.ndarray:
    """All polynomials ``P_0 .. P_n_max`` orthonormal under the gamma(alpha) density.

    Uses the three-term recurrence of the generalized Laguerre polynomials
    ``L_n^(alpha-1)``, rewritten for the normalized, sign-flipped family so
    no factorials or gamma functions are formed:

        P_{k+1} = [(s - 2k - alpha) P_k - sqrt(k (k + alpha - 1)) P_{k-1}]
                  / sqrt((k + 1)(k + alpha))

    Returns:
        Array of shape ``(n_max + 1,) + np.shape(s)``.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    s = np.asarray(s, dtype=float)
    out = np.empty((n_max + 1,) + s.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = (s - alpha) / np.sqrt(alpha)
    for k in range(1, n_max):
        out[k + 1] = (
            (s - 2.0 * k - alpha) * out[k] - np.sqrt(k * (k + alpha - 1.0)) * out[k - 1]
        ) / np.sqrt((k + 1.0) * (k + alpha))
    return out


def orthonormal_polynomial(n: int, alpha: float, s):
    """Single orthonormal polynomial ``P_n(s)``; see :func:`orthonormal_polynomials`."""
    return _ret(orthonormal_polynomials(n, alpha, s)[n])


def grad_coefficients(m: GradMoments, rho, v, alpha):
    """Expansion coefficients ``(C0, C1, C2, C3)`` from the moments.

    C0 and C1 are fixed by the definitions of density and mean velocity.
    """
    p0 = equilibrium_pressure(rho, v, alpha)
    phi0 = equilibrium_third_moment(rho, v, alpha)
    dp = (np.asarray(m.pressure, dtype=float) - p0) / p0
    dphi = (np.asarray(m.third_moment, dtype=float) - phi0) / phi0
    c2 = np.sqrt(alpha / (2.0 * (alpha + 1.0))) * dp
    c3 = np.sqrt(2.0 * alpha / (3.0 * (alpha + 1.0) * (alpha + 2.0))) * (dphi - 3.0 * dp)
    return 1.0, 0.0, _ret(c2), _ret(c3)


def grad_distribution(c, rho, v, pressure, alpha):
    """Phase density truncated after the second-order polynomial.

    ``f = f0 {1 + [s^2 - 2(alpha+1)s + alpha(alpha+1)] / (2(alpha+1)) * (p - p0)/p0}``
    with ``s = alpha c / v``.
    """
    f0 = equilibrium_distribution(c, rho, v, alpha)
    s = alpha * np.asarray(c, dtype=float) / v
    p0 = equilibrium_pressure(rho, v, alpha)
    poly = s * s - 2.0 * (alpha + 1.0) * s + alpha * (alpha + 1.0)
    return _ret(f0 * (1.0 + poly / (2.0 * (alpha + 1.0)) * (pressure - p0) / p0))


def third_moment_closure(pressure, rho, v, alpha):
    """Third central moment implied by the pressure under the truncation.

    ``phi = 3 (phi0/p0)(p - 2 p0/3)``.
    """
    p0 = equilibrium_pressure(rho, v, alpha)
    phi0 = equilibrium_third_moment(rho, v, alpha)
    return _ret(3.0 * (phi0 / p0) * (np.asarray(pressure, dtype=float) - 2.0 / 3.0 * p0))


def maxwellian_iterate(
    point: KineticPoint,
    p: ModelParams,
    deviator=0.0,
    d_deviator_dt=0.0,
    d_deviator_dx=0.0,
):
    """One Maxwellian iteration of the pressure-deviator balance.

    The balance equation for ``dev = p - p0``,

        d(dev)/dt + ((alpha+4)/2)(phi0/p0) d(dev)/dx
          + 3((alpha+2)/alpha) dev dv/dx + 2 p0 ((alpha+1)/alpha) dv/dx = -dev/tau0,

    is solved for the right-hand ``dev`` with the supplied previous iterate
    (and its derivatives) inserted on the left.

    Raises:
        SingularityError: where ``w(rho) <= 1`` (empty road or jam).
    """
    a = p.alpha
    rho = np.asarray(point.rho, dtype=float)
    v = np.asarray(point.v, dtype=float)
    dv_dx = np.asarray(point.dv_dx, dtype=float)
    tau0 = collective_relaxation_time(aggressiveness(rho, p), p.tau)
    p0 = rho * v * v / a
    # phi0/p0 = 2v/alpha, written out to stay finite for small rho
    transport = ((a + 4.0) / 2.0) * (2.0 * v / a) * d_deviator_dx
    lhs = (
        d_deviator_dt
        + transport
        + 3.0 * ((a + 2.0) / a) * deviator * dv_dx
        + 2.0 * p0 * ((a + 1.0) / a) * dv_dx
    )
    return _ret(-tau0 * lhs)


def maxwellian_first_iterate(point: KineticPoint, p: ModelParams):
    """Pressure deviator after one iteration from equilibrium (deviator = 0)."""
    return maxwellian_iterate(point, p)
