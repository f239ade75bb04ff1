"""Chapman-Enskog closure of the kinetic traffic equation.

All functions accept scalars or numpy arrays and broadcast their arguments.
Scalar inputs give Python floats back.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import DomainError, SingularityError
from .params import KineticPoint, ModelParams


def _ret(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def aggressiveness(rho, p: ModelParams):
    """Density-dependent aggressiveness ``w(rho)``.

    Equals 1 in empty and fully jammed traffic and peaks at ``p.w_c`` for
    ``rho = p.rho_c``.

    Raises:
        DomainError: if any density lies outside ``[0, rho_0]``.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho > p.rho_0) or np.any(np.isnan(rho)):
        raise DomainError(f"density outside [0, {p.rho_0}]")
    exponent = (p.rho_0 - p.rho_c) / p.rho_c
    w = 1.0 + (p.w_c - 1.0) * (rho / p.rho_c) * ((p.rho_0 - rho) / (p.rho_0 - p.rho_c)) ** exponent
    return _ret(w)


def collective_relaxation_time(w, tau):
    """Collective relaxation time ``tau / (2 (w - 1))``.

    Raises:
        SingularityError: if ``w <= 1`` anywhere.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w <= 1.0):
        raise SingularityError("collective relaxation time diverges for w <= 1")
    return _ret(tau / (2.0 * (w - 1.0)))


def equilibrium_distribution(c, rho, v, alpha):
    """Zeroth-order (gamma) phase density ``f0(c)`` with mean ``v``, shape ``alpha``.

    Evaluated through log-gamma so that large shape parameters (alpha ~ 1e2)
    neither overflow nor underflow prematurely.
    """
    c = np.asarray(c, dtype=float)
    v = np.asarray(v, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(v <= 0):
        raise DomainError("mean velocity must be > 0")
    if np.any(c < 0):
        raise DomainError("velocities must be >= 0")
    s = alpha * c / v
    log_f = np.log(alpha) - gammaln(alpha) - np.log(v) + xlogy(alpha - 1.0, s) - s
    return _ret(rho * np.exp(log_f))


def velocity_variance(v, alpha):
    """Velocity variance of the equilibrium distribution, ``v**2 / alpha``."""
    v = np.asarray(v, dtype=float)
    return _ret(v * v / alpha)


def passing_factor(rho, v, w, tau, alpha):
    """Interaction factor ``1 - p`` implied by a constant shape parameter.

    Inverts ``alpha = rho (1 - p) v tau / (w - 1)``.
    """
    denom = np.asarray(rho, dtype=float) * np.asarray(v, dtype=float) * tau
    if np.any(denom == 0):
        raise DomainError("rho * v * tau must be non-zero")
    return _ret(alpha * (np.asarray(w, dtype=float) - 1.0) / denom)


def shape_parameter(rho, v, one_minus_p, w, tau):
    """Shape parameter from density, speed, interaction factor and aggressiveness."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 1.0):
        raise SingularityError("shape parameter diverges for w <= 1")
    return _ret(np.asarray(rho) * np.asarray(one_minus_p) * np.asarray(v) * tau / (w - 1.0))


def _gradient_prefactor(point: KineticPoint, p: ModelParams):
    w = aggressiveness(point.rho, p)
    return collective_relaxation_time(w, p.tau)


def first_order_distribution(c, point: KineticPoint, p: ModelParams):
    """First Chapman-Enskog correction ``f1(c)`` driven by the velocity gradient.

    ``f1 = -(f0/2) tau/(w-1) [alpha x^2 - 2x - 1] dv/dx`` with ``x = c/v - 1``.
    No clipping is applied; see :func:`first_order_is_nonnegative`.
    """
    tau0 = _gradient_prefactor(point, p)
    f0 = equilibrium_distribution(c, point.rho, point.v, p.alpha)
    x = np.asarray(c, dtype=float) / point.v - 1.0
    bracket = p.alpha * x * x - 2.0 * x - 1.0
    return _ret(-f0 * tau0 * bracket * point.dv_dx)


def first_order_is_nonnegative(point: KineticPoint, p: ModelParams):
    """Whether ``f0 + f1 >= 0`` for every velocity ``c >= 0``.

    ``f0 + f1 = f0 [1 - g (alpha x^2 - 2x - 1)]`` with ``g = tau0 dv/dx`` and
    ``x = c/v - 1 >= -1``. For ``g > 0`` the bracket always turns negative in
    the high-velocity tail; for ``g < 0`` it does so once ``|g|`` exceeds
    ``alpha / (alpha + 1)`` (the quadratic's minimum is at ``x = 1/alpha``).
    """
    g = np.asarray(_gradient_prefactor(point, p) * np.asarray(point.dv_dx, dtype=float))
    a = p.alpha
    ok = np.where(g > 0, False, 1.0 + g * (1.0 + 1.0 / a) >= 0.0)
    ok = np.where(g == 0, True, ok)
    return bool(ok) if ok.ndim == 0 else ok


def ce_pressure(point: KineticPoint, p: ModelParams):
    """Traffic pressure to first order in the velocity gradient.

    ``rho v^2/alpha - 2 (rho v^2/alpha) tau0 ((alpha+1)/alpha) dv/dx``;
    zero where the density vanishes.
    """
    rho = np.asarray(point.rho, dtype=float)
    v = np.asarray(point.v, dtype=float)
    dv_dx = np.asarray(point.dv_dx, dtype=float)
    rho, v, dv_dx = np.broadcast_arrays(rho, v, dv_dx)
    occupied = rho > 0
    out = np.zeros(rho.shape)
    if np.any(occupied):
        r, vv, g = rho[occupied], v[occupied], dv_dx[occupied]
        tau0 = collective_relaxation_time(aggressiveness(r, p), p.tau)
        p0 = r * vv * vv / p.alpha
        out[occupied] = p0 - 2.0 * p0 * tau0 * ((p.alpha + 1.0) / p.alpha) * g
    return _ret(out)


def viscosity(rho, v, p: ModelParams):
    """Traffic viscosity ``mu = 2 (rho v^2/alpha) tau0 (alpha+1)/alpha``.

    Zero for an empty road.

    Raises:
        SingularityError: where ``rho > 0`` but ``w(rho) <= 1`` (jam density).
    """
    rho, v = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(v, dtype=float))
    if np.any(v < 0):
        raise DomainError("v must be >= 0")
    occupied = rho > 0
    out = np.zeros(rho.shape)
    if np.any(occupied):
        r, vv = rho[occupied], v[occupied]
        tau0 = collective_relaxation_time(aggressiveness(r, p), p.tau)
        out[occupied] = 2.0 * (r * vv * vv / p.alpha) * tau0 * ((p.alpha + 1.0) / p.alpha)
    return _ret(out)
