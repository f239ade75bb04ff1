"""Conservative Navier-Stokes-like traffic system ``U_t + F(U)_x = S(U)``.

``U = (rho, q)`` with ``q = rho v``; ``F = (q, rho v^2 + rho c^2)`` with the
sound speed ``c = v / sqrt(alpha)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateStateError, DomainError
from .kinetic import _ret, aggressiveness, passing_factor
from .params import ModelParams


@dataclass(frozen=True)
class ConservedState:
    """Cell state: density [veh/m] and flow ``q = rho v`` [veh/s]."""

    rho: float
    q: float

    @property
    def v(self) -> float:
        return self.q / self.rho

    @classmethod
    def from_velocity(cls, rho: float, v: float) -> "ConservedState":
        return cls(rho, rho * v)

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.q])


class FluxVector(NamedTuple):
    f1: float
    f2: float


class SourceVector(NamedTuple):
    s1: float
    s2: float


def _check(U: ConservedState, density_floor: float):
    if not U.rho > 0 or U.rho < density_floor:
        raise DegenerateStateError(f"density {U.rho} below floor {density_floor}")


def sound_speed(v, alpha):
    """Traffic sound speed ``sqrt(d p0 / d rho) = v / sqrt(alpha)``."""
    return _ret(np.asarray(v, dtype=float) / np.sqrt(alpha))


def equilibrium_speed(rho, p: ModelParams):
    """Equilibrium speed-density curve ``(v_0/2)(tanh(rho_0/rho - a) + tanh(a))``."""
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise DomainError("equilibrium speed needs rho > 0; apply the density floor first")
    return _ret(0.5 * p.v_0 * (np.tanh(p.rho_0 / rho - p.a) + np.tanh(p.a)))


def optimal_velocity(rho, v, p: ModelParams):
    """Optimal velocity driving the relaxation term.

    Relaxation is towards the equilibrium speed-density curve, so the
    result does not depend on ``v``.
    """
    del v
    return equilibrium_speed(rho, p)


def kinetic_optimal_velocity(rho, v, p: ModelParams):
    """Diagnostic only: ``w v - tau (1 - p) p0`` with ``1 - p`` from a constant alpha.

    Never used by the solver. With the shape parameter held fixed this
    reduces to ``v`` identically.
    """
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    w = aggressiveness(rho, p)
    one_minus_p = passing_factor(rho, v, w, p.tau, p.alpha)
    return _ret(w * v - p.tau * one_minus_p * rho * v * v / p.alpha)


def anticipation_coefficient(rho, v, alpha):
    """``b = -((alpha-1)/2) d p0/d v = -(alpha-1) rho v / alpha`` (never positive)."""
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    return _ret(-(alpha - 1.0) * rho * v / alpha)


def flux(U: ConservedState, alpha: float, density_floor: float = 0.0) -> FluxVector:
    """Physical flux ``(q, ((alpha+1)/alpha) q^2/rho)``."""
    _check(U, density_floor)
    return FluxVector(U.q, (alpha + 1.0) / alpha * U.q * U.q / U.rho)


def jacobian(U: ConservedState, alpha: float, density_floor: float = 0.0) -> np.ndarray:
    """Flux Jacobian ``dF/dU``."""
    _check(U, density_floor)
    k = (alpha + 1.0) / alpha
    v = U.v
    return np.array([[0.0, 1.0], [-k * v * v, 2.0 * k * v]])


def eigenvalues(v, alpha):
    """Characteristic speeds ``((alpha + 1 -/+ sqrt(alpha + 1))/alpha) v``."""
    v = np.asarray(v, dtype=float)
    r = np.sqrt(alpha + 1.0)
    return _ret((alpha + 1.0 - r) / alpha * v), _ret((alpha + 1.0 + r) / alpha * v)


def eigenvectors(v, alpha) -> tuple[np.ndarray, np.ndarray]:
    """Right eigenvectors ``(1, Lambda_k)`` of the flux Jacobian."""
    lam1, lam2 = eigenvalues(v, alpha)
    return np.array([1.0, lam1]), np.array([1.0, lam2])


def source(U: ConservedState, u_opt, b, mu_vx_div, v_x, tau) -> SourceVector:
    """Source vector ``(0, rho (u - v)/tau - b v_x + (mu v_x)_x)``.

    ``mu_vx_div`` is the already-discretized viscous term ``(mu v_x)_x``.
    """
    return SourceVector(0.0, U.rho * (u_opt - U.v) / tau - b * v_x + mu_vx_div)
