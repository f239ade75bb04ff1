"""Model parameters and small value types shared across modules."""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the kinetic / continuum traffic model (SI units).

    Defaults are the blockade-removal values (alpha, tau, rho_0, v_0, a) and
    the aggressiveness curve with rho_c / rho_0 = 0.2, w_c = 1.2.

    Attributes:
        alpha: shape parameter of the gamma-distributed velocities (> 1).
        tau: individual relaxation time [s].
        w_c: peak aggressiveness, reached at ``rho_c`` (> 1).
        rho_c: critical density [veh/m].
        rho_0: jam density [veh/m].
        v_0: free-flow speed [m/s].
        a: offset of the equilibrium speed-density curve (dimensionless).
    """

    alpha: float = 125.0
    tau: float = 8.0
    w_c: float = 1.2
    rho_c: float = 0.04
    rho_0: float = 0.2
    v_0: float = 30.0
    a: float = 3.9

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise DomainError(f"{f.name} must be a number, got {value!r}") from None
            object.__setattr__(self, f.name, value)
        if not self.alpha > 1:
            raise DomainError(f"alpha must be > 1, got {self.alpha}")
        if not self.tau > 0:
            raise DomainError(f"tau must be > 0, got {self.tau}")
        if not self.w_c > 1:
            raise DomainError(f"w_c must be > 1, got {self.w_c}")
        if not 0 < self.rho_c < self.rho_0:
            raise DomainError(
                f"need 0 < rho_c < rho_0, got rho_c={self.rho_c}, rho_0={self.rho_0}"
            )
        if not self.v_0 > 0:
            raise DomainError(f"v_0 must be > 0, got {self.v_0}")
        if not self.a > 0:
            raise DomainError(f"a must be > 0, got {self.a}")


@dataclass(frozen=True)
class KineticPoint:
    """Local macroscopic state: density, mean velocity and its gradient.

    Fields may be scalars or broadcast-compatible arrays.
    """

    rho: float | np.ndarray
    v: float | np.ndarray
    dv_dx: float | np.ndarray = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.rho) < 0):
            raise DomainError("rho must be >= 0")
        if np.any(np.asarray(self.v) < 0):
            raise DomainError("v must be >= 0")


@dataclass(frozen=True)
class GradMoments:
    """Second (traffic pressure) and third central velocity moments."""

    pressure: float
    third_moment: float
