"""Roe finite-volume solver on a periodic road with fractional-step sources.

One step advances the homogeneous system with Roe's flux-difference
splitting, then adds the source with a Heun-type average of its values
before and after the convective update::

    U*      = U^n - dt/dx (F_{i+1/2} - F_{i-1/2})
    U^{n+1} = U*  + dt/2 (S(U^n) + S(U*))

The scalar functions here (``roe_average_velocity`` ... ``source_discretization``)
are the readable reference; ``advance`` runs the vectorized kernels from
:mod:`nstraffic._kernels` and is cross-checked against them in the tests.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels
from .errors import DomainError, StepFailure
from .kinetic import viscosity
from .macro import (
    ConservedState,
    FluxVector,
    SourceVector,
    anticipation_coefficient,
    eigenvalues,
    eigenvectors,
    flux,
    optimal_velocity,
    source,
)
from .params import ModelParams

log = logging.getLogger(__name__)


@dataclass
class RoadField:
    """Cell averages of density and flow on a periodic ring of equal cells."""

    rho: np.ndarray
    q: np.ndarray
    dx: float

    def __post_init__(self):
        self.rho = np.ascontiguousarray(self.rho, dtype=float)
        self.q = np.ascontiguousarray(self.q, dtype=float)
        if self.rho.shape != self.q.shape or self.rho.ndim != 1:
            raise ValueError("rho and q must be 1-D arrays of equal length")
        if not self.dx > 0:
            raise ValueError("dx must be > 0")

    @property
    def n_cells(self) -> int:
        return self.rho.size

    @property
    def length(self) -> float:
        return self.n_cells * self.dx

    @property
    def x(self) -> np.ndarray:
        """Cell centres [m]."""
        return (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def v(self) -> np.ndarray:
        return self.q / self.rho

    @property
    def cells(self) -> list[ConservedState]:
        return [ConservedState(float(r), float(m)) for r, m in zip(self.rho, self.q)]

    def total_vehicles(self) -> float:
        return float(np.sum(self.rho) * self.dx)

    def copy(self) -> "RoadField":
        return RoadField(self.rho.copy(), self.q.copy(), self.dx)

    @classmethod
    def from_states(cls, cells, dx: float) -> "RoadField":
        return cls(np.array([c.rho for c in cells]), np.array([c.q for c in cells]), dx)


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping controls.

    Attributes:
        cfl: Courant number in (0, 1].
        t_end: simulated horizon [s].
        snapshot_interval: spacing of emitted snapshots [s].
        density_floor: lower density bound [veh/m]; ``None`` means
            ``1e-6 * rho_0`` of the model in use.
        viscous_limiter: cap interface viscosities at the explicit
            stability bound (see ``diffusion_limit``).
        diffusion_limit: largest admitted ``mu dt / (rho dx^2)`` per face.
        parallel: run the multi-threaded kernel build.
        backend: explicit kernel set (``numpy``, ``numba``,
            ``numba-parallel``); ``None`` picks automatically.
    """

    cfl: float = 0.9
    t_end: float = 300.0
    snapshot_interval: float = 10.0
    density_floor: float | None = None
    viscous_limiter: bool = True
    diffusion_limit: float = 0.25
    parallel: bool = False
    backend: str | None = None

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise DomainError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.t_end >= 0:
            raise DomainError(f"t_end must be >= 0, got {self.t_end}")
        if not self.snapshot_interval > 0:
            raise DomainError(f"snapshot_interval must be > 0, got {self.snapshot_interval}")
        if self.density_floor is not None and not self.density_floor > 0:
            raise DomainError(f"density_floor must be > 0, got {self.density_floor}")
        if not self.diffusion_limit > 0:
            raise DomainError(f"diffusion_limit must be > 0, got {self.diffusion_limit}")

    def floor(self, p: ModelParams) -> float:
        return self.density_floor if self.density_floor is not None else 1e-6 * p.rho_0

    def kernels(self):
        return _kernels.get_backend(self.backend, parallel=self.parallel)


class RoeDecomposition(NamedTuple):
    """Wave decomposition of an interface jump at Roe's average velocity."""

    lam: tuple[float, float]
    sigma: tuple[float, float]
    evec: tuple[np.ndarray, np.ndarray]
    v_bar: float


# ---------------------------------------------------------------------------
# scalar reference


def roe_average_velocity(left: ConservedState, right: ConservedState, density_floor: float = 0.0) -> float:
    """Square-root-density weighted velocity average.

    When both densities sit at (or below) the floor the plain arithmetic
    mean is returned.
    """
    if left.rho <= density_floor and right.rho <= density_floor:
        return 0.5 * (left.v + right.v)
    sl = math.sqrt(left.rho)
    sr = math.sqrt(right.rho)
    return (sl * left.v + sr * right.v) / (sl + sr)


def roe_decomposition(
    left: ConservedState, right: ConservedState, alpha: float, density_floor: float = 0.0
) -> RoeDecomposition:
    """Eigenvalues, wave strengths and eigenvectors of ``A(U_bar)``.

    If the average velocity is exactly zero the Jacobian is defective; the
    wave strengths are then set to zero (both speeds vanish, so the
    numerical dissipation is zero regardless).
    """
    vb = roe_average_velocity(left, right, density_floor)
    lam = eigenvalues(vb, alpha)
    evec = eigenvectors(vb, alpha)
    if vb == 0.0:
        return RoeDecomposition(lam, (0.0, 0.0), evec, vb)
    r = math.sqrt(alpha + 1.0)
    dr = right.rho - left.rho
    dq = right.q - left.q
    sig1 = -alpha / (2.0 * r) * (dq / vb - (alpha + 1.0 + r) / alpha * dr)
    sig2 = alpha / (2.0 * r) * (dq / vb - (alpha + 1.0 - r) / alpha * dr)
    return RoeDecomposition(lam, (sig1, sig2), evec, vb)


def roe_flux(left: ConservedState, right: ConservedState, alpha: float) -> FluxVector:
    """Numerical flux ``(F_L + F_R)/2 - (1/2) sum_k sigma_k |Lambda_k| e_k``."""
    fl = np.asarray(flux(left, alpha))
    fr = np.asarray(flux(right, alpha))
    dec = roe_decomposition(left, right, alpha)
    diss = sum(s * abs(lam) * e for s, lam, e in zip(dec.sigma, dec.lam, dec.evec))
    out = 0.5 * (fl + fr) - 0.5 * diss
    return FluxVector(float(out[0]), float(out[1]))


def cfl_dt(field: RoadField, cfg: SolverConfig, p: ModelParams) -> float:
    """Largest step allowed by the CFL condition at Courant number ``cfg.cfl``.

    Falls back to ``cfl * dx / v_0`` on a motionless road.
    """
    if field.n_cells == 0:
        raise ValueError("empty road")
    speed = cfg.kernels().max_wave_speed(field.rho, field.q, p.alpha)
    if speed == 0.0:
        speed = p.v_0
    return cfg.cfl * field.dx / speed


def viscous_divergence(mu, v, dx: float) -> np.ndarray:
    """Periodic conservative second difference ``(mu v_x)_x`` with face
    viscosities averaged from neighbouring cells."""
    mu = np.asarray(mu, dtype=float)
    v = np.asarray(v, dtype=float)
    mu_face = 0.5 * (mu + np.roll(mu, -1))
    grad = np.roll(v, -1) - v
    return (mu_face * grad - np.roll(mu_face * grad, 1)) / (dx * dx)


def source_discretization(field: RoadField, i: int, p: ModelParams) -> SourceVector:
    """Discrete source for cell ``i`` (periodic neighbours, no viscosity cap).

    Relaxation to the equilibrium speed, central anticipation term and a
    conservative viscous term with face viscosities averaged from the two
    adjacent cells.
    """
    n = field.n_cells
    im, ip = (i - 1) % n, (i + 1) % n
    rho, v = field.rho, field.v
    dx = field.dx
    stencil = [im, i, ip]
    mu = [float(viscosity(rho[j], v[j], p)) for j in stencil]
    viscous = float(viscous_divergence(mu, v[stencil], dx)[1])
    v_x = (v[ip] - v[im]) / (2.0 * dx)
    state = ConservedState(float(rho[i]), float(field.q[i]))
    return source(
        state,
        float(optimal_velocity(rho[i], v[i], p)),
        float(anticipation_coefficient(rho[i], v[i], p.alpha)),
        viscous,
        v_x,
        p.tau,
    )


def sonic_interfaces(field: RoadField, alpha: float) -> np.ndarray:
    """Interfaces where a characteristic speed changes sign between neighbours.

    Plain Roe splitting has no entropy fix, so these are the places where an
    expansion shock could form. Purely diagnostic.
    """
    v = field.v
    vr = np.roll(v, -1)
    lam_l = np.stack(eigenvalues(v, alpha))
    lam_r = np.stack(eigenvalues(vr, alpha))
    flips = np.any((lam_l < 0) & (lam_r > 0), axis=0)
    return np.flatnonzero(flips)


# ---------------------------------------------------------------------------
# vectorized stepping


class StepResult(NamedTuple):
    field: RoadField
    floor_mass: float
    limited_faces: int


def _params_tuple(p: ModelParams):
    return (p.alpha, p.tau, p.w_c, p.rho_c, p.rho_0, p.v_0, p.a)


def _fail_cells(*arrays):
    bad = np.zeros(arrays[0].shape, dtype=bool)
    for a in arrays:
        bad |= ~np.isfinite(a)
    return np.flatnonzero(bad)


def advance(field: RoadField, dt: float, p: ModelParams, cfg: SolverConfig | None = None) -> StepResult:
    """One fractional step; returns the new field plus bookkeeping.

    ``floor_mass`` is the number of vehicles [veh] added when lifting
    densities back to the floor; ``limited_faces`` counts viscosity caps
    applied over both source evaluations.

    Raises:
        StepFailure: on non-finite values or a negative density.
    """
    cfg = cfg or SolverConfig()
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0:
        return StepResult(field.copy(), 0.0, 0)
    k = cfg.kernels()
    floor = cfg.floor(p)
    prm = _params_tuple(p)
    dx = field.dx
    cap_scale = cfg.diffusion_limit * dx * dx / dt if cfg.viscous_limiter else math.inf
    rho, q = field.rho, field.q

    f1, f2 = k.interface_flux(rho, q, p.alpha)
    r = dt / dx
    rho_s = rho - r * (f1 - np.roll(f1, 1))
    q_s = q - r * (f2 - np.roll(f2, 1))
    bad = _fail_cells(rho_s, q_s)
    if bad.size:
        raise StepFailure("non-finite state after convective update", bad)
    negative = np.flatnonzero(rho_s < 0)
    if negative.size:
        raise StepFailure("negative density after convective update", negative)
    deficit = np.maximum(floor - rho_s, 0.0)
    floor_mass = float(np.sum(deficit) * dx)
    rho_s = np.maximum(rho_s, floor)

    s_n, lim_n = k.momentum_source(rho, q, dx, prm, cap_scale)
    s_s, lim_s = k.momentum_source(rho_s, q_s, dx, prm, cap_scale)
    q_new = q_s + 0.5 * dt * (s_n + s_s)
    bad = _fail_cells(q_new)
    if bad.size:
        raise StepFailure("non-finite flow after source update", bad)
    q_new = np.maximum(q_new, 0.0)
    return StepResult(RoadField(rho_s, q_new, dx), floor_mass, lim_n + lim_s)


def step(field: RoadField, dt: float, p: ModelParams, cfg: SolverConfig | None = None) -> RoadField:
    """Advance ``field`` by ``dt``; see :func:`advance`."""
    return advance(field, dt, p, cfg).field


# ---------------------------------------------------------------------------
# driver


@dataclass(frozen=True)
class Snapshot:
    """Immutable copy of the road state at time ``t``."""

    t: float
    x: np.ndarray
    rho: np.ndarray
    v: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        for name in ("x", "rho", "v", "q"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.x.size
        if any(getattr(self, name).shape != (n,) for name in ("rho", "v", "q")):
            raise ValueError("snapshot arrays must have equal length")

    @classmethod
    def of(cls, t: float, field: RoadField) -> "Snapshot":
        return cls(float(t), field.x, field.rho, field.v, field.q)

    def __eq__(self, other):
        if not isinstance(other, Snapshot):
            return NotImplemented
        return self.t == other.t and all(
            np.array_equal(getattr(self, n), getattr(other, n)) for n in ("x", "rho", "v", "q")
        )

    __hash__ = None


@dataclass
class RunStats:
    steps: int = 0
    t: float = 0.0
    initial_vehicles: float = 0.0
    floor_mass: float = 0.0
    max_courant: float = 0.0
    courant_violations: int = 0
    limited_faces: int = 0
    sonic_interfaces: int = 0

    def drift(self, field: RoadField) -> float:
        """Relative change in vehicle count, net of floor corrections."""
        return (field.total_vehicles() - self.initial_vehicles - self.floor_mass) / self.initial_vehicles

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class RunResult:
    field: RoadField
    stats: RunStats
    snapshots: list[Snapshot] = field(default_factory=list)


StepMonitor = Callable[[float, RoadField, float, float], None]


def run(
    field: RoadField,
    cfg: SolverConfig,
    p: ModelParams,
    sink: Callable[[Snapshot], None] | None = None,
    *,
    on_step: StepMonitor | None = None,
    keep_snapshots: bool = False,
) -> RunResult:
    """Integrate from ``t = 0`` to ``cfg.t_end``.

    Steps use :func:`cfl_dt`, shortened to land exactly on snapshot times
    ``k * snapshot_interval`` and on ``t_end``. ``sink`` receives the initial
    snapshot and one per interval boundary. ``on_step(t, field, dt, courant)``
    is called after every accepted step.

    Raises:
        StepFailure: with time and step index filled in.
    """
    floor = cfg.floor(p)
    if np.any(field.rho < floor):
        field = RoadField(np.maximum(field.rho, floor), field.q, field.dx)
    stats = RunStats(initial_vehicles=field.total_vehicles())
    result = RunResult(field, stats)

    def emit(t, f):
        snap = Snapshot.of(t, f)
        if sink is not None:
            sink(snap)
        if keep_snapshots:
            result.snapshots.append(snap)

    k = cfg.kernels()
    t = 0.0
    emit(t, field)
    n_snap = 1
    t_next = min(cfg.snapshot_interval, cfg.t_end)
    while t < cfg.t_end:
        dt_cfl = cfl_dt(field, cfg, p)
        dt = dt_cfl
        landing = t + dt >= t_next
        if landing:
            dt = t_next - t
        speed = k.max_wave_speed(field.rho, field.q, p.alpha)
        courant = dt / field.dx * speed
        try:
            res = advance(field, dt, p, cfg)
        except StepFailure as exc:
            raise StepFailure(exc.reason, exc.cells, t, stats.steps) from exc
        field = res.field
        stats.steps += 1
        stats.floor_mass += res.floor_mass
        stats.limited_faces += res.limited_faces
        stats.max_courant = max(stats.max_courant, courant)
        if courant > 1.0:
            stats.courant_violations += 1
        stats.sonic_interfaces += int(sonic_interfaces(field, p.alpha).size)
        if landing:
            t = t_next
            emit(t, field)
            n_snap += 1
            t_next = min(n_snap * cfg.snapshot_interval, cfg.t_end)
        else:
            t += dt
        if on_step is not None:
            on_step(t, field, dt, courant)
    stats.t = t
    result.field = field
    log.info(
        "run finished: t=%.3f s, %d steps, max Courant %.3f, floor mass %.3g veh",
        t, stats.steps, stats.max_courant, stats.floor_mass,
    )
    return result
