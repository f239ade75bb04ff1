"""Navier-Stokes-like second-order traffic model from kinetic theory.

Closures of the kinetic equation for aggressive drivers (Chapman-Enskog and
Grad), the resulting conservative continuum model, and a Roe finite-volume
solver for the blockade-removal scenario.
"""
from .errors import (
    ConfigError,
    DegenerateStateError,
    DomainError,
    QuadratureError,
    SingularityError,
    StepFailure,
    TrafficModelError,
)
from .params import GradMoments, KineticPoint, ModelParams
from .kinetic import (
    aggressiveness,
    ce_pressure,
    collective_relaxation_time,
    equilibrium_distribution,
    first_order_distribution,
    first_order_is_nonnegative,
    passing_factor,
    shape_parameter,
    velocity_variance,
    viscosity,
)
from .grad import (
    equilibrium_pressure,
    equilibrium_third_moment,
    grad_coefficients,
    grad_distribution,
    maxwellian_first_iterate,
    maxwellian_iterate,
    orthonormal_polynomial,
    orthonormal_polynomials,
    third_moment_closure,
)
from .quadrature import moment_quadrature
from .macro import (
    ConservedState,
    FluxVector,
    SourceVector,
    anticipation_coefficient,
    eigenvalues,
    eigenvectors,
    equilibrium_speed,
    flux,
    jacobian,
    kinetic_optimal_velocity,
    optimal_velocity,
    sound_speed,
    source,
)
from .roe import (
    RoadField,
    RoeDecomposition,
    RunResult,
    RunStats,
    Snapshot,
    SolverConfig,
    advance,
    cfl_dt,
    roe_average_velocity,
    roe_decomposition,
    roe_flux,
    run,
    sonic_interfaces,
    source_discretization,
    step,
)

__version__ = "0.1.0"
