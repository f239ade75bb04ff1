"""Self-check suites run by ``nstraffic validate``.

Each suite compares a closed-form result with an independent numerical
route (quadrature, finite differences, linear algebra) and reports the
worst deviation found.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import TrafficModelError
from .grad import (
    equilibrium_pressure,
    equilibrium_third_moment,
    maxwellian_first_iterate,
    orthonormal_polynomials,
)
from .kinetic import ce_pressure, equilibrium_distribution, first_order_distribution
from .macro import ConservedState, flux, jacobian
from .params import KineticPoint, ModelParams
from .quadrature import gamma_rule, moment_quadrature
from .roe import roe_decomposition, roe_flux


@dataclass
class SuiteResult:
    suite: str
    passed: bool
    max_error: float
    tolerance: float
    details: dict = field(default_factory=dict)

    def as_dict(self):
        d = asdict(self)
        if not math.isfinite(d["max_error"]):
            d["max_error"] = str(d["max_error"])
        return d


def orthonormality_suite(p: ModelParams, n_max: int = 5, alphas=None) -> SuiteResult:
    tol = 1e-10
    alphas = tuple(alphas) if alphas is not None else tuple(sorted({5.0, p.alpha}))
    worst = 0.0
    per_alpha = {}
    for a in alphas:
        s, w, _ = gamma_rule(64, float(a))
        P = orthonormal_polynomials(n_max, a, s)
        gram = (P * w) @ P.T
        err = float(np.max(np.abs(gram - np.eye(n_max + 1))))
        per_alpha[str(a)] = err
        worst = max(worst, err)
    return SuiteResult("orthonormality", worst <= tol, worst, tol, {"per_alpha": per_alpha})


def moment_suite(p: ModelParams, rho: float = 0.1, v: float = 20.0, dv_dx: float = 0.01) -> SuiteResult:
    tol0, tol1 = 1e-8, 1e-6
    worst = 0.0
    details = {}
    for a in sorted({5.0, 50.0, p.alpha}):
        f0 = lambda c, a=a: equilibrium_distribution(c, rho, v, a)  # noqa: E731
        expected = {
            0: rho,
            1: rho * v,
            2: equilibrium_pressure(rho, v, a),
            3: equilibrium_third_moment(rho, v, a),
        }
        for k, ref in expected.items():
            got = moment_quadrature(f0, k, rho, v, a, central=k != 1)
            err = abs(got - ref) / abs(ref)
            details[f"f0_m{k}_alpha{a:g}"] = err
            worst = max(worst, err / tol0)
    point = KineticPoint(rho, v, dv_dx)
    f1 = lambda c: first_order_distribution(c, point, p)  # noqa: E731
    m0 = abs(moment_quadrature(f1, 0, rho, v, p.alpha)) / rho
    m1 = abs(moment_quadrature(f1, 1, rho, v, p.alpha, central=False)) / (rho * v)
    details["f1_m0"] = m0
    details["f1_m1"] = m1
    worst = max(worst, m0 / tol0, m1 / tol0)
    both = lambda c: equilibrium_distribution(c, rho, v, p.alpha) + f1(c)  # noqa: E731
    m2 = moment_quadrature(both, 2, rho, v, p.alpha)
    ref = ce_pressure(point, p)
    e2 = abs(m2 - ref) / abs(ref)
    details["pressure"] = e2
    worst = max(worst, e2 / tol1)
    # normalized so 1.0 is the pass threshold across mixed tolerances
    return SuiteResult("moments", worst <= 1.0, worst, 1.0, details)


def ce_grad_grid(n_rho=25, n_v=20, n_g=21):
    rho = np.linspace(0.005, 0.19, n_rho)
    v = np.linspace(0.5, 30.0, n_v)
    g = np.linspace(-0.02, 0.02, n_g)
    return np.meshgrid(rho, v, g, indexing="ij")


def ce_grad_deviation(p: ModelParams, grid=None) -> float:
    """Worst relative gap between the Grad first iterate and the CE deviator."""
    R, V, G = grid if grid is not None else ce_grad_grid()
    point = KineticPoint(R.ravel(), V.ravel(), G.ravel())
    grad_dev = maxwellian_first_iterate(point, p)
    ce_dev = ce_pressure(point, p) - equilibrium_pressure(point.rho, point.v, p.alpha)
    scale = np.maximum(np.abs(grad_dev), np.abs(ce_dev))
    diff = np.abs(grad_dev - ce_dev)
    rel = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), diff)
    return float(rel.max())


def ce_grad_suite(p: ModelParams) -> SuiteResult:
    tol = 1e-12
    grid = ce_grad_grid()
    worst = ce_grad_deviation(p, grid)
    return SuiteResult("ce-grad", worst <= tol, worst, tol, {"points": int(grid[0].size)})


def random_states(rng, n, rho_range=(0.005, 0.2), v_range=(0.5, 30.0)):
    rho = rng.uniform(*rho_range, size=n)
    v = rng.uniform(*v_range, size=n)
    return [ConservedState.from_velocity(r, u) for r, u in zip(rho, v)]


def roe_property_errors(p: ModelParams, n_pairs: int = 1000, seed: int = 7) -> dict:
    rng = np.random.default_rng(seed)
    lefts = random_states(rng, n_pairs)
    rights = random_states(rng, n_pairs)
    shock = recon = consist = 0.0
    for L, R in zip(lefts, rights):
        dec = roe_decomposition(L, R, p.alpha)
        dU = R.as_array() - L.as_array()
        dF = np.asarray(flux(R, p.alpha)) - np.asarray(flux(L, p.alpha))
        A = jacobian(ConservedState.from_velocity(1.0, dec.v_bar), p.alpha)
        shock = max(shock, np.linalg.norm(dF - A @ dU) / np.linalg.norm(dF))
        rebuilt = dec.sigma[0] * dec.evec[0] + dec.sigma[1] * dec.evec[1]
        recon = max(recon, np.linalg.norm(rebuilt - dU) / np.linalg.norm(dU))
        same = np.asarray(roe_flux(L, L, p.alpha)) - np.asarray(flux(L, p.alpha))
        consist = max(consist, np.linalg.norm(same) / np.linalg.norm(np.asarray(flux(L, p.alpha))))
    return {"shock_capturing": float(shock), "reconstruction": float(recon), "consistency": float(consist)}


def roe_suite(p: ModelParams) -> SuiteResult:
    tol = 1e-12
    errs = roe_property_errors(p)
    worst = max(errs.values())
    return SuiteResult("roe", worst <= tol, worst, tol, errs)


SUITES = {
    "orthonormality": orthonormality_suite,
    "moments": moment_suite,
    "ce-grad": ce_grad_suite,
    "roe": roe_suite,
}


def validate(suite: str | None = None, params: ModelParams | dict | None = None) -> list[SuiteResult]:
    """Run one suite (or all) and return their results.

    ``params`` may be a dict of :class:`ModelParams` overrides; invalid
    values produce a failed ``parameters`` record instead of an exception.
    """
    if isinstance(params, dict) or params is None:
        try:
            params = ModelParams(**(params or {}))
        except TrafficModelError as exc:
            return [SuiteResult("parameters", False, math.inf, 0.0, {"error": str(exc)})]
    names = list(SUITES) if suite in (None, "all") else [suite]
    results = []
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
        try:
            results.append(SUITES[name](params))
        except TrafficModelError as exc:
            results.append(SuiteResult(name, False, math.inf, 0.0, {"error": str(exc)}))
    return results
