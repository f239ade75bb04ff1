import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from nstraffic import (
    DomainError,
    KineticPoint,
    ModelParams,
    SingularityError,
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
from nstraffic.grad import equilibrium_pressure


@pytest.fixture(autouse=True)
def _quiet_quad():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        yield


def quad_moment(f, k, v, center=True, upper=None):
    """Adaptive-quadrature oracle, independent of the Gauss-Laguerre rule."""
    upper = upper or 20 * v
    g = (lambda c: (c - v) ** k * f(c)) if center else (lambda c: c**k * f(c))
    val, _ = integrate.quad(g, 0, upper, points=[v], limit=400, epsabs=0, epsrel=1e-13)
    return val


class TestAggressiveness:
    def test_empty_road(self, params):
        assert aggressiveness(0.0, params) == 1.0

    def test_jam(self, params):
        assert aggressiveness(params.rho_0, params) == 1.0

    def test_peak_value(self, params):
        assert aggressiveness(params.rho_c, params) == pytest.approx(1.2, rel=1e-15)

    def test_midpoint(self, params):
        # 1 + 0.2 * (0.1/0.04) * (0.1/0.16)**4
        expected = 1.0 + 0.2 * 2.5 * 0.625**4
        assert aggressiveness(0.1, params) == pytest.approx(expected, rel=1e-14)
        assert aggressiveness(0.1, params) == pytest.approx(1.0763, abs=5e-5)

    def test_argmax_on_grid(self, params):
        rho = np.linspace(0, params.rho_0, 10_001)
        w = aggressiveness(rho, params)
        assert rho[np.argmax(w)] == pytest.approx(params.rho_c, abs=params.rho_0 / 10_000)
        assert w.max() == pytest.approx(params.w_c, rel=1e-12)
        assert np.all(w >= 1.0)

    @pytest.mark.parametrize("rho", [-1e-9, 0.2000001, np.nan])
    def test_domain(self, params, rho):
        with pytest.raises(DomainError):
            aggressiveness(rho, params)


class TestRelaxationTime:
    def test_peak(self):
        assert collective_relaxation_time(1.2, 8.0) == pytest.approx(20.0)

    def test_mid(self):
        assert collective_relaxation_time(1.0763, 8.0) == pytest.approx(52.42, abs=5e-3)

    @pytest.mark.parametrize("w", [1.0, 0.9])
    def test_singular(self, w):
        with pytest.raises(SingularityError):
            collective_relaxation_time(w, 8.0)


class TestEquilibrium:
    @pytest.mark.parametrize("alpha", [1.5, 5.0, 50.0, 125.0, 400.0])
    def test_matches_scipy_gamma(self, alpha):
        c = np.linspace(0.01, 60, 200)
        ref = 0.1 * stats.gamma.pdf(c, a=alpha, scale=20.0 / alpha)
        np.testing.assert_allclose(equilibrium_distribution(c, 0.1, 20.0, alpha), ref, rtol=1e-10, atol=1e-300)

    def test_no_overflow_large_alpha(self):
        f = equilibrium_distribution(np.array([0.0, 1e-3, 20.0, 1e4]), 0.1, 20.0, 125.0)
        assert np.all(np.isfinite(f))
        assert f[0] == 0.0

    @pytest.mark.parametrize("alpha", [5.0, 125.0])
    def test_normalization_and_mean_adaptive_quad(self, alpha):
        f = lambda c: equilibrium_distribution(c, 0.1, 20.0, alpha)
        assert quad_moment(f, 0, 20.0) == pytest.approx(0.1, rel=1e-8)
        assert quad_moment(f, 1, 20.0, center=False) == pytest.approx(0.1 * 20.0, rel=1e-8)

    def test_variance_quad(self):
        f = lambda c: equilibrium_distribution(c, 0.1, 20.0, 125.0)
        assert quad_moment(f, 2, 20.0) / 0.1 == pytest.approx(3.2, rel=1e-8)

    def test_bad_velocity(self):
        with pytest.raises(DomainError):
            equilibrium_distribution(1.0, 0.1, 0.0, 125.0)


@pytest.mark.parametrize("v,alpha,expected", [(0.0, 125, 0.0), (30.0, 125, 7.2), (20.0, 125, 3.2)])
def test_velocity_variance(v, alpha, expected):
    assert velocity_variance(v, alpha) == pytest.approx(expected, rel=1e-14)


class TestPassingFactor:
    def test_example(self):
        assert passing_factor(0.1, 20.0, 1.0763, 8.0, 125.0) == pytest.approx(0.596, abs=5e-4)

    def test_no_acceleration(self):
        assert passing_factor(0.1, 20.0, 1.0, 8.0, 125.0) == 0.0

    @given(
        rho=st.floats(1e-3, 0.2),
        v=st.floats(0.1, 40),
        w=st.floats(1.001, 2.0),
        alpha=st.floats(1.1, 500),
    )
    def test_round_trip(self, rho, v, w, alpha):
        one_minus_p = passing_factor(rho, v, w, 8.0, alpha)
        assert shape_parameter(rho, v, one_minus_p, w, 8.0) == pytest.approx(alpha, rel=1e-12)

    def test_zero_denominator(self):
        with pytest.raises(DomainError):
            passing_factor(0.0, 20.0, 1.1, 8.0, 125.0)


class TestFirstOrder:
    def test_vanishes_without_gradient(self, params):
        c = np.linspace(0, 50, 101)
        assert np.all(first_order_distribution(c, KineticPoint(0.1, 20.0, 0.0), params) == 0.0)

    def test_explicit_coefficients(self, params):
        # f1 = f0 [a0 + a1 x + a2 x^2] dv/dx with a0 = a1/2 = -a2/alpha = tau/(2(w-1))
        pt = KineticPoint(0.1, 20.0, 0.013)
        c = np.array([3.0, 19.0, 20.0, 27.5])
        w = aggressiveness(0.1, params)
        a0 = params.tau / (2 * (w - 1))
        x = c / 20.0 - 1
        ref = equilibrium_distribution(c, 0.1, 20.0, params.alpha) * (a0 + 2 * a0 * x - params.alpha * a0 * x**2) * 0.013
        np.testing.assert_allclose(first_order_distribution(c, pt, params), ref, rtol=1e-13)

    @pytest.mark.parametrize("dv_dx", [-0.02, 0.005, 0.02])
    def test_constraints_adaptive_quad(self, params, dv_dx):
        pt = KineticPoint(0.1, 20.0, dv_dx)
        f1 = lambda c: first_order_distribution(c, pt, params)
        assert abs(quad_moment(f1, 0, 20.0)) <= 1e-8 * 0.1
        assert abs(quad_moment(f1, 1, 20.0, center=False)) <= 1e-8 * 0.1 * 20.0

    def test_singular_at_jam(self, params):
        with pytest.raises(SingularityError):
            first_order_distribution(10.0, KineticPoint(params.rho_0, 1.0, 0.01), params)

    @pytest.mark.parametrize("dv_dx", [-0.03, -0.01, -1e-4, 0.0, 1e-4, 0.01])
    def test_nonnegativity_predicate_by_sampling(self, params, dv_dx):
        pt = KineticPoint(0.1, 20.0, dv_dx)
        c = np.linspace(0, 200, 400_001)
        x = c / 20.0 - 1
        g = collective_relaxation_time(aggressiveness(0.1, params), params.tau) * dv_dx
        bracket = 1 - g * (params.alpha * x**2 - 2 * x - 1)
        assert first_order_is_nonnegative(pt, params) == bool(np.all(bracket >= 0))


class TestPressureAndViscosity:
    def test_equilibrium_pressure(self, params):
        assert ce_pressure(KineticPoint(0.1, 20.0, 0.0), params) == pytest.approx(0.32, rel=1e-14)

    def test_empty(self, params):
        assert ce_pressure(KineticPoint(0.0, 20.0, 0.01), params) == 0.0

    @pytest.mark.parametrize("rho,v,dv_dx", [(0.1, 20.0, 0.01), (0.03, 28.0, -0.015), (0.15, 5.0, 0.002)])
    def test_closed_form_vs_adaptive_quad(self, params, rho, v, dv_dx):
        pt = KineticPoint(rho, v, dv_dx)
        f = lambda c: equilibrium_distribution(c, rho, v, params.alpha) + first_order_distribution(c, pt, params)
        assert quad_moment(f, 2, v) == pytest.approx(ce_pressure(pt, params), rel=1e-6)

    def test_viscosity_example(self):
        p = ModelParams()
        assert viscosity(0.1, 20.0, p) == pytest.approx(33.8, abs=0.05)
        # with w pinned to the rounded 1.0763
        mu = 2 * 0.32 * collective_relaxation_time(1.0763, 8.0) * 126 / 125
        assert mu == pytest.approx(33.8, abs=0.05)

    def test_viscosity_zero_speed(self, params):
        assert viscosity(0.1, 0.0, params) == 0.0
        assert viscosity(0.0, 10.0, params) == 0.0

    def test_viscosity_singular(self, params):
        with pytest.raises(SingularityError):
            viscosity(params.rho_0, 1.0, params)

    @settings(max_examples=200)
    @given(rho=st.floats(0.005, 0.19), v=st.floats(0.5, 30), g=st.floats(-0.02, 0.02))
    def test_deviator_is_minus_mu_gradient(self, rho, v, g):
        p = ModelParams()
        pt = KineticPoint(rho, v, g)
        dev = ce_pressure(pt, p) - equilibrium_pressure(rho, v, p.alpha)
        assert dev == pytest.approx(-viscosity(rho, v, p) * g, rel=1e-9, abs=1e-15 * rho * v * v)

    def test_vectorized(self, params):
        rho = np.array([0.0, 0.05, 0.1])
        out = ce_pressure(KineticPoint(rho, 20.0, 0.01), params)
        assert out.shape == (3,)
        assert out[0] == 0.0
        assert out[2] == ce_pressure(KineticPoint(0.1, 20.0, 0.01), params)
