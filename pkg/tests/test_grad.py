import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import eval_genlaguerre, gammaln

from nstraffic import (
    GradMoments,
    SingularityError,
    KineticPoint,
    ModelParams,
    ce_pressure,
    equilibrium_distribution,
    equilibrium_pressure,
    equilibrium_third_moment,
    grad_coefficients,
    grad_distribution,
    maxwellian_first_iterate,
    maxwellian_iterate,
    orthonormal_polynomial,
    orthonormal_polynomials,
    third_moment_closure,
    viscosity,
)
from nstraffic.quadrature import gamma_rule


def laguerre_oracle(n, alpha, s):
    # sign-flipped, normalized L_n^(alpha-1)
    norm = np.exp(0.5 * (gammaln(n + 1) + gammaln(alpha) - gammaln(n + alpha)))
    return (-1) ** n * norm * eval_genlaguerre(n, alpha - 1, s)


def central_moments(f, v, kmax=3):
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for k in range(kmax + 1):
            g = (lambda c, k=k: c * f(c)) if k == 1 else (lambda c, k=k: (c - v) ** k * f(c))
            out.append(integrate.quad(g, 0, 20 * v, points=[v], limit=400, epsabs=0, epsrel=1e-12)[0])
    return out


def test_equilibrium_moments():
    assert equilibrium_pressure(0.1, 20.0, 125.0) == pytest.approx(0.32)
    assert equilibrium_third_moment(0.1, 20.0, 125.0) == pytest.approx(0.1024)


class TestPolynomials:
    def test_low_orders_explicit(self):
        a = 7.3
        s = np.linspace(0, 30, 13)
        P = orthonormal_polynomials(2, a, s)
        np.testing.assert_array_equal(P[0], 1.0)
        np.testing.assert_allclose(P[1], (s - a) / np.sqrt(a), rtol=1e-14)
        p2 = (s * s - 2 * (a + 1) * s + a * (a + 1)) / np.sqrt(2 * a * (a + 1))
        np.testing.assert_allclose(P[2], p2, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("alpha", [1.5, 5.0, 125.0])
    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4, 5])
    def test_against_scipy_laguerre(self, alpha, n):
        s = np.linspace(0.0, 3 * alpha + 20, 50)
        got = orthonormal_polynomial(n, alpha, s)
        ref = laguerre_oracle(n, alpha, s)
        np.testing.assert_allclose(got, ref, rtol=1e-9, atol=1e-9 * np.abs(ref).max())

    @pytest.mark.parametrize("alpha", [5.0, 125.0])
    def test_gram_matrix(self, alpha):
        s, w, _ = gamma_rule(64, alpha)
        P = orthonormal_polynomials(5, alpha, s)
        np.testing.assert_allclose((P * w) @ P.T, np.eye(6), atol=1e-10)

    def test_shape_and_scalar(self):
        assert orthonormal_polynomials(3, 5.0, np.zeros((2, 4))).shape == (4, 2, 4)
        assert isinstance(orthonormal_polynomial(2, 5.0, 1.0), float)

    def test_negative_order(self):
        with pytest.raises(ValueError):
            orthonormal_polynomials(-1, 5.0, 1.0)


class TestCoefficients:
    def test_equilibrium_has_no_corrections(self):
        m = GradMoments(0.32, 0.1024)
        assert grad_coefficients(m, 0.1, 20.0, 125.0) == (1.0, 0.0, 0.0, 0.0)

    @pytest.mark.parametrize("dp,dphi", [(0.1, 0.05), (-0.2, 0.3), (0.0, -0.1)])
    def test_expansion_reproduces_moments(self, dp, dphi):
        rho, v, a = 0.08, 15.0, 9.0
        p0 = equilibrium_pressure(rho, v, a)
        phi0 = equilibrium_third_moment(rho, v, a)
        m = GradMoments(p0 * (1 + dp), phi0 * (1 + dphi))
        c0, c1, c2, c3 = grad_coefficients(m, rho, v, a)

        def f(c):
            P = orthonormal_polynomials(3, a, a * c / v)
            return equilibrium_distribution(c, rho, v, a) * (c0 * P[0] + c1 * P[1] + c2 * P[2] + c3 * P[3])

        m0, m1, m2, m3 = central_moments(f, v)
        assert m0 == pytest.approx(rho, rel=1e-9)
        assert m1 == pytest.approx(rho * v, rel=1e-9)
        assert m2 == pytest.approx(m.pressure, rel=1e-9)
        assert m3 == pytest.approx(m.third_moment, rel=1e-8)


class TestTruncatedDistribution:
    @pytest.mark.parametrize("ratio", [0.8, 1.0, 1.3])
    def test_moments(self, ratio):
        rho, v, a = 0.1, 20.0, 40.0
        pressure = ratio * equilibrium_pressure(rho, v, a)
        f = lambda c: grad_distribution(c, rho, v, pressure, a)
        m0, m1, m2, m3 = central_moments(f, v)
        assert m0 == pytest.approx(rho, rel=1e-9)
        assert m1 == pytest.approx(rho * v, rel=1e-9)
        assert m2 == pytest.approx(pressure, rel=1e-9)
        assert m3 == pytest.approx(third_moment_closure(pressure, rho, v, a), rel=1e-8)

    def test_closure_at_equilibrium(self):
        assert third_moment_closure(0.32, 0.1, 20.0, 125.0) == pytest.approx(0.1024, rel=1e-14)

    def test_matches_polynomial_form(self):
        rho, v, a = 0.1, 20.0, 125.0
        p = 0.35
        c = np.linspace(1, 40, 30)
        _, _, c2, _ = grad_coefficients(GradMoments(p, third_moment_closure(p, rho, v, a)), rho, v, a)
        ref = equilibrium_distribution(c, rho, v, a) * (1 + c2 * orthonormal_polynomial(2, a, a * c / v))
        np.testing.assert_allclose(grad_distribution(c, rho, v, p, a), ref, rtol=1e-10, atol=1e-300)


class TestMaxwellianIteration:
    def test_first_iterate_is_ce_deviator(self, params):
        pt = KineticPoint(0.1, 20.0, 0.01)
        dev = ce_pressure(pt, params) - equilibrium_pressure(0.1, 20.0, params.alpha)
        assert maxwellian_first_iterate(pt, params) == pytest.approx(dev, rel=1e-13)

    @settings(max_examples=300)
    @given(rho=st.floats(0.001, 0.199), v=st.floats(0.0, 40.0), g=st.floats(-0.05, 0.05), alpha=st.floats(1.5, 400))
    def test_equals_minus_viscosity_times_gradient(self, rho, v, g, alpha):
        p = ModelParams(alpha=alpha)
        got = maxwellian_first_iterate(KineticPoint(rho, v, g), p)
        assert got == pytest.approx(-viscosity(rho, v, p) * g, rel=1e-12, abs=1e-300)

    def test_relaxes_without_gradients(self, params):
        # only the relaxation term left: dev_new = 0 for any zero-gradient input
        pt = KineticPoint(0.1, 20.0, 0.0)
        assert maxwellian_iterate(pt, params, deviator=0.05) == 0.0

    def test_transport_term(self, params):
        pt = KineticPoint(0.1, 20.0, 0.0)
        from nstraffic import aggressiveness, collective_relaxation_time

        tau0 = collective_relaxation_time(aggressiveness(0.1, params), params.tau)
        a = params.alpha
        expected = -tau0 * ((a + 4) / 2) * (2 * 20.0 / a) * 1e-3
        assert maxwellian_iterate(pt, params, d_deviator_dx=1e-3) == pytest.approx(expected, rel=1e-14)

    def test_vectorized_grid(self, params):
        pt = KineticPoint(np.array([0.01, 0.05]), np.array([10.0, 10.0]), np.array([0.01, 0.01]))
        out = maxwellian_first_iterate(pt, params)
        assert out.shape == (2,)
        assert out[1] == maxwellian_first_iterate(KineticPoint(0.05, 10.0, 0.01), params)

    @pytest.mark.parametrize("rho", [0.0, 0.2])
    def test_singular_without_interactions(self, params, rho):
        with pytest.raises(SingularityError):
            maxwellian_first_iterate(KineticPoint(rho, 10.0, 0.01), params)
