"""Tests for the low-level numerical kernels."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airylab.errors import BlowUpError, DomainError
from airylab.numerics import (PanelScheme, RealPolynomial, gauss_legendre,
                              integrate_panels, lu_logdet, map_semi_infinite,
                              ode_rk4)


class TestRealPolynomial:
    def test_horner_matches_polyval(self):
        coeffs = [1.0, -2.0, 0.5, 3.0]
        p = RealPolynomial(coeffs)
        xs = np.linspace(-3, 3, 17)
        expected = np.polyval(coeffs[::-1], xs)
        assert np.allclose(p(xs), expected, rtol=1e-14)

    def test_scalar_in_scalar_out(self):
        p = RealPolynomial([1.0, 1.0])
        assert np.ndim(p(2.0)) == 0
        assert p(2.0) == 3.0

    def test_derivative(self):
        p = RealPolynomial([5.0, 0.0, 3.0, 2.0])  # 5 + 3x^2 + 2x^3
        dp = p.derivative()
        assert np.allclose(dp.coeffs, [0.0, 6.0, 6.0])
        assert RealPolynomial([7.0]).derivative()(1.23) == 0.0

    def test_trailing_zeros_normalized(self):
        p = RealPolynomial([1.0, 2.0, 0.0, 0.0])
        assert p.degree == 1

    def test_rejects_bad_coeffs(self):
        with pytest.raises(DomainError):
            RealPolynomial([])
        with pytest.raises(DomainError):
            RealPolynomial([1.0, np.inf])

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=6),
           st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=50, deadline=None)
    def test_shift_property(self, coeffs, c, x):
        p = RealPolynomial(coeffs)
        q = p.shift(c)
        assert q(x) == pytest.approx(p(x + c), rel=1e-9, abs=1e-9)


class TestGaussLegendre:
    def test_single_node(self):
        r = gauss_legendre(1)
        assert r.nodes[0] == 0.0 and r.weights[0] == 2.0

    def test_weights_sum_to_two(self):
        for m in (2, 5, 16, 40, 80):
            r = gauss_legendre(m)
            assert np.sum(r.weights) == pytest.approx(2.0, abs=1e-14)
            assert np.all(np.diff(r.nodes) > 0)

    def test_odd_powers_vanish(self):
        r = gauss_legendre(12)
        for k in (1, 3, 5, 11):
            assert np.sum(r.weights * r.nodes ** k) == pytest.approx(0.0, abs=1e-14)

    @given(st.integers(2, 20))
    @settings(max_examples=25, deadline=None)
    def test_exact_for_polynomials(self, m):
        r = gauss_legendre(m)
        # highest exactly integrated even power is 2m - 2
        k = 2 * m - 2
        exact = 2.0 / (k + 1)
        assert np.sum(r.weights * r.nodes ** k) == pytest.approx(exact, rel=1e-13)

    def test_exponential_integral(self):
        r = gauss_legendre(20)
        val = np.sum(r.weights * np.exp(r.nodes))
        assert val == pytest.approx(np.exp(1) - np.exp(-1), rel=1e-15)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            gauss_legendre(0)


class TestPanels:
    def test_breakpoints_must_increase(self):
        with pytest.raises(DomainError):
            PanelScheme([0.0, 1.0, 1.0], gauss_legendre(4))

    def test_integrate_smooth(self):
        scheme = PanelScheme(np.linspace(0, np.pi, 9), gauss_legendre(16))
        assert integrate_panels(np.sin, scheme) == pytest.approx(2.0, rel=1e-14)

    def test_integrate_rejects_nonfinite(self):
        scheme = PanelScheme([0.0, 1.0], gauss_legendre(4))
        with pytest.raises(DomainError):
            integrate_panels(lambda x: 1.0 / (x - x[0]), scheme)


class TestSemiInfiniteMap:
    def test_endpoint_and_scale(self):
        x_of_u, jac = map_semi_infinite(2.0, 10.0)
        assert x_of_u(0.0) == -2.0
        assert x_of_u(0.5) == pytest.approx(8.0)

    def test_jacobian_matches_finite_difference(self):
        x_of_u, jac = map_semi_infinite(1.0, 5.0)
        u = np.linspace(0.05, 0.9, 10)
        eps = 1e-6
        fd = (x_of_u(u + eps) - x_of_u(u - eps)) / (2 * eps)
        assert np.allclose(jac(u), fd, rtol=1e-8)

    def test_exponential_integral_on_half_line(self):
        # int_{-s}^inf e^{-x} dx = e^{s}
        s, L = 1.5, 8.0
        x_of_u, jac = map_semi_infinite(s, L)
        rule = gauss_legendre(60)
        u = 0.5 * (rule.nodes + 1.0)
        w = 0.5 * rule.weights
        val = np.sum(w * jac(u) * np.exp(-x_of_u(u)))
        assert val == pytest.approx(np.exp(s), rel=1e-10)

    def test_domain_checks(self):
        x_of_u, jac = map_semi_infinite(0.0, 1.0)
        with pytest.raises(DomainError):
            x_of_u(1.0)
        with pytest.raises(DomainError):
            map_semi_infinite(0.0, -1.0)


class TestLogDet:
    def test_known_determinant(self):
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        sign, logabs = lu_logdet(a)
        assert sign == 1.0
        assert logabs == pytest.approx(np.log(3.0), rel=1e-14)

    def test_negative_determinant_sign(self):
        sign, logabs = lu_logdet(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert sign == -1.0

    def test_rejects_nonsquare(self):
        with pytest.raises(DomainError):
            lu_logdet(np.ones((2, 3)))


class TestRK4:
    def test_exponential_growth(self):
        _, y = ode_rk4(lambda s, y: y, [1.0], 0.0, 1.0, 200)
        assert y[0] == pytest.approx(np.e, rel=1e-9)

    def test_backward_integration(self):
        _, y = ode_rk4(lambda s, y: y, [np.e], 1.0, 0.0, 200)
        assert y[0] == pytest.approx(1.0, rel=1e-9)

    def test_harmonic_oscillator_energy(self):
        def rhs(s, y):
            return np.array([y[1], -y[0]])
        _, y = ode_rk4(rhs, [1.0, 0.0], 0.0, 2 * np.pi, 400)
        assert y[0] == pytest.approx(1.0, abs=1e-8)
        assert y[1] == pytest.approx(0.0, abs=1e-8)

    def test_observer_sees_every_step(self):
        seen = []
        ode_rk4(lambda s, y: -y, [1.0], 0.0, 1.0, 10,
                observer=lambda i, s, y: seen.append((i, s, y[0])))
        assert len(seen) == 11
        assert seen[0][0] == 0 and seen[-1][0] == 10

    def test_blowup_detected(self):
        with pytest.raises(BlowUpError) as exc:
            ode_rk4(lambda s, y: y * y, [1.0], 0.0, 5.0, 50)
        assert exc.value.step >= 1
