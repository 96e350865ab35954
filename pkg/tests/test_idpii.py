"""Tests for the integro-differential Painleve II solver and limiting kernel."""

import numpy as np
import pytest

from airylab.errors import DomainError
from airylab.fredholm import fredholm_det_ft
from airylab.idpii import (interp_I, interp_P, interp_phi, k_infinity,
                           solve_idpii, tw_local_check, tw_windowed_integral)
from airylab.special import airy_ai, airy_ai_prime, fermi_weight


@pytest.fixture(scope="module")
def sol():
    return solve_idpii(1.0)


class TestSolver:
    def test_initial_data_is_airy(self, sol):
        xi = sol.xi_grid
        arg = xi + 12.0  # T = 1: T^{2/3} xi + S_max T^{-1/3}
        keep = arg <= 150.0
        assert np.allclose(sol.Phi[0][keep], airy_ai(arg[keep]), rtol=0, atol=1e-14)
        assert np.allclose(sol.dPhi[0][keep], airy_ai_prime(arg[keep]), rtol=0, atol=1e-14)

    def test_integral_term_nonnegative(self, sol):
        assert np.all(sol.I_of_S >= 0.0)

    def test_integral_term_large_s_decay(self, sol):
        # at S_max the statistic is nearly undeformed: I is tiny but nonzero
        assert sol.I_of_S[0] < 1e-5
        assert sol.I_of_S[0] > 0.0
        # I grows monotonically as S decreases over the stored range top
        assert sol.I_of_S[50] > sol.I_of_S[0]

    def test_p_offset_convention(self, sol):
        assert sol.P_of_S[0] == pytest.approx(144.0 / 4.0, abs=1e-12)
        # dP/dS = S/(2T) + I/T via stored-layer differences near the top
        dS = sol.S_grid[1] - sol.S_grid[0]
        fd = (sol.P_of_S[1] - sol.P_of_S[0]) / dS
        mid_S = 0.5 * (sol.S_grid[0] + sol.S_grid[1])
        assert fd == pytest.approx(mid_S / 2.0, abs=1e-3)

    def test_ode_self_residual(self, sol):
        # second S-difference of stored Phi vs the right-hand side
        h = sol.S_grid[0] - sol.S_grid[1]
        worst = 0.0
        for j in range(100, sol.S_grid.size - 3, 97):
            d2 = (-sol.Phi[j - 2] + 16.0 * sol.Phi[j - 1] - 30.0 * sol.Phi[j]
                  + 16.0 * sol.Phi[j + 1] - sol.Phi[j + 2]) / (12.0 * h * h)
            S = sol.S_grid[j]
            coef = sol.xi_grid + S / sol.T + 2.0 * sol.I_of_S[j] / sol.T
            rhs = coef * sol.Phi[j]
            mask = np.abs(sol.Phi[j]) > 1e-6
            # denominator floored at the layer scale (turning points have
            # rhs = 0 and a pointwise ratio there is meaningless)
            denom = np.maximum(np.abs(rhs[mask]), 1e-3 * float(np.max(np.abs(rhs))))
            rel = np.abs(d2 - rhs)[mask] / denom
            worst = max(worst, float(np.max(rel)))
        assert worst <= 5e-4

    def test_step_doubling_stability(self):
        a = solve_idpii(1.0, n_steps=2800, store_stride=4)
        b = solve_idpii(1.0, n_steps=1400, store_stride=2)
        va = interp_phi(a, 0.0, 0.0)
        vb = interp_phi(b, 0.0, 0.0)
        assert abs(va - vb) < 1e-6

    def test_truncation_guard_is_informative(self, sol):
        # one flag per stored layer; a loose tolerance clears them all
        assert sol.truncation_flags.shape == sol.S_grid.shape
        loose = solve_idpii(1.0, n_steps=200, store_stride=4, guard_tol=1.0)
        assert not np.any(loose.truncation_flags)

    def test_parameter_validation(self):
        with pytest.raises(DomainError):
            solve_idpii(-1.0)
        with pytest.raises(DomainError):
            solve_idpii(1.0, S_min=5.0, S_max=1.0)
        with pytest.raises(DomainError):
            solve_idpii(1.0, n_steps=2801, store_stride=4)


class TestInterpolation:
    def test_reproduces_grid_values(self, sol):
        j, i = 40, 500
        v = interp_phi(sol, sol.xi_grid[i], sol.S_grid[j])
        assert v == pytest.approx(sol.Phi[j, i], rel=1e-12)

    def test_cubic_accuracy_between_nodes(self, sol):
        # compare against Airy initial data at S_max between grid points:
        # ~h^4 accuracy in the oscillatory region, much better where smooth
        xi = sol.xi_grid[300] + 0.4 * sol.h_xi  # Airy argument -6
        v = interp_phi(sol, xi, sol.S_grid[0])
        assert v == pytest.approx(airy_ai(xi + 12.0), abs=2e-6)
        xi = sol.xi_grid[800] + 0.4 * sol.h_xi  # Airy argument +14
        v = interp_phi(sol, xi, sol.S_grid[0])
        assert v == pytest.approx(airy_ai(xi + 12.0), abs=1e-10)

    def test_xi_derivative_option(self, sol):
        xi = -2.0
        d = interp_phi(sol, xi, sol.S_grid[0], deriv_xi=True)
        assert d == pytest.approx(airy_ai_prime(xi + 12.0), abs=1e-6)

    def test_scalar_interfaces(self, sol):
        assert np.ndim(interp_I(sol, 3.0)) == 0
        assert np.ndim(interp_P(sol, 3.0)) == 0

    def test_out_of_range_rejected(self, sol):
        with pytest.raises(DomainError):
            interp_phi(sol, 0.0, 13.0)
        with pytest.raises(DomainError):
            interp_phi(sol, 99.0, 0.0)


class TestLimitingKernel:
    def test_symmetry(self, sol):
        a = k_infinity(sol, 0.3, -0.5, 1.0, 1.0)
        b = k_infinity(sol, -0.5, 0.3, 1.0, 1.0)
        assert a == pytest.approx(b, rel=1e-13)

    def test_confluent_matches_near_diagonal(self, sol):
        a = k_infinity(sol, 0.2, 0.2, 1.0, 1.0)
        b = k_infinity(sol, 0.2, 0.2001, 1.0, 1.0)
        assert abs(a - b) < 1e-5

    def test_diagonal_positive(self, sol):
        for u in (-1.0, 0.0, 1.0):
            assert k_infinity(sol, u, u, 0.5, 1.0) > 0.0

    def test_temperature_consistency_guard(self, sol):
        with pytest.raises(DomainError):
            k_infinity(sol, 0.0, 0.0, 1.0, 0.5)  # solution was built for T = 1


class TestTracyWidomChecks:
    def test_drift_free_identity(self, sol):
        # d^2/dS^2 log L(-S T^{1/3}, T^{-2}) = -I(S)/T at T = 1
        spacing = 0.05
        for S in (0.0, 2.0):
            f = [np.log(fredholm_det_ft(-(S + j * spacing), 1.0, 80))
                 for j in (-2, -1, 0, 1, 2)]
            d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * spacing ** 2)
            assert d2 == pytest.approx(-interp_I(sol, S), abs=5e-6)

    def test_local_check_residual_is_drift(self, sol):
        # with the drift term S/2 included the residual equals S/2: the two
        # stencil checks below document this exactly
        spacing = 0.05
        for S in (0.0, 2.0):
            f = [np.log(fredholm_det_ft(-(S + j * spacing), 1.0, 80))
                 for j in (-2, -1, 0, 1, 2)]
            res = tw_local_check(sol, S, f, spacing)
            assert res == pytest.approx(S / 2.0, abs=5e-6)

    def test_local_check_input_validation(self, sol):
        with pytest.raises(DomainError):
            tw_local_check(sol, 0.0, [1.0, 2.0, 3.0])

    def test_windowed_integral_finite(self, sol):
        v = tw_windowed_integral(sol, 0.0, 10.0)
        assert np.isfinite(v)
        with pytest.raises(DomainError):
            tw_windowed_integral(sol, 11.97, 12.0)


class TestFermiWeightUse:
    def test_integral_definition_consistency(self, sol):
        # recompute I at a stored layer directly from Phi and the Fermi weight
        j = 120
        w = fermi_weight(sol.xi_grid)
        direct = np.trapz(sol.Phi[j] ** 2 * w, sol.xi_grid)
        assert direct == pytest.approx(sol.I_of_S[j], rel=1e-6, abs=1e-12)
