"""Integro-differential Painleve II: solver, interpolation, and limiting kernel.

The unknown Phi(xi | S, T) satisfies, as a function of S at each fixed xi,

    d^2/dS^2 Phi = (xi + S/T + (2/T) I(S)) Phi,
    I(S) = int Phi(xi | S, T)^2 fermi_weight(xi) dxi,

with Airy boundary data Phi ~ T^{1/6} Ai(T^{2/3} xi + S T^{-1/3}) for large S.
The solver marches the coupled system (Phi, dPhi/dS, P) downward in S from
S_max with classical RK4 on a fixed xi grid; the anti-derivative P obeys
dP/dS = S/(2T) + I(S)/T with P(S_max) = S_max^2/(4T).

The limiting edge kernel K_infinity is built from interpolated (Phi, dPhi/dS)
layers, and diagnostics compare second S-derivatives of log-Fredholm
determinants with the solver's I(S).
"""

import numpy as np

from .errors import BlowUpError, DomainError
from .special import airy_ai, airy_ai_prime, fermi_weight


def _trapz_simpson(y, h, axis=-1):
    """Composite Simpson with a trapezoid closing panel when needed."""
    y = np.asarray(y)
    n = y.shape[axis]
    if n < 3:
        raise DomainError("need at least three samples")
    y = np.moveaxis(y, axis, -1)
    n_simp = n if n % 2 == 1 else n - 1
    ys = y[..., :n_simp]
    total = (h / 3.0) * (ys[..., 0] + ys[..., -1]
                         + 4.0 * np.sum(ys[..., 1:-1:2], axis=-1)
                         + 2.0 * np.sum(ys[..., 2:-1:2], axis=-1))
    if n_simp != n:
        total = total + 0.5 * h * (y[..., -2] + y[..., -1])
    return total


class IdPiiSolution:
    """Stored layers of the downward integration.

    S_grid is descending; Phi and dPhi have one row per stored layer; I_of_S
    and P_of_S are the integral term and anti-derivative on the same grid.
    """

    def __init__(self, T, xi_grid, S_grid, Phi, dPhi, I_of_S, P_of_S, truncation_flags):
        self.T = T
        self.xi_grid = xi_grid
        self.S_grid = S_grid
        self.Phi = Phi
        self.dPhi = dPhi
        self.I_of_S = I_of_S
        self.P_of_S = P_of_S
        self.truncation_flags = truncation_flags

    @property
    def h_xi(self):
        return self.xi_grid[1] - self.xi_grid[0]


def solve_idpii(T, S_min=-2.0, S_max=12.0, xi_lo=-30.0, xi_hi=15.0,
                h_xi=0.04, n_steps=2800, store_stride=4, guard_tol=1e-10):
    """Integrate the integro-differential Painleve II system downward in S.

    Returns an IdPiiSolution with layers stored every `store_stride` RK4
    steps.  A boundary-truncation guard flags (without aborting) layers where
    the integrand Phi^2 * fermi_weight at the grid ends is not negligible
    relative to its maximum.
    """
    if T <= 0:
        raise DomainError("T must be positive")
    if S_max <= S_min:
        raise DomainError("need S_max > S_min")
    if n_steps % store_stride != 0:
        raise DomainError("store_stride must divide n_steps")
    n_xi = int(round((xi_hi - xi_lo) / h_xi)) + 1
    xi = xi_lo + h_xi * np.arange(n_xi)
    w_xi = fermi_weight(xi)

    t16 = T ** (1.0 / 6.0)
    arg0 = T ** (2.0 / 3.0) * xi + S_max * T ** (-1.0 / 3.0)
    phi = t16 * _ai_clip(arg0)
    dphi = (1.0 / t16) * _aip_clip(arg0)
    p = S_max * S_max / (4.0 * T)

    def intI(ph):
        return float(_trapz_simpson(ph * ph * w_xi, h_xi))

    h = (S_min - S_max) / n_steps  # negative: downward
    n_layers = n_steps // store_stride + 1
    S_grid = np.empty(n_layers)
    Phi = np.empty((n_layers, n_xi))
    dPhi = np.empty((n_layers, n_xi))
    I_of_S = np.empty(n_layers)
    P_of_S = np.empty(n_layers)
    flags = np.zeros(n_layers, dtype=bool)

    def store(layer, S, ph, dph, pp):
        S_grid[layer] = S
        Phi[layer] = ph
        dPhi[layer] = dph
        I_of_S[layer] = intI(ph)
        P_of_S[layer] = pp
        integrand = ph * ph * w_xi
        peak = max(float(np.max(integrand)), 1e-300)
        flags[layer] = max(integrand[0], integrand[-1]) > guard_tol * peak

    store(0, S_max, phi, dphi, p)

    def rhs(S, ph, dph):
        I = intI(ph)
        coef = xi + S / T + 2.0 * I / T
        return dph, coef * ph, S / (2.0 * T) + I / T

    for i in range(n_steps):
        S = S_max + h * i
        k1 = rhs(S, phi, dphi)
        k2 = rhs(S + 0.5 * h, phi + 0.5 * h * k1[0], dphi + 0.5 * h * k1[1])
        k3 = rhs(S + 0.5 * h, phi + 0.5 * h * k2[0], dphi + 0.5 * h * k2[1])
        k4 = rhs(S + h, phi + h * k3[0], dphi + h * k3[1])
        phi = phi + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        dphi = dphi + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        p = p + (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(dphi)) and np.isfinite(p)):
            raise BlowUpError(f"id-PII state became non-finite at step {i + 1}", step=i + 1)
        if (i + 1) % store_stride == 0:
            store((i + 1) // store_stride, S_max + h * (i + 1), phi, dphi, p)

    return IdPiiSolution(T, xi, S_grid, Phi, dPhi, I_of_S, P_of_S, flags)


def _ai_clip(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = x <= 150.0
    out[m] = airy_ai(x[m])
    return out


def _aip_clip(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = x <= 150.0
    out[m] = airy_ai_prime(x[m])
    return out


def _layer_weights(sol, S):
    """Bracketing stored layers and linear blend weight for abscissa S."""
    Sg = sol.S_grid  # descending
    if S > Sg[0] + 1e-12 or S < Sg[-1] - 1e-12:
        raise DomainError("S outside the stored range")
    j = int(np.searchsorted(-Sg, -S, side="right")) - 1
    j = min(max(j, 0), Sg.size - 2)
    t = (Sg[j] - S) / (Sg[j] - Sg[j + 1])
    return j, min(max(t, 0.0), 1.0)


def _cubic_rows(sol, rows, xi, deriv=False):
    """Cubic 4-point Lagrange interpolation of stored rows at points xi."""
    xg = sol.xi_grid
    h = sol.h_xi
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi < xg[0]) or np.any(xi > xg[-1]):
        raise DomainError("xi outside the grid")
    idx = np.clip(((xi - xg[0]) / h).astype(int), 1, xg.size - 3)
    t = (xi - xg[idx]) / h  # in [-1, 2] nominally, usually [0, 1]
    # Lagrange basis on stencil offsets (-1, 0, 1, 2)
    l0 = -t * (t - 1.0) * (t - 2.0) / 6.0
    l1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
    l2 = -(t + 1.0) * t * (t - 2.0) / 2.0
    l3 = (t + 1.0) * t * (t - 1.0) / 6.0
    if deriv:
        l0 = -(3 * t * t - 6 * t + 2.0) / 6.0
        l1 = (3 * t * t - 4 * t - 1.0) / 2.0
        l2 = -(3 * t * t - 2 * t - 2.0) / 2.0
        l3 = (3 * t * t - 1.0) / 6.0
        l0, l1, l2, l3 = (l / h for l in (l0, l1, l2, l3))
    vals = (rows[:, idx - 1] * l0 + rows[:, idx] * l1
            + rows[:, idx + 1] * l2 + rows[:, idx + 2] * l3)
    return vals


def interp_phi(sol, xi, S, which="phi", deriv_xi=False):
    """Interpolated Phi (or dPhi/dS) at (xi, S): cubic in xi, linear blend in S."""
    rows = sol.Phi if which == "phi" else sol.dPhi
    j, t = _layer_weights(sol, S)
    vals = _cubic_rows(sol, rows[j:j + 2], xi, deriv=deriv_xi)
    out = (1.0 - t) * vals[0] + t * vals[1]
    return out if np.ndim(xi) else float(out[0])


def interp_I(sol, S):
    j, t = _layer_weights(sol, S)
    return float((1.0 - t) * sol.I_of_S[j] + t * sol.I_of_S[j + 1])


def interp_P(sol, S):
    j, t = _layer_weights(sol, S)
    return float((1.0 - t) * sol.P_of_S[j] + t * sol.P_of_S[j + 1])


def k_infinity(sol, u, v, s, t_param, confluent_eps=1e-6):
    """Limiting edge kernel K_inf(u, v | s, t) from the stored solution.

    phi_1(z) = Phi(-s + t z | S, T), phi_2 = dPhi/dS at the same argument,
    with T = t^{-3/2}, S = s T.  The confluent u = v case uses the
    xi-derivative of the interpolant.
    """
    T = t_param ** (-1.5)
    if abs(T - sol.T) > 1e-9 * max(1.0, T):
        raise DomainError("solution was built for a different T")
    S = s * T
    xs = np.array([-s + t_param * u, -s + t_param * v])
    p1 = interp_phi(sol, xs, S, "phi")
    p2 = interp_phi(sol, xs, S, "dphi")
    if abs(u - v) < confluent_eps:
        d1 = t_param * interp_phi(sol, xs, S, "phi", deriv_xi=True)
        d2 = t_param * interp_phi(sol, xs, S, "dphi", deriv_xi=True)
        return float(d1[0] * p2[0] - p1[0] * d2[0])
    return float((p1[0] * p2[1] - p1[1] * p2[0]) / (u - v))


def tw_local_check(sol, S, fredholm_values, spacing=0.05):
    """Residual of the local Tracy-Widom-type identity at abscissa S.

    fredholm_values are log L(-(S+j*spacing) T^{1/3}, T^{-2}) for
    j = -2..2; the 5-point second central difference is compared with
    -(1/T)(I(S) - S/2).
    """
    f = np.asarray(fredholm_values, dtype=float)
    if f.shape != (5,):
        raise DomainError("need exactly five stencil values")
    d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * spacing ** 2)
    rhs = -(interp_I(sol, S) - 0.5 * S) / sol.T
    return abs(d2 - rhs)


def tw_windowed_integral(sol, S, S_cut):
    """-(1/T) int_S^{S_cut} (v - S)(I(v) - v/2) dv on the stored layer grid."""
    Sg = sol.S_grid
    mask = (Sg >= S) & (Sg <= S_cut)
    v = Sg[mask][::-1]  # ascending
    if v.size < 3:
        raise DomainError("window contains too few stored layers")
    integrand = (v - S) * (sol.I_of_S[mask][::-1] - 0.5 * v)
    return -np.trapz(integrand, v) / sol.T
