"""Finite-temperature and classical Airy kernels and their Fredholm determinants.

L(s, T) = det(I - K_T) on L^2(-s, infinity), where

    K_T(u, v) = int logistic(T^{1/3} zeta) Ai(u + zeta) Ai(zeta + v) dzeta

interpolates between the zero operator (T -> 0) and the classical Airy kernel
(T -> infinity).  The determinants are computed by Nystrom discretization on a
rational map of the half line; the finite-temperature kernel matrix is
assembled in one matmul over a shared zeta panel grid, which also makes it
positive semidefinite by construction.
"""

import numpy as np

from .errors import BreakdownError, DomainError
from .numerics import PanelScheme, gauss_legendre, lu_logdet, map_semi_infinite
from .special import airy_ai, airy_ai_prime, logistic

_RULE16 = gauss_legendre(16)
_AI_CUT = 30.0  # Ai(30) ~ 3e-110: beyond this the kernel row is numerically zero


def _ai_damped(x):
    """Ai(x) with hard zero beyond the cutoff (mapped nodes can be huge)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = x <= _AI_CUT
    if np.any(m):
        out[m] = airy_ai(x[m])
    return out


def airy_kernel(u, v):
    """Classical Airy kernel, with the confluent diagonal handled explicitly."""
    if min(u, v) > _AI_CUT:
        return 0.0
    if abs(u - v) < 1e-5:
        m = 0.5 * (u + v)
        return airy_ai_prime(m) ** 2 - m * airy_ai(m) ** 2
    return (airy_ai(u) * airy_ai_prime(v) - airy_ai_prime(u) * airy_ai(v)) / (u - v)


def _zeta_scheme(T, x_min):
    """Shared zeta panel grid for the finite-temperature kernel.

    The lower end is where the logistic factor has decayed to ~e^{-45}; the
    upper end is where Ai(x_min + zeta)^2 has (4/3)(x_min+zeta)^{3/2} >= 45.
    """
    t13 = T ** (1.0 / 3.0)
    lo = -45.0 / t13 - 5.0
    hi = min(max((45.0 * 0.75) ** (2.0 / 3.0) - x_min, lo + 1.0), 60.0)
    width = min(0.5, 5.0 / t13)
    n_panels = int(np.ceil((hi - lo) / width))
    return PanelScheme(np.linspace(lo, hi, n_panels + 1), _RULE16)


def ft_airy_kernel(u, v, T):
    """Finite-temperature Airy kernel K_T(u, v) by panel quadrature."""
    if T <= 0:
        raise DomainError("temperature parameter must be positive")
    if min(u, v) > _AI_CUT:
        return 0.0
    scheme = _zeta_scheme(T, min(u, v))
    z = scheme.nodes
    f = logistic(T ** (1.0 / 3.0) * z) * _ai_damped(u + z) * _ai_damped(z + v)
    return float(np.sum(f * scheme.weights))


class NystromOperator:
    """Discretized Fredholm operator on L^2(-s, infinity)."""

    def __init__(self, s, T, m, L, nodes, sqrt_weights, kernel_matrix):
        self.s = s
        self.T = T
        self.m = m
        self.L = L
        self.nodes = nodes
        self.sqrt_weights = sqrt_weights
        self.kernel_matrix = kernel_matrix

    def check(self, sym_tol=1e-12, eig_tol=1e-8):
        K = self.kernel_matrix
        if np.max(np.abs(K - K.T)) > sym_tol:
            raise BreakdownError("kernel matrix lost symmetry")
        ev = np.linalg.eigvalsh(0.5 * (K + K.T))
        if ev[0] < -eig_tol or ev[-1] > 1.0 + eig_tol:
            raise BreakdownError("kernel matrix spectrum outside [0, 1]")

    def logdet(self):
        sign, logabs = lu_logdet(np.eye(self.m) - self.kernel_matrix)
        if sign <= 0:
            raise BreakdownError("det(I - K) is not positive")
        return logabs


def _half_line_nodes(s, m, L):
    if m < 2:
        raise DomainError("need at least two Nystrom nodes")
    rule = gauss_legendre(m)
    u01 = 0.5 * (rule.nodes + 1.0)
    w01 = 0.5 * rule.weights
    x_of_u, jac = map_semi_infinite(s, L)
    x = x_of_u(u01)
    sw = np.sqrt(w01 * jac(u01))
    return x, sw


def build_nystrom(s, T, m, L=10.0):
    """Nystrom discretization of the finite-temperature Airy kernel.

    The kernel matrix is B diag(c) B^T with B[i,q] = sqrt_w_i Ai(x_i + zeta_q)
    and c the zeta quadrature weights times the logistic factor, so it is
    symmetric positive semidefinite by construction.
    """
    if not np.isfinite(s) or abs(s) > 12.0:
        raise DomainError("s must satisfy |s| <= 12")
    if not (0 < T <= 8000.0):
        raise DomainError("T must lie in (0, 8000]")
    x, sw = _half_line_nodes(s, m, L)
    scheme = _zeta_scheme(T, float(x[0]))
    z = scheme.nodes
    B = sw[:, None] * _ai_damped(x[:, None] + z[None, :])
    c = scheme.weights * logistic(T ** (1.0 / 3.0) * z)
    M = (B * c) @ B.T
    M = 0.5 * (M + M.T)
    return NystromOperator(s, T, m, L, x, sw, M)


def build_nystrom_airy(s, m, L=10.0):
    """Nystrom discretization of the classical Airy kernel."""
    if not np.isfinite(s) or abs(s) > 12.0:
        raise DomainError("s must satisfy |s| <= 12")
    x, sw = _half_line_nodes(s, m, L)
    keep = x <= _AI_CUT
    xk = x[keep]
    ai = airy_ai(xk)
    aip = airy_ai_prime(xk)
    diff = xk[:, None] - xk[None, :]
    num = ai[:, None] * aip[None, :] - aip[:, None] * ai[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        Kc = np.where(np.abs(diff) > 1e-12, num / np.where(diff == 0, 1.0, diff), 0.0)
    np.fill_diagonal(Kc, aip ** 2 - xk * ai ** 2)
    K = np.zeros((m, m))
    K[np.ix_(keep, keep)] = Kc
    M = (sw[:, None] * K) * sw[None, :]
    M = 0.5 * (M + M.T)
    return NystromOperator(s, np.inf, m, L, x, sw, M)


def fredholm_det_ft(s, T, m=80, L=10.0):
    """L(s, T) = det(I - K_T) on L^2(-s, infinity); value in (0, 1]."""
    op = build_nystrom(s, T, m, L)
    return float(np.exp(op.logdet()))


def fredholm_det_airy(s, m=80, L=10.0):
    """Classical Tracy-Widom determinant det(I - K_Ai) on L^2(-s, infinity)."""
    op = build_nystrom_airy(s, m, L)
    return float(np.exp(op.logdet()))
