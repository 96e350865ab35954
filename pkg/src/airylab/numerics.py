"""Low-level numerical kernels: polynomials, Gauss-Legendre panels, LU log-dets, RK4.

Everything downstream (equilibrium measures, recurrences, Fredholm determinants,
the integro-differential solver) is built on the primitives in this module, so
they are deliberately small, deterministic and heavily tested.
"""

import numpy as np

from .errors import BlowUpError, ConvergenceError, DomainError


class RealPolynomial:
    """Real polynomial stored by ascending coefficients, evaluated by Horner."""

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise DomainError("coefficient array must be one-dimensional and non-empty")
        if not np.all(np.isfinite(coeffs)):
            raise DomainError("polynomial coefficients must be finite")
        # normalize away trailing zeros (keep at least the constant term)
        nz = np.nonzero(coeffs)[0]
        self.coeffs = coeffs[: nz[-1] + 1] if nz.size else coeffs[:1]

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, x):
        x = np.asarray(x)
        acc = np.zeros_like(x, dtype=self.coeffs.dtype if x.dtype.kind != "f" else x.dtype)
        acc = acc + self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * x + c
        return acc if acc.ndim else acc[()]

    def derivative(self):
        if self.degree == 0:
            return RealPolynomial([0.0])
        k = np.arange(1, self.coeffs.size)
        return RealPolynomial(self.coeffs[1:] * k)

    def shift(self, c):
        """Return the polynomial q(x) = p(x + c) (Taylor shift by repeated Horner)."""
        work = np.array(self.coeffs, dtype=float)
        n = work.size
        # repeated synthetic division by (x - c): remainders are the shifted coeffs
        for j in range(n - 1):
            for i in range(n - 2, j - 1, -1):
                work[i] += c * work[i + 1]
        return RealPolynomial(work)

    def __repr__(self):
        return f"RealPolynomial({self.coeffs.tolist()})"


class QuadratureRule:
    """Nodes and weights on the reference interval [-1, 1]."""

    def __init__(self, nodes, weights):
        self.nodes = np.asarray(nodes, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise DomainError("nodes and weights must be matching 1-d arrays")

    @property
    def size(self):
        return self.nodes.size


def gauss_legendre(m, tol=1e-15, max_iter=100):
    """Gauss-Legendre rule with m nodes on [-1, 1].

    Nodes are the roots of the degree-m Legendre polynomial, located by a
    vectorized Newton iteration started from Chebyshev-angle guesses; weights
    come from the derivative identity w_i = 2 / ((1 - x_i^2) P'_m(x_i)^2).
    """
    m = int(m)
    if m < 1:
        raise DomainError(f"need at least one node, got m={m}")
    if m == 1:
        return QuadratureRule([0.0], [2.0])
    k = np.arange(m)
    x = np.cos(np.pi * (k + 0.75) / (m + 0.5))
    for _ in range(max_iter):
        p_prev = np.ones_like(x)
        p = x.copy()
        for j in range(1, m):
            p, p_prev = ((2 * j + 1) * x * p - j * p_prev) / (j + 1), p
        dp = m * (p_prev - x * p) / (1.0 - x * x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < tol:
            break
    else:
        raise ConvergenceError(f"Legendre root finding did not converge for m={m}")
    # one clean-up recurrence pass at the converged nodes
    p_prev = np.ones_like(x)
    p = x.copy()
    for j in range(1, m):
        p, p_prev = ((2 * j + 1) * x * p - j * p_prev) / (j + 1), p
    dp = m * (p_prev - x * p) / (1.0 - x * x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return QuadratureRule(x[order], w[order])


class PanelScheme:
    """A partition of an interval into panels sharing one reference rule."""

    def __init__(self, breakpoints, rule):
        breakpoints = np.asarray(breakpoints, dtype=float)
        if breakpoints.ndim != 1 or breakpoints.size < 2:
            raise DomainError("need at least two breakpoints")
        if not np.all(np.isfinite(breakpoints)):
            raise DomainError("breakpoints must be finite")
        if not np.all(np.diff(breakpoints) > 0):
            raise DomainError("breakpoints must be strictly increasing")
        self.breakpoints = breakpoints
        self.rule = rule
        mid = 0.5 * (breakpoints[1:] + breakpoints[:-1])
        half = 0.5 * np.diff(breakpoints)
        self.nodes = (mid[:, None] + half[:, None] * rule.nodes[None, :]).ravel()
        self.weights = (half[:, None] * rule.weights[None, :]).ravel()

    @property
    def n_panels(self):
        return self.breakpoints.size - 1


def integrate_panels(f, scheme):
    """Integrate f over a PanelScheme, summing panels left to right."""
    vals = np.asarray(f(scheme.nodes), dtype=float)
    if vals.shape != scheme.nodes.shape:
        raise DomainError("integrand must return one value per node")
    if not np.all(np.isfinite(vals)):
        raise DomainError("integrand produced non-finite values")
    m = scheme.rule.size
    per_panel = (vals * scheme.weights).reshape(-1, m).sum(axis=1)
    total = 0.0
    for p in per_panel:
        total += p
    return total


def map_semi_infinite(s, L):
    """Affine-rational map of u in [0,1) onto the half line [-s, infinity).

    Returns (x_of_u, jacobian_of_u) with x = -s + L u/(1-u) and
    dx/du = L/(1-u)^2.  L > 0 sets the scale: half the unit interval maps
    into [-s, -s + L].
    """
    if not (np.isfinite(s) and np.isfinite(L)) or L <= 0:
        raise DomainError("map requires finite s and L > 0")

    def x_of_u(u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0) or np.any(u >= 1):
            raise DomainError("map argument must lie in [0, 1)")
        return -s + L * u / (1.0 - u)

    def jacobian(u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0) or np.any(u >= 1):
            raise DomainError("map argument must lie in [0, 1)")
        return L / (1.0 - u) ** 2

    return x_of_u, jacobian


def lu_logdet(a):
    """(sign, log|det|) of a square matrix via LU with partial pivoting."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("matrix must be square")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    sign, logabs = np.linalg.slogdet(a)
    return float(sign), float(logabs)


def ode_rk4(rhs, y0, s_start, s_end, n_steps, observer=None):
    """Classical fixed-step RK4 from s_start to s_end (either direction).

    rhs(s, y) maps the scalar abscissa and the state array to the state
    derivative.  Returns (s_grid, final_state).  If observer is given it is
    called as observer(step_index, s, y) at every grid point including the
    initial one; heavy trajectories store themselves through the observer
    instead of materializing a (n_steps+1) x dim array.
    """
    n_steps = int(n_steps)
    if n_steps < 1:
        raise DomainError("n_steps must be positive")
    if s_start == s_end:
        raise DomainError("integration interval is empty")
    y = np.array(y0, dtype=float)
    h = (s_end - s_start) / n_steps
    s_grid = s_start + h * np.arange(n_steps + 1)
    if observer is not None:
        observer(0, s_grid[0], y)
    for i in range(n_steps):
        s = s_grid[i]
        k1 = rhs(s, y)
        k2 = rhs(s + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(s + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise BlowUpError(f"state became non-finite at step {i + 1}", step=i + 1)
        if observer is not None:
            observer(i + 1, s_grid[i + 1], y)
    return s_grid, y
