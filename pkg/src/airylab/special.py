"""Special functions: Airy Ai and Ai', the Fermi weight, and polylog-type integrals.

The Airy pair is evaluated from scratch: an extended-precision Maclaurin series
on a central window and Poincare-type asymptotic expansions outside it.  The
polylog-type integrals F_beta(y) = int_0^inf v^beta log(1+e^{-y-v}) dv come in
two independent routes (direct quadrature and an accelerated alternating
series) so each can serve as the other's oracle.
"""

import math

import numpy as np

from .errors import ConvergenceError, DomainError
from .numerics import PanelScheme, gauss_legendre

# Ai(0) and -Ai'(0) to more digits than long double carries.
_AI0 = np.longdouble("0.355028053887817239260063186004183176398")
_AIP0 = np.longdouble("0.258819403792806798405183560188858261013")

# series is used on [-SERIES_NEG, SERIES_POS]; asymptotics beyond.
_SERIES_POS = 5.5
_SERIES_NEG = 9.0
_DOMAIN = 200.0
_N_SERIES = 72
_N_ASY = 40


def _series_coeffs():
    one = np.longdouble(1.0)
    f = np.empty(_N_SERIES, dtype=np.longdouble)
    g = np.empty(_N_SERIES, dtype=np.longdouble)
    f[0] = one
    g[0] = one
    for k in range(_N_SERIES - 1):
        f[k + 1] = f[k] / ((3 * k + 2) * (3 * k + 3))
        g[k + 1] = g[k] / ((3 * k + 3) * (3 * k + 4))
    return f, g


_F_COEF, _G_COEF = _series_coeffs()


def _asy_coeffs():
    """u_k and v_k of the Airy asymptotic expansions, k = 0.._N_ASY-1."""
    u = np.empty(_N_ASY)
    v = np.empty(_N_ASY)
    u[0] = 1.0
    v[0] = 1.0
    for k in range(_N_ASY - 1):
        # u_{k+1}/u_k = (6k+1)(6k+3)(6k+5) / (216 (k+1) (2k+1))
        u[k + 1] = u[k] * (6 * k + 1) * (6 * k + 3) * (6 * k + 5) / (216.0 * (k + 1) * (2 * k + 1))
        v[k + 1] = u[k + 1] * (6 * (k + 1) + 1) / (1 - 6 * (k + 1))
    return u, v


_U_COEF, _V_COEF = _asy_coeffs()


def _airy_series(x):
    """Maclaurin evaluation in long double on the central window."""
    xl = x.astype(np.longdouble)
    y = xl * xl * xl
    accf = np.full_like(xl, _F_COEF[-1])
    accg = np.full_like(xl, _G_COEF[-1])
    accfp = np.full_like(xl, 3 * (_N_SERIES - 1) * _F_COEF[-1])
    accgp = np.full_like(xl, (3 * (_N_SERIES - 1) + 1) * _G_COEF[-1])
    for k in range(_N_SERIES - 2, -1, -1):
        accf = accf * y + _F_COEF[k]
        accg = accg * y + _G_COEF[k]
        accfp = accfp * y + 3 * k * _F_COEF[k]
        accgp = accgp * y + (3 * k + 1) * _G_COEF[k]
    f = accf
    g = xl * accg
    fp = np.where(xl != 0, accfp / np.where(xl == 0, 1, xl), 0.0)
    gp = accgp
    ai = _AI0 * f - _AIP0 * g
    aip = _AI0 * fp - _AIP0 * gp
    return ai.astype(float), aip.astype(float)


def _asy_sum(zeta, coef, parity=None):
    """Sum_k (-1)^k coef[k] zeta^{-k}, truncated at the smallest term.

    parity='even' / 'odd' restricts to even or odd k (with the sign pattern
    (-1)^j for the j-th retained term), as needed on the oscillatory side.
    """
    if parity is None:
        ks = np.arange(_N_ASY)
    elif parity == "even":
        ks = np.arange(0, _N_ASY, 2)
    else:
        ks = np.arange(1, _N_ASY, 2)
    total = np.zeros_like(zeta)
    active = np.ones(zeta.shape, dtype=bool)
    prev = np.full(zeta.shape, np.inf)
    for j, k in enumerate(ks):
        term = coef[k] * zeta ** (-float(k))
        grown = np.abs(term) > prev
        active &= ~grown
        total = np.where(active, total + (-1.0) ** j * term, total)
        prev = np.where(active, np.abs(term), prev)
    return total


def _airy_asy_pos(x):
    zeta = (2.0 / 3.0) * x ** 1.5
    pre = np.exp(-zeta) / (2.0 * np.sqrt(np.pi) * x ** 0.25)
    ai = pre * _asy_sum(zeta, _U_COEF)
    aip = -(x ** 0.25) * np.exp(-zeta) / (2.0 * np.sqrt(np.pi)) * _asy_sum(zeta, _V_COEF)
    return ai, aip


def _airy_asy_neg(x):
    z = -x
    zeta = (2.0 / 3.0) * z ** 1.5
    phase = zeta - 0.25 * np.pi
    c, s = np.cos(phase), np.sin(phase)
    p_even = _asy_sum(zeta, _U_COEF, parity="even")
    p_odd = _asy_sum(zeta, _U_COEF, parity="odd")
    q_even = _asy_sum(zeta, _V_COEF, parity="even")
    q_odd = _asy_sum(zeta, _V_COEF, parity="odd")
    ai = (c * p_even + s * p_odd) / (np.sqrt(np.pi) * z ** 0.25)
    aip = (z ** 0.25 / np.sqrt(np.pi)) * (s * q_even - c * q_odd)
    return ai, aip


def _airy_pair(x):
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xf = np.atleast_1d(x)
    if not np.all(np.isfinite(xf)):
        raise DomainError("Airy argument must be finite")
    if np.any(np.abs(xf) > _DOMAIN):
        raise DomainError(f"Airy argument out of supported range |x| <= {_DOMAIN}")
    ai = np.empty_like(xf)
    aip = np.empty_like(xf)
    mid = (xf >= -_SERIES_NEG) & (xf <= _SERIES_POS)
    pos = xf > _SERIES_POS
    neg = xf < -_SERIES_NEG
    if np.any(mid):
        ai[mid], aip[mid] = _airy_series(xf[mid])
    if np.any(pos):
        ai[pos], aip[pos] = _airy_asy_pos(xf[pos])
    if np.any(neg):
        ai[neg], aip[neg] = _airy_asy_neg(xf[neg])
    if scalar:
        return ai[0], aip[0]
    return ai, aip


def airy_ai(x):
    """Airy function Ai(x) for |x| <= 200 (vectorized)."""
    return _airy_pair(x)[0]


def airy_ai_prime(x):
    """Derivative Ai'(x) for |x| <= 200 (vectorized)."""
    return _airy_pair(x)[1]


def fermi_weight(r):
    """sigma'(r) = e^{-r} / (1 + e^{-r})^2, overflow-free on the whole line."""
    r = np.asarray(r, dtype=float)
    e = np.exp(-np.abs(r))
    out = e / (1.0 + e) ** 2
    return out if out.ndim else out[()]


def log_logistic(z):
    """log(1/(1+e^{-z})) evaluated without overflow for any real z."""
    z = np.asarray(z, dtype=float)
    out = np.minimum(z, 0.0) - np.log1p(np.exp(-np.abs(z)))
    return out if out.ndim else out[()]


def logistic(z):
    z = np.asarray(z, dtype=float)
    e = np.exp(-np.abs(z))
    out = np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return out if out.ndim else out[()]


_RULE16 = gauss_legendre(16)


def f_beta_quad(beta, y):
    """F_beta(y) = int_0^infty v^beta log(1 + e^{-y-v}) dv by panel quadrature.

    Requires beta > -1.  For half-integer and integer beta the substitution
    v = w^2 renders the integrand smooth at the origin; other beta use the
    power-removing substitution v = w^{1/(1+beta)}.
    """
    if not beta > -1:
        raise DomainError("f_beta_quad needs beta > -1")
    if not np.isfinite(y):
        raise DomainError("y must be finite")
    v_max = max(0.0, -y) + 50.0
    two_beta = 2.0 * beta + 1.0
    if abs(two_beta - round(two_beta)) < 1e-12 and round(two_beta) >= 0:
        # v = w^2 : integrand 2 w^{2 beta + 1} log(1+e^{-y-w^2})
        p = round(two_beta)
        w_max = np.sqrt(v_max)
        width = 0.2
        breaks = np.linspace(0.0, w_max, int(np.ceil(w_max / width)) + 1)
        scheme = PanelScheme(breaks, _RULE16)

        def f(w):
            return 2.0 * w ** p * np.log1p(np.exp(-np.minimum(y + w * w, 700.0)))

    else:
        # v = w^{1/(1+beta)} : dv v^beta = dw / (1+beta)
        q = 1.0 / (1.0 + beta)
        w_max = v_max ** (1.0 + beta)
        width = max(w_max / 400.0, 1e-3)
        breaks = np.linspace(0.0, w_max, int(np.ceil(w_max / width)) + 1)
        scheme = PanelScheme(breaks, _RULE16)

        def f(w):
            v = w ** q
            return np.log1p(np.exp(-np.minimum(y + v, 700.0))) / (1.0 + beta)

    total = 0.0
    m = scheme.rule.size
    vals = f(scheme.nodes) * scheme.weights
    for s in vals.reshape(-1, m).sum(axis=1):
        total += s
    return total


def f_k_closed(k, y, tol=1e-17):
    """F_k(y) for integer k >= 0 and y >= 0 via the polylog series.

    F_k(y) = -k! Li_{k+2}(-e^{-y}) = k! sum_{m>=1} (-1)^{m+1} e^{-my} / m^{k+2}.
    Adjacent terms are paired so that the partial sums converge absolutely;
    the sum stops once a pair drops below tol relative to the head term.
    """
    if int(k) != k or k < 0:
        raise DomainError("k must be a non-negative integer")
    if y < 0:
        raise DomainError("the series route needs y >= 0")
    k = int(k)
    s = k + 2
    x = np.exp(-y)
    fact = float(math.factorial(k))
    total = 0.0
    block = 4096
    j0 = 1
    head = x  # first term magnitude
    for _ in range(200000):
        j = np.arange(j0, j0 + block)
        odd = 2 * j - 1
        pairs = x ** odd / odd.astype(float) ** s - x ** (2 * j) / (2.0 * j) ** s
        total += float(np.sum(pairs))
        last = abs(pairs[-1])
        j0 += block
        if last < tol * max(head, 1e-300) or x ** (2 * j0) == 0.0:
            break
    else:
        raise ConvergenceError("polylog series did not terminate")
    return fact * total
