"""Sharp Hardy constants of the ordered-pair power mixes ``sq(P[p], P[q])``.

The constant is an integral over the unit square::

    pq != 0        ( iint ((x^-q + y^-q) / 2)^(p/q) dx dy )^(1/p)
    p == 0 != q    exp( (1/q) iint ln((x^-q + y^-q) / 2) dx dy )
    q == 0 != p    ( int_0^1 x^(-p/2) dx )^(2/p)
    p == q == 0    e

The integrands blow up on the edges or at the origin.  Before integrating we
substitute ``x = u^k, y = v^k``; the Jacobian ``k^2 (uv)^(k-1)`` flattens the
singularity, and the integrand is assembled in log form so tiny nodes never
overflow.

:func:`rho_finiteness` is derived by hand from the edge and corner behaviour
of the integrand, not quoted from anywhere; the quadrature tests check it.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import InfiniteConstant
from .quadrature import QuadratureResult, integrate_1d, integrate_2d

#: exact value of iint_[0,1]^2 ln((x + y) / 2) dx dy
LOG_INTEGRAL_EXACT = math.log(2.0) - 1.5


class Finiteness(str, enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"


def rho_finiteness(p: float, q: float) -> Finiteness:
    """Whether the constant for ``(p, q)`` is finite.

    Near ``x = 0`` with ``q > 0`` the integrand behaves like
    ``2^(-p/q) x^(-p)``, integrable iff ``p < 1``.  For ``q < 0`` the only
    singular point is the origin where it grows like ``r^(-p)``, integrable
    in the plane iff ``p < 2``.  For ``q == 0`` the one-dimensional integrand
    is ``x^(-p/2)``.  At ``p == 0`` the log integrand is always integrable.
    """
    if p == 0:
        return Finiteness.FINITE
    if q > 0:
        ok = p < 1
    else:
        ok = p < 2
    return Finiteness.FINITE if ok else Finiteness.INFINITE


def rho_closed(p: float, q: float) -> float | None:
    """Closed form of the constant where one is catalogued, else ``None``."""
    if q == 0:
        if p == 0:
            return math.e
        if p >= 2:
            return math.inf
        return (1.0 - p / 2.0) ** (-2.0 / p)
    if p == 0 and q == 1:
        return 2.0 * math.sqrt(math.e)
    if p == 0 and q == -1:
        return math.exp(1.5) / 2.0
    return None


def substitution_power(p: float, q: float) -> float:
    """Exponent ``k`` of the substitution ``x = u^k`` used for ``(p, q)``."""
    if p > 0 and q > 0:
        return max(2.0, 2.0 / (1.0 - p))
    if p > 0:
        # corner singularity for q < 0, edge x^(-p/2) for q == 0
        return max(2.0, 4.0 / (2.0 - p))
    return 2.0


def _log_mean_term(q, k, lu, lv):
    # ln((x^-q + y^-q) / 2) with x = u^k, y = v^k, from ln u and ln v
    return np.logaddexp(-q * k * lu, -q * k * lv) - math.log(2.0)


def rho(p: float, q: float, tol: float = 1e-7, max_cells: int = 10**6) -> QuadratureResult:
    """Compute the constant by quadrature to absolute accuracy ``tol``.

    Raises :class:`InfiniteConstant` when :func:`rho_finiteness` says the
    integral diverges.  A result with ``converged=False`` ran out of cells.
    """
    p, q = float(p), float(q)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if rho_finiteness(p, q) is Finiteness.INFINITE:
        raise InfiniteConstant(f"the constant for p={p}, q={q} is infinite")
    if p == 0 and q == 0:
        return QuadratureResult(math.e, 0.0, 0, True)

    k = substitution_power(p, q)
    logk = math.log(k)

    if q == 0:
        def f1(u):
            lu = np.log(u)
            return np.exp(logk + (k - 1.0) * lu - 0.5 * p * k * lu)

        # rho = I^(2/p), so d rho = (2/p) I^(2/p - 1) dI
        res = integrate_1d(f1, 0.0, 1.0, lambda I: tol * abs(p) / 2.0 * I ** (1.0 - 2.0 / p),
                           max_cells=max_cells)
        val = res.value ** (2.0 / p)
        err = abs(2.0 / p) * res.value ** (2.0 / p - 1.0) * res.abs_error_estimate
        return QuadratureResult(val, err, res.cells, res.converged and err <= tol)

    if p == 0:
        def f0(u, v):
            lu, lv = np.log(u), np.log(v)
            jac = np.exp(2.0 * logk + (k - 1.0) * (lu + lv))
            return _log_mean_term(q, k, lu, lv) / q * jac

        res = integrate_2d(f0, (0.0, 1.0, 0.0, 1.0), lambda J: tol * math.exp(-J), max_cells=max_cells)
        val = math.exp(res.value)
        err = val * res.abs_error_estimate
        return QuadratureResult(val, err, res.cells, res.converged and err <= tol)

    def f(u, v):
        lu, lv = np.log(u), np.log(v)
        return np.exp((p / q) * _log_mean_term(q, k, lu, lv) + 2.0 * logk + (k - 1.0) * (lu + lv))

    res = integrate_2d(f, (0.0, 1.0, 0.0, 1.0), lambda I: tol * abs(p) * I ** (1.0 - 1.0 / p),
                       max_cells=max_cells)
    val = res.value ** (1.0 / p)
    err = abs(1.0 / p) * res.value ** (1.0 / p - 1.0) * res.abs_error_estimate
    return QuadratureResult(val, err, res.cells, res.converged and err <= tol)


def log_integral_selftest(tol: float = 1e-10, max_cells: int = 10**6) -> QuadratureResult:
    """Quadrature of iint ln((x + y) / 2); compare with :data:`LOG_INTEGRAL_EXACT`."""
    k = 2.0

    def f(u, v):
        lu, lv = np.log(u), np.log(v)
        jac = np.exp(2.0 * math.log(k) + (k - 1.0) * (lu + lv))
        return _log_mean_term(-1.0, k, lu, lv) * jac

    return integrate_2d(f, (0.0, 1.0, 0.0, 1.0), tol, max_cells=max_cells)
