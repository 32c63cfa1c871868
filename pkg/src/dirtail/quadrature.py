"""Thin wrappers around QUADPACK for the integrals used throughout."""
import math
import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureError

EPSREL = 1e-13
_LIMIT = 400


def quad(f, a, b, *, epsrel=EPSREL, epsabs=0.0, weight_exp=None, points=None, strict=1e-8):
    """Adaptive Gauss-Kronrod quadrature of ``f`` on ``[a, b]``.

    Parameters
    ----------
    f : callable
        Scalar integrand.
    a, b : float
        Limits; ``b`` may be ``inf``.
    weight_exp : float, optional
        If given, integrate ``f(x) * (x - a)**weight_exp`` using the algebraic
        end-point weight, which handles the singularity at ``a`` exactly.
    strict : float
        Raise :class:`QuadratureError` when the error estimate exceeds
        ``strict * max(1, |value|)``.

    Returns
    -------
    value, abserr : float
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if weight_exp is not None:
            val, err = integrate.quad(f, a, b, weight="alg", wvar=(weight_exp, 0.0),
                                      epsabs=epsabs, epsrel=epsrel, limit=_LIMIT)
        else:
            val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=_LIMIT,
                                      points=points)
    if not np.isfinite(val) or err > strict * max(1.0, abs(val)):
        raise QuadratureError(
            f"quadrature on [{a}, {b}] did not converge: value={val!r}, error estimate={err!r}")
    return val, err


def quad_power_weighted(f, upper, power, *, epsrel=EPSREL):
    """``int_0^upper y**power * f(y) dy`` for ``power > -1``.

    The piece on ``[0, min(1, upper)]`` uses the algebraic weight; the rest is
    split into decades so that wide ranges stay accurate.
    """
    if upper <= 0:
        return 0.0, 0.0
    first = min(1.0, upper)
    val, err = quad(f, 0.0, first, weight_exp=power, epsrel=epsrel)
    parts, errs = [val], [err]
    if upper > 1.0:
        g = lambda y: y**power * f(y)  # noqa: E731
        if np.isinf(upper):
            v, e = quad(g, 1.0, np.inf, epsrel=epsrel)
            parts.append(v)
            errs.append(e)
        else:
            lo = 1.0
            while lo < upper:
                hi = min(upper, lo * 10.0)
                v, e = quad(g, lo, hi, epsrel=epsrel)
                parts.append(v)
                errs.append(e)
                lo = hi
    return math.fsum(parts), math.fsum(errs)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def log_grid_integral(h, lo, hi, panels_per_decade=4):
    """Rough ``int_lo^hi h(y) dy`` for a vectorized ``h`` using Gauss-Legendre
    panels in ``log y``. Intended for cheap estimates, not final values."""
    if hi <= lo:
        return 0.0
    a, b = math.log(lo), math.log(hi)
    n = max(2, int(math.ceil((b - a) / math.log(10.0) * panels_per_decade)))
    edges = np.linspace(a, b, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    y = np.exp(u)
    return float(np.sum(w * y * h(y)))
