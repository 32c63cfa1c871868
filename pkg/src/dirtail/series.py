"""Dirichlet-type series with Euler-Maclaurin tails.

Each series has the form ``sum_k k**(-p*alpha) * F(t / k**alpha)`` where ``F``
is built from the cumulant generating function. Terms ``k < k_cut`` are summed
explicitly with compensated summation and the remainder is replaced by the
two-term Euler-Maclaurin formula, whose error is bounded by
``(1/12) * int_{k_cut}^inf |f''|``. ``k_cut`` is doubled from 64 until that
bound falls below ``rtol`` times the size of the series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from . import _rng
from .distributions import CgfEval, DistributionSpec, get_cgf
from .errors import ConfigError
from .quadrature import log_grid_integral, quad, quad_power_weighted

__all__ = [
    "SeriesResult",
    "em_finite",
    "em_infinite",
    "mean_series",
    "cgf_series",
    "prefactor_series",
    "variance_series",
    "check_alpha",
]

_CHUNK = 1 << 20
_K0 = 64


@dataclass(frozen=True)
class SeriesResult:
    """Value of a series with its truncation point and certified remainder.

    Attributes
    ----------
    value : float
        Explicit partial sum plus the Euler-Maclaurin tail.
    k_cut : int
        First index handled by the tail formula.
    tail_correction : float
        Contribution of the tail formula (integral plus end-point terms).
    remainder_bound : float
        Upper bound on ``|true value - value|`` from the Euler-Maclaurin remainder.
    """

    value: float
    k_cut: int
    tail_correction: float
    remainder_bound: float


def check_alpha(alpha):
    alpha = float(alpha)
    if not (0.5 < alpha <= 1.0):
        raise ConfigError(f"alpha must lie in (1/2, 1], got {alpha}")
    return alpha


def _check_t(t):
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise ConfigError(f"t must be finite and non-negative, got {t}")
    return t


def em_finite(f, fp, fpp, m, n):
    """Euler-Maclaurin approximation of ``sum_{j=m}^{n} f(j)``.

    Uses ``int_m^n f + (f(n) + f(m))/2 + (f'(n) - f'(m))/12`` with remainder
    bounded by ``(1/12) int_m^n |f''|``.
    """
    m, n = int(m), int(n)
    if n < m:
        raise ConfigError("need n >= m")
    if n == m:
        return SeriesResult(float(f(m)), m, 0.0, 0.0)
    integral, _ = quad(f, m, n)
    ends = 0.5 * (f(n) + f(m)) + (fp(n) - fp(m)) / 12.0
    bound, _ = quad(lambda x: abs(fpp(x)), m, n)
    return SeriesResult(integral + ends, n, integral + ends, bound / 12.0)


def em_infinite(f, fp, fpp, m, *, integral=None, fpp_abs_integral=None):
    """Euler-Maclaurin approximation of ``sum_{j>=m} f(j)``.

    Uses ``int_m^inf f + f(m)/2 - f'(m)/12`` with remainder bounded by
    ``(1/12) int_m^inf |f''|``. Precomputed integrals may be supplied when a
    change of variables evaluates them more accurately.
    """
    m = int(m)
    if integral is None:
        integral, _ = quad(f, m, np.inf)
    if fpp_abs_integral is None:
        fpp_abs_integral, _ = quad(lambda x: abs(fpp(x)), m, np.inf)
    tail = integral + 0.5 * f(m) - fp(m) / 12.0
    return SeriesResult(tail, m, tail, fpp_abs_integral / 12.0)


# ---------------------------------------------------------------------------
# series engine

# weight power p and small-argument order j of F for each series
_KINDS = {"mean": (1, 1), "cgf": (0, 2), "prefactor": (0, 2), "variance": (2, 0)}


def _parts(core, kind, s):
    if kind == "mean":
        return core.d1, core.d2, core.d3
    if kind == "cgf":
        return core.psi, core.d1, core.d2
    if kind == "prefactor":
        return core.pterm, -s * core.d2, -core.d2 - s * core.d3
    return core.d2, core.d3, core.d4


class _Summand:
    """``g(x) = x**-a * F(t * x**-alpha)`` with chain-rule derivatives."""

    def __init__(self, cgf, kind, alpha, t):
        self.cgf, self.kind, self.alpha, self.t = cgf, kind, alpha, t
        self.p, self.j = _KINDS[kind]
        self.a = self.p * alpha

    def derivs(self, x):
        x = np.asarray(x, dtype=float)
        al, a = self.alpha, self.a
        s = self.t * x ** (-al)
        F, F1, F2 = _parts(self.cgf.core(s), self.kind, s)
        g = x ** (-a) * F
        g1 = x ** (-a - 1.0) * (-a * F - al * s * F1)
        g2 = x ** (-a - 2.0) * (a * (a + 1.0) * F + al * (2.0 * a + 1.0 + al) * s * F1
                                + al * al * s * s * F2)
        return g, g1, g2

    def terms(self, k0, k1):
        k = np.arange(k0, k1, dtype=float)
        s = self.t * k ** (-self.alpha)
        F = _parts(self.cgf.core(s), self.kind, s)[0]
        return k ** (-self.a) * F

    def tail_integral(self, m):
        """``int_m^inf g`` through the substitution ``y = t * x**-alpha``."""
        al, t, j = self.alpha, self.t, self.j
        upper = t * float(m) ** (-al)
        kind = self.kind
        var0 = self.cgf.psi(0.0, 2)
        at_zero = {"mean": var0, "cgf": 0.5 * var0, "prefactor": -0.5 * var0, "variance": var0}[kind]

        def h(y):
            if y <= 0.0:
                return at_zero
            ya = np.array([y])
            F = _parts(self.cgf.core(ya), kind, ya)[0][0]
            return F / y**j

        power = self.p - 1.0 - 1.0 / al + j
        val, _ = quad_power_weighted(h, upper, power)
        return t ** ((1.0 - self.a) / al) / al * val

    def _fpp_abs_y(self, y):
        al, t = self.alpha, self.t
        x = (t / y) ** (1.0 / al)
        g2 = self.derivs(x)[2]
        return np.abs(g2) * (t ** (1.0 / al) / al) * y ** (-1.0 / al - 1.0)

    def fpp_abs_estimate(self, m):
        """Cheap estimate of ``int_m^inf |g''|`` used to choose ``k_cut``."""
        upper = self.t * float(m) ** (-self.alpha)
        return log_grid_integral(self._fpp_abs_y, upper * 1e-14, upper)

    def fpp_abs_integral(self, m):
        al, t = self.alpha, self.t
        upper = t * float(m) ** (-al)
        scale = t ** (1.0 / al) / al

        def h(y):
            x = (t / y) ** (1.0 / al)
            g2 = self.derivs(np.array([x]))[2][0]
            return abs(g2) * scale * y ** (-1.0 / al - 1.0)

        val, _ = quad_power_weighted(h, upper, 0.0)
        return val


def _explicit_sum(summand, k0, k1):
    parts = []
    for lo in range(k0, k1, _CHUNK):
        hi = min(k1, lo + _CHUNK)
        parts.append(_rng.neumaier_sum(summand.terms(lo, hi)))
    return math.fsum(parts)


@lru_cache(maxsize=4096)
def _series_cached(spec, mode, kind, alpha, t, rtol, m_max):
    cgf = get_cgf(spec, mode)
    summand = _Summand(cgf, kind, alpha, t)
    # size of the series: terms up to the transition plus the integral beyond
    k_mid = max(2, min(int(t ** (1.0 / alpha)) + 1, _K0))
    x = np.exp(np.linspace(0.0, math.log(t ** (1.0 / alpha) + 2.0) + 2.0, 400))
    scale = abs(_explicit_sum(summand, 1, k_mid)) + float(np.max(np.abs(summand.derivs(x)[0]) * x))
    tol = rtol * max(scale, 1e-300)
    m = _K0
    while summand.fpp_abs_estimate(m) / 12.0 > 0.5 * tol and m < m_max:
        m *= 2
    bound = summand.fpp_abs_integral(m) / 12.0
    g, gp, _ = (float(v[0]) for v in summand.derivs(np.array([float(m)])))
    tail = em_infinite(lambda x: g, lambda x: gp, None, m,
                       integral=summand.tail_integral(m), fpp_abs_integral=12.0 * bound)
    head = _explicit_sum(summand, 1, m)
    return SeriesResult(head + tail.value, m, tail.value, tail.remainder_bound)


def _series(cgf, kind, alpha, t, rtol, m_max):
    alpha = check_alpha(alpha)
    t = _check_t(t)
    if isinstance(cgf, DistributionSpec):
        cgf = get_cgf(cgf)
    if not isinstance(cgf, CgfEval):
        raise ConfigError("expected a DistributionSpec or CgfEval")
    if t == 0.0:
        if kind == "variance":
            val = cgf.psi(0.0, 2) * float(special.zeta(2.0 * alpha))
            return SeriesResult(val, 0, 0.0, 0.0)
        return SeriesResult(0.0, 0, 0.0, 0.0)
    return _series_cached(cgf.spec, cgf.mode, kind, alpha, t, float(rtol), int(m_max))


def mean_series(cgf, alpha, t, *, rtol=1e-12, m_max=1 << 24):
    """``M(t) = sum_k k**-alpha * psi'(t / k**alpha)``, the tilted mean."""
    return _series(cgf, "mean", alpha, t, rtol, m_max)


def cgf_series(cgf, alpha, t, *, rtol=1e-12, m_max=1 << 24):
    """``Lambda(t) = sum_k psi(t / k**alpha)``, the cumulant generating function of the series."""
    return _series(cgf, "cgf", alpha, t, rtol, m_max)


def prefactor_series(cgf, alpha, t, *, rtol=1e-12, m_max=1 << 24):
    """``P(t) = sum_k [psi(s_k) - s_k psi'(s_k)]`` with ``s_k = t / k**alpha``.

    Equals ``Lambda(t) - t*M(t)``, computed termwise to avoid cancellation.
    """
    return _series(cgf, "prefactor", alpha, t, rtol, m_max)


def variance_series(cgf, alpha, t, *, rtol=1e-12, m_max=1 << 24):
    """``V(t) = sum_k k**(-2 alpha) * psi''(t / k**alpha)``, the tilted variance."""
    return _series(cgf, "variance", alpha, t, rtol, m_max)
