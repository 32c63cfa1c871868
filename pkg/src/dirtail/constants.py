"""Constants governing the right-tail asymptotics.

``gamma_rho``
    ``lim_n (sum_{k<=n} k**-rho - n**(1-rho)/(1-rho))`` (``log n`` when ``rho = 1``).
``sigma_sq``
    Limiting variance of the tilted, centered and rescaled series.
``kappa``
    ``int_0^inf x**(-1-1/alpha) psi(x) dx`` for ``alpha < 1``.
``q_const``
    Constant term of the tilted mean when ``alpha = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _rng
from .distributions import CgfEval, DistributionSpec, get_cgf
from .errors import ConfigError
from .quadrature import quad
from .series import check_alpha

__all__ = [
    "AsymptoticConstants",
    "gamma_rho",
    "sigma_sq",
    "sigma_sq_dual",
    "kappa",
    "q_const",
    "asymptotic_constants",
]

_GAMMA_M = 1 << 20


@dataclass(frozen=True)
class AsymptoticConstants:
    """Constants for one law and one exponent ``alpha``.

    ``kappa`` and ``r_alpha`` are ``None`` when ``alpha == 1``.
    """

    alpha: float
    b: float
    gamma_alpha: float
    sigma_sq: float
    kappa: float | None
    r_alpha: float | None
    q: float
    dual_sigma_rel_err: float
    kappa_identity_rel_err: float
    method_notes: tuple = field(default=())

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "gamma_alpha": self.gamma_alpha,
            "sigma_sq": self.sigma_sq,
            "kappa": self.kappa,
            "r_alpha": self.r_alpha,
            "q": self.q,
            "checks": {
                "dual_sigma_rel_err": self.dual_sigma_rel_err,
                "kappa_identity_rel_err": self.kappa_identity_rel_err,
            },
        }


def _as_cgf(obj):
    if isinstance(obj, DistributionSpec):
        obj = get_cgf(obj)
    if not isinstance(obj, CgfEval):
        raise ConfigError("expected a DistributionSpec or CgfEval")
    if obj.spec.edge is None:
        raise ConfigError("the Gaussian check law has no right edge; tail constants are undefined")
    return obj


@lru_cache(maxsize=64)
def _gamma_rho_cached(rho, m):
    k = np.arange(1, m, dtype=float)
    head = _rng.neumaier_sum(k ** (-rho))
    if rho == 1.0:
        reg = math.log(m)
    else:
        reg = m ** (1.0 - rho) / (1.0 - rho)
    # Euler-Maclaurin tail of x**-rho from m on, with the divergent integral removed
    tail = 0.5 * m ** (-rho) + rho * m ** (-rho - 1.0) / 12.0
    bound = rho * m ** (-rho - 1.0) / 12.0
    return head - reg + tail, bound


def gamma_rho(rho, *, m=_GAMMA_M, return_bound=False):
    """Generalized Euler constant for ``rho`` in ``(0, 1]``.

    Parameters
    ----------
    rho : float
    m : int
        Terms below ``m`` are summed exactly; the rest uses the two-term
        Euler-Maclaurin formula.
    return_bound : bool
        Also return the Euler-Maclaurin remainder bound.

    Examples
    --------
    >>> round(gamma_rho(1.0), 12)
    0.577215664902
    """
    rho = float(rho)
    if not 0.0 < rho <= 1.0:
        raise ConfigError("rho must lie in (0, 1]")
    val, bound = _gamma_rho_cached(rho, int(m))
    return (val, bound) if return_bound else val


def _sigma_from_psi2(cgf, alpha):
    w = 1.0 - 1.0 / alpha
    head, _ = quad(lambda x: cgf.psi(x, 2), 0.0, 1.0, weight_exp=w)
    tail, _ = quad(lambda x: x**w * cgf.psi(x, 2), 1.0, np.inf)
    return (head + tail) / alpha


def _kappa_finite_part(cgf, alpha):
    """``int_0^1 x**(-1-1/a) psi + int_1^inf x**(-1-1/a) (psi - b x)``."""
    w = 1.0 - 1.0 / alpha
    head, _ = quad(lambda x: cgf.psi(x, 0) / (x * x) if x > 0 else 0.5 * cgf.psi(0.0, 2),
                   0.0, 1.0, weight_exp=w)
    tail, _ = quad(lambda x: x ** (-1.0 - 1.0 / alpha) * cgf.L(x), 1.0, np.inf)
    return head + tail


def sigma_sq(cgf, alpha):
    """``alpha**-1 int_0^inf x**(1-1/alpha) psi''(x) dx``."""
    cgf = _as_cgf(cgf)
    alpha = check_alpha(alpha)
    return _sigma_from_psi2(cgf, alpha)


def sigma_sq_dual(cgf, alpha):
    """The same constant from ``psi`` itself.

    ``(1-alpha) alpha**-3 int_0^inf x**(-1-1/alpha) psi(x) dx``, with the
    linear growth of ``psi`` integrated in closed form so that the expression
    stays finite at ``alpha = 1`` where it equals ``b``.
    """
    cgf = _as_cgf(cgf)
    alpha = check_alpha(alpha)
    b = cgf.b
    if alpha == 1.0:
        return b
    return (1.0 - alpha) / alpha**3 * _kappa_finite_part(cgf, alpha) + b / alpha**2


def kappa(cgf, alpha):
    """``int_0^inf x**(-1-1/alpha) psi(x) dx`` for ``alpha < 1``."""
    cgf = _as_cgf(cgf)
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        raise ConfigError("kappa diverges at alpha = 1")
    return _kappa_finite_part(cgf, alpha) + cgf.b * alpha / (1.0 - alpha)


def q_const(cgf):
    """``b*gamma_1 + int_0^1 psi'(x)/x dx + int_1^inf (psi'(x) - b)/x dx``."""
    cgf = _as_cgf(cgf)
    head, _ = quad(lambda x: cgf.psi(x, 1) / x if x > 0 else cgf.psi(0.0, 2), 0.0, 1.0)
    tail, _ = quad(lambda x: cgf.lprime(x) / x, 1.0, np.inf)
    return cgf.b * gamma_rho(1.0) + head + tail


@lru_cache(maxsize=128)
def _constants_cached(spec, mode, alpha):
    cgf = get_cgf(spec, mode)
    b = cgf.b
    notes = ["sigma_sq from the psi'' integral; checked against the psi integral"]
    s2 = _sigma_from_psi2(cgf, alpha)
    s2_dual = sigma_sq_dual(cgf, alpha)
    if alpha == 1.0:
        kap = None
        r_alpha = None
        kap_err = 0.0
        notes.append("alpha = 1: the psi form is taken at its limit b")
    else:
        kap = kappa(cgf, alpha)
        r_alpha = alpha * s2 / (1.0 - alpha)
        kap_err = abs((1.0 - alpha) / alpha**2 * kap - alpha * s2) / (alpha * s2)
    dual_err = abs(s2_dual - s2) / s2
    return AsymptoticConstants(
        alpha=alpha,
        b=b,
        gamma_alpha=gamma_rho(alpha),
        sigma_sq=s2,
        kappa=kap,
        r_alpha=r_alpha,
        q=q_const(cgf),
        dual_sigma_rel_err=dual_err,
        kappa_identity_rel_err=kap_err,
        method_notes=tuple(notes),
    )


def asymptotic_constants(spec, alpha):
    """All constants for ``spec`` and ``alpha``, cached per pair.

    Parameters
    ----------
    spec : DistributionSpec or CgfEval
    alpha : float
        Exponent in ``(1/2, 1]``.

    Returns
    -------
    AsymptoticConstants
    """
    cgf = _as_cgf(spec)
    return _constants_cached(cgf.spec, cgf.mode, check_alpha(alpha))
