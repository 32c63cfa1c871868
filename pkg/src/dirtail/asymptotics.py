"""Tail and density asymptotics, evaluated in log space.

The closed forms depend on the edge of the law: an atom of mass ``theta`` at
``b`` or a polynomial edge ``P{b - eta <= y} ~ lam * y**r``. The
saddlepoint estimate uses the exact tilt ``t(x)`` and the exact prefactor
series instead of their large-``x`` expansions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import special

from .constants import AsymptoticConstants, asymptotic_constants
from .distributions import CgfEval, DistributionSpec, get_cgf
from .errors import ConfigError, NumericError
from .saddle import solve_t
from .series import prefactor_series, variance_series

__all__ = [
    "TailEstimate",
    "tail_atom",
    "tail_poly",
    "density_atom",
    "density_poly",
    "tail_saddlepoint",
    "tail_thm",
    "density_thm",
    "LOG_UNDERFLOW",
]

LOG_UNDERFLOW = -700.0
_LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class TailEstimate:
    """A tail probability or density value carried by its logarithm.

    Attributes
    ----------
    x : float
    log_value : float
    method : str
        One of ``thm1``, ``thm2``, ``thm3_density``, ``thm4_density``,
        ``saddlepoint``, ``monte_carlo``, ``oracle``.
    error_info : dict
        Standard error, remainder bracket or intermediate quantities.
    """

    x: float
    log_value: float
    method: str
    error_info: dict = field(default_factory=dict)

    @property
    def value(self):
        return math.exp(self.log_value) if self.log_value > LOG_UNDERFLOW else 0.0

    def to_dict(self):
        return {
            "x": self.x,
            "method": self.method,
            "log_value": self.log_value,
            "value": self.value if self.log_value >= LOG_UNDERFLOW else None,
            "error_info": dict(self.error_info),
        }


def _check_consts(consts):
    if not isinstance(consts, AsymptoticConstants):
        raise ConfigError("expected AsymptoticConstants")
    if consts.alpha < 1.0 and consts.sigma_sq is None:
        raise ConfigError("sigma_sq is required for alpha < 1")


def _exponent(consts, x):
    """The common double-exponential or stretched-exponential decay term."""
    a, b = consts.alpha, consts.b
    if a == 1.0:
        return -b * math.exp((x - consts.q) / b)
    base = x - b * consts.gamma_alpha
    if base <= 0:
        raise NumericError(f"x={x} is below b*gamma_alpha; the asymptotic form is undefined")
    c = ((1.0 - a) / (a * consts.sigma_sq) ** a) ** (1.0 / (1.0 - a))
    return -c * base ** (1.0 / (1.0 - a))


def _check_x(x):
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise ConfigError(f"x must be finite and positive, got {x}")
    return x


def _poly_log(consts, lam, r, x, extra, include_shift=False):
    """Shared log-form for the polynomial edge; ``extra`` is 0 for the tail
    and 1 for the density (it shifts the powers by ``alpha``)."""
    a, b, s2 = consts.alpha, consts.b, consts.sigma_sq
    head = 0.5 * ((r * a - 1.0) * _LOG2PI - math.log(lam) - special.gammaln(r + 1.0))
    if a == 1.0:
        head -= 0.5 * math.log(b)
        lin = (r - 1.0 + 2.0 * extra) / (2.0 * b) * (x - consts.q)
        return head + lin + _exponent(consts, x)
    p = (r + 2.0 * extra) * a - 1.0
    w = 1.0 / (2.0 * (1.0 - a))
    const = w * (p * (math.log(1.0 - a) - math.log(a)) - (r - 1.0 + 2.0 * extra) * a * math.log(s2))
    shift = 0.0
    if include_shift:
        r_a = a * s2 / (1.0 - a)
        shift = 0.5 * r * (r_a ** (a / (1.0 - a)) - 1.0)
    return head + const + shift + p * w * math.log(x) + _exponent(consts, x)


def _atom_log(consts, theta, x, extra):
    a, b, s2 = consts.alpha, consts.b, consts.sigma_sq
    if a == 1.0:
        lin = (2.0 * extra - 1.0) / (2.0 * b) * (x - consts.q)
        return -0.5 * math.log(2.0 * math.pi * theta * b) + lin + _exponent(consts, x)
    p = 2.0 * extra * a - 1.0
    w = 1.0 / (2.0 * (1.0 - a))
    const = w * (p * (math.log(1.0 - a) - math.log(a)) - (2.0 * extra - 1.0) * a * math.log(s2))
    return -0.5 * (_LOG2PI + math.log(theta)) + const + p * w * math.log(x) + _exponent(consts, x)


def tail_atom(consts, theta, x):
    """Asymptotic ``log P{S > x}`` for a law with an atom ``theta`` at ``b``.

    Parameters
    ----------
    consts : AsymptoticConstants
    theta : float
        Mass of the atom at the right end point.
    x : float

    Returns
    -------
    TailEstimate
    """
    _check_consts(consts)
    x = _check_x(x)
    if not 0.0 < theta < 1.0:
        raise ConfigError("theta must lie in (0, 1)")
    return TailEstimate(x, _atom_log(consts, theta, x, 0), "thm1")


def tail_poly(consts, lambda_, r, x, *, include_shift=False):
    """Asymptotic ``log P{S > x}`` for a polynomial edge ``lambda_ * y**r``.

    With ``r = 0`` and ``lambda_ = theta`` this coincides with
    :func:`tail_atom`.

    Parameters
    ----------
    consts : AsymptoticConstants
    lambda_, r : float
        Edge law ``P{b - eta <= y} ~ lambda_ * y**r``.
    x : float
    include_shift : bool
        For ``alpha < 1``, add ``(r/2) * (r_alpha**(alpha/(1-alpha)) - 1)``
        to the log. Composing the expansions of the prefactor series and of
        ``t(x)`` makes this constant vanish, and the saddlepoint estimate
        agrees only without it; the option is kept for comparison.
    """
    _check_consts(consts)
    x = _check_x(x)
    if lambda_ <= 0 or r < 0:
        raise ConfigError("need lambda_ > 0 and r >= 0")
    return TailEstimate(x, _poly_log(consts, lambda_, r, x, 0, include_shift), "thm2")


def density_atom(consts, theta, x):
    """Asymptotic log density at ``x`` for a law with an atom at ``b``."""
    _check_consts(consts)
    x = _check_x(x)
    if not 0.0 < theta < 1.0:
        raise ConfigError("theta must lie in (0, 1)")
    return TailEstimate(x, _atom_log(consts, theta, x, 1), "thm3_density")


def density_poly(consts, lambda_, r, x, *, include_shift=False):
    """Asymptotic log density at ``x`` for a polynomial edge.

    ``include_shift`` has the same meaning as in :func:`tail_poly`.
    """
    _check_consts(consts)
    x = _check_x(x)
    if lambda_ <= 0 or r < 0:
        raise ConfigError("need lambda_ > 0 and r >= 0")
    return TailEstimate(x, _poly_log(consts, lambda_, r, x, 1, include_shift), "thm4_density")


def _as_cgf(obj):
    if isinstance(obj, DistributionSpec):
        return get_cgf(obj)
    if isinstance(obj, CgfEval):
        return obj
    raise ConfigError("expected a DistributionSpec or CgfEval")


def _edge_params(spec):
    if spec.edge == "atom":
        return spec.theta
    if spec.edge == "poly":
        return spec.lam, spec.r
    raise ConfigError(f"{spec.label} has no right edge; no asymptotic formula applies")


def tail_thm(spec, alpha, x):
    """Dispatch to :func:`tail_atom` or :func:`tail_poly` from the law's edge."""
    cgf = _as_cgf(spec)
    params = _edge_params(cgf.spec)
    consts = asymptotic_constants(cgf, alpha)
    if cgf.spec.edge == "atom":
        return tail_atom(consts, params, x)
    return tail_poly(consts, *params, x)


def density_thm(spec, alpha, x):
    """Dispatch to :func:`density_atom` or :func:`density_poly`."""
    cgf = _as_cgf(spec)
    params = _edge_params(cgf.spec)
    consts = asymptotic_constants(cgf, alpha)
    if cgf.spec.edge == "atom":
        return density_atom(consts, params, x)
    return density_poly(consts, *params, x)


def tail_saddlepoint(cgf, alpha, x, *, variance="constant"):
    """Saddlepoint approximation of ``log P{S > x}``.

    ``P(t) + t*(M(t) - x) - log(t)/(2 alpha) - log(2 pi sigma_sq)/2`` at the
    solved tilt ``t = t(x)``. The residual term makes the first part equal to
    ``Lambda(t) - t*x`` exactly, so errors in ``t`` enter only at second
    order.

    Parameters
    ----------
    cgf : DistributionSpec or CgfEval
    alpha : float
    x : float
        Level, at least 2.
    variance : {"constant", "finite_t"}
        ``"constant"`` uses the limiting ``sigma_sq``; ``"finite_t"`` uses
        ``t**(2 - 1/alpha) * V(t)`` from the variance series.
    """
    cgf = _as_cgf(cgf)
    x = float(x)
    if not x >= 2.0:
        raise ConfigError("the saddlepoint tail needs x >= 2; use the Monte Carlo estimator below that")
    sp = solve_t(cgf, alpha, x)
    t = sp.t
    pref = prefactor_series(cgf, alpha, t)
    if variance == "constant":
        s2 = asymptotic_constants(cgf, alpha).sigma_sq
    elif variance == "finite_t":
        s2 = t ** (2.0 - 1.0 / alpha) * variance_series(cgf, alpha, t).value
    else:
        raise ConfigError("variance must be 'constant' or 'finite_t'")
    log_value = pref.value + t * sp.residual - math.log(t) / (2.0 * alpha) - 0.5 * math.log(2.0 * math.pi * s2)
    info = {"t": t, "residual": sp.residual, "prefactor": pref.value, "sigma_sq": s2,
            "series_remainder_bound": pref.remainder_bound}
    return TailEstimate(x, log_value, "saddlepoint", info)
