"""Solve ``M(t) = x`` for the tilt parameter and its closed-form expansions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .constants import asymptotic_constants
from .distributions import CgfEval, DistributionSpec, get_cgf
from .errors import BracketError, ConfigError, NumericError
from .series import check_alpha, mean_series, variance_series

__all__ = ["SaddlePoint", "solve_t", "t_expansion", "saddle_tolerance"]

_MAX_DOUBLINGS = 200
_MAX_ITERS = 100


@dataclass(frozen=True)
class SaddlePoint:
    """Root of ``M(t) = x``.

    Attributes
    ----------
    x : float
    t : float
    residual : float
        ``M(t) - x`` at the returned ``t``.
    newton_iters : int
    guess_source : str
        ``"expansion"`` when the closed-form expansion seeded Newton,
        ``"linear"`` for the small-``x`` guess and ``"exact"`` for ``x = 0``.
    """

    x: float
    t: float
    residual: float
    newton_iters: int
    guess_source: str

    def to_dict(self):
        return {"x": self.x, "t": self.t, "residual": self.residual, "iters": self.newton_iters}


def saddle_tolerance(x):
    return 1e-10 * (1.0 + abs(x))


def t_expansion(consts, x, edge="atom", r=None):
    """Closed-form large-``x`` approximation of the root of ``M(t) = x``.

    Parameters
    ----------
    consts : AsymptoticConstants
    x : float or ndarray
    edge : {"atom", "poly"}
    r : float, optional
        Edge exponent, required when ``edge == "poly"``.

    Returns
    -------
    float or ndarray
        ``nan`` where the expansion is not defined.
    """
    x = np.asarray(x, dtype=float)
    b, a = consts.b, consts.alpha
    if edge not in ("atom", "poly"):
        raise ConfigError("edge must be 'atom' or 'poly'")
    if edge == "poly" and r is None:
        raise ConfigError("r is required for a polynomial edge")
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        if a == 1.0:
            out = np.exp((x - consts.q) / b)
            if edge == "poly":
                out = out - r / (2.0 * b)
        else:
            ra = consts.r_alpha
            base = (x - b * consts.gamma_alpha) / ra
            if edge == "poly":
                base = base - 0.5 * r * ra ** ((2.0 * a - 1.0) / (1.0 - a)) * x ** (-a / (1.0 - a))
            out = np.where(base > 0, np.abs(base) ** (a / (1.0 - a)), np.nan)
        out = np.where(out > 0, out, np.nan)
    return float(out) if out.ndim == 0 else out


def _as_cgf(obj):
    if isinstance(obj, DistributionSpec):
        return get_cgf(obj)
    if isinstance(obj, CgfEval):
        return obj
    raise ConfigError("expected a DistributionSpec or CgfEval")


def _initial_guess(cgf, alpha, x):
    spec = cgf.spec
    if spec.edge is not None:
        try:
            consts = asymptotic_constants(cgf, alpha)
            guess = t_expansion(consts, x, spec.edge, spec.r)
            if np.isfinite(guess) and guess > 0:
                return guess, "expansion"
        except NumericError:
            pass
    var = cgf.psi(0.0, 2) * float(special.zeta(2.0 * alpha))
    return x / var, "linear"


def solve_t(spec, alpha, x, *, tol=None):
    """Solve ``M(t) = x`` by Newton's method in ``log t`` inside a bracket.

    Parameters
    ----------
    spec : DistributionSpec or CgfEval
    alpha : float
    x : float
        Level, ``x >= 0``.
    tol : float, optional
        Residual tolerance, default ``1e-10 * (1 + x)``.

    Returns
    -------
    SaddlePoint

    Notes
    -----
    Iterates leaving the bracket are pulled back by halving the step; if that
    fails the bracket midpoint is used. Iteration continues past ``tol`` until
    the step stalls at rounding level so the root is as sharp as the series
    evaluation allows.
    """
    cgf = _as_cgf(spec)
    alpha = check_alpha(alpha)
    x = float(x)
    if not np.isfinite(x) or x < 0:
        raise ConfigError(f"x must be finite and non-negative, got {x}")
    if tol is None:
        tol = saddle_tolerance(x)
    if x == 0.0:
        return SaddlePoint(0.0, 0.0, 0.0, 0, "exact")

    def M(t):
        return mean_series(cgf, alpha, t).value

    t0, source = _initial_guess(cgf, alpha, x)
    m0 = M(t0)
    # bracket in log t
    lo = hi = t0
    m_lo = m_hi = m0
    n = 0
    while m_hi < x:
        lo, m_lo = hi, m_hi
        hi *= 2.0
        m_hi = M(hi)
        n += 1
        if n > _MAX_DOUBLINGS:
            raise BracketError(f"no upper bracket for x={x} after {_MAX_DOUBLINGS} doublings")
    n = 0
    while m_lo > x:
        hi, m_hi = lo, m_lo
        lo *= 0.5
        m_lo = M(lo)
        n += 1
        if n > _MAX_DOUBLINGS:
            raise BracketError(f"no lower bracket for x={x} after {_MAX_DOUBLINGS} halvings")
    u_lo, u_hi = math.log(lo), math.log(hi)
    u = math.log(t0)
    res = m0 - x
    best = (abs(res), t0, res)
    iters = 0
    for iters in range(1, _MAX_ITERS + 1):
        t = math.exp(u)
        dm = t * variance_series(cgf, alpha, t).value
        step = -res / dm if dm > 0 else 0.0
        u_new = u + step
        k = 0
        while not (u_lo < u_new < u_hi) and k < 60:
            step *= 0.5
            u_new = u + step
            k += 1
        if not (u_lo < u_new < u_hi):
            u_new = 0.5 * (u_lo + u_hi)
        u_prev = u
        u = u_new
        t = math.exp(u)
        res = M(t) - x
        if res > 0:
            u_hi = min(u_hi, u)
        elif res < 0:
            u_lo = max(u_lo, u)
        if abs(res) < best[0]:
            best = (abs(res), t, res)
        if res == 0.0 or abs(u - u_prev) <= 1e-15 * max(1.0, abs(u)):
            break
        if u_hi - u_lo <= 4e-16 * max(1.0, abs(u)):
            break
    _, t_best, res_best = best
    if abs(res_best) > tol:
        raise NumericError(f"Newton did not reach tolerance for x={x}: residual {res_best:.3e}")
    return SaddlePoint(x, t_best, res_best, iters, source)
