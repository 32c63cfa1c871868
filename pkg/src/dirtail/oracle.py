"""Exact enumeration of truncated sums for finite laws, and remainder brackets.

For a law with ``m`` atoms the truncated sum ``S_k = sum_{j<=k} j**-alpha eta_j``
takes at most ``m**k`` values, so ``P{S_k > x}`` can be computed exactly. The
remainder ``R_k = S - S_k`` is controlled with Hoeffding's inequality, giving
a certified bracket for ``P{S > x}``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba as nb
import numpy as np
from scipy import optimize

from .distributions import DistributionSpec
from .errors import ConfigError
from .series import check_alpha, em_infinite

__all__ = [
    "OracleBracket",
    "enumerate_tail",
    "remainder_bracket",
    "hoeffding_tail_sum",
    "hoeffding_bound",
    "optimal_bracket",
]

ENUM_BUDGET = 1 << 26
MAX_K = 24
_NBINS = 1 << 16
_PREFIX_TASKS = 64


@dataclass(frozen=True)
class OracleBracket:
    """Exact truncated tail and a bracket for the full-series tail.

    Attributes
    ----------
    k : int
    x : float
    p_exact_truncated : float
        ``P{S_k > x}``.
    lower, upper : float
        ``lower <= P{S > x} <= upper``.
    epsilon : float
        Threshold shift used for the bracket.
    """

    k: int
    x: float
    p_exact_truncated: float
    lower: float
    upper: float
    epsilon: float

    def to_dict(self):
        return {"k": self.k, "x": self.x, "p_exact_truncated": self.p_exact_truncated,
                "lower": self.lower, "upper": self.upper, "epsilon": self.epsilon}


# ---------------------------------------------------------------------------
# remainder control

def hoeffding_tail_sum(alpha, k):
    """Upper bound on ``sum_{j>k} j**(-2 alpha)``.

    Euler-Maclaurin value plus its remainder bound, so the result never
    underestimates the sum.
    """
    alpha = check_alpha(alpha)
    k = int(k)
    if k < 0:
        raise ConfigError("k must be non-negative")
    p = 2.0 * alpha
    m = k + 1
    res = em_infinite(
        lambda x: x ** (-p),
        lambda x: -p * x ** (-p - 1.0),
        None,
        m,
        integral=m ** (1.0 - p) / (p - 1.0),
        fpp_abs_integral=p * m ** (-p - 1.0),
    )
    return res.value + res.remainder_bound


def _range(spec):
    if not isinstance(spec, DistributionSpec):
        raise ConfigError("expected a DistributionSpec")
    if spec.kind == "gaussian_sanity":
        raise ConfigError("the Gaussian check law is unbounded; Hoeffding brackets do not apply")
    return spec.span


def remainder_bracket(spec, alpha, k, epsilon):
    """One-sided Hoeffding bounds for the remainder ``R_k = sum_{j>k} j**-alpha eta_j``.

    Returns
    -------
    (low_adjust, high_adjust) : tuple of float
        Bounds on ``P{R_k <= -epsilon}`` and ``P{R_k >= epsilon}``; each equals
        ``min(1, exp(-2 epsilon**2 / (range**2 * sum_{j>k} j**(-2 alpha))))``.
        Their sum is the two-sided bound on ``P{|R_k| >= epsilon}``.
    """
    width = _range(spec)
    eps = float(epsilon)
    if not eps > 0:
        raise ConfigError("epsilon must be positive")
    tail = hoeffding_tail_sum(alpha, k)
    if math.isinf(eps):
        return 0.0, 0.0
    b = min(1.0, math.exp(-2.0 * eps * eps / (width * width * tail)))
    return b, b


def hoeffding_bound(spec, alpha, k, epsilon):
    """Two-sided bound on ``P{|R_k| >= epsilon}``."""
    lo, hi = remainder_bracket(spec, alpha, k, epsilon)
    return lo + hi


def _is_unimodal(vals):
    v = np.asarray(vals)
    d = np.diff(v)
    d = d[d != 0]
    if d.size == 0:
        return True
    sign_changes = np.count_nonzero(np.diff(np.sign(d)) != 0)
    return sign_changes == 0 or (sign_changes == 1 and d[0] < 0)


def optimal_bracket(p_above_lo, p_above_hi, x, delta, eps_max, n_grid=65):
    """Minimize the width of ``[P_lo(x+eps) - delta(eps), P_hi(x-eps) + delta(eps)]``.

    Parameters
    ----------
    p_above_lo, p_above_hi : callable
        Lower and upper bounds (or estimates) of ``P{S_k > y}`` as functions of ``y``.
    delta : callable
        ``eps -> (low_adjust, high_adjust)``.
    eps_max : float
        Right end of the search interval.

    Returns
    -------
    lower, upper, eps : float

    Notes
    -----
    Golden-section search is used when the width is unimodal on the grid;
    otherwise the best grid point is returned.
    """

    def bracket(eps):
        d_lo, d_hi = delta(eps)
        lo = max(0.0, p_above_lo(x + eps) - d_lo)
        hi = min(1.0, p_above_hi(x - eps) + d_hi)
        return lo, hi

    def width(eps):
        lo, hi = bracket(eps)
        return hi - lo

    grid = np.linspace(0.0, eps_max, n_grid)[1:]
    widths = np.array([width(e) for e in grid])
    i = int(np.argmin(widths))
    best = grid[i]
    if _is_unimodal(widths) and 0 < i < len(grid) - 1 and widths[i] < min(widths[i - 1], widths[i + 1]):
        res = optimize.minimize_scalar(width, bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                       method="golden", tol=1e-6)
        if res.success and grid[i - 1] <= res.x <= grid[i + 1] and res.fun <= widths[i]:
            best = float(res.x)
    lo, hi = bracket(best)
    return lo, hi, float(best)


# ---------------------------------------------------------------------------
# enumeration

@nb.njit(cache=True, nogil=True)
def _enum_suffix(vals, probs, j0, s0, p0, x, lo, bin_w, hist):
    k, m = vals.shape
    nf = k - j0
    nbins = hist.shape[0]
    acc = 0.0
    comp = 0.0
    idx = np.zeros(nf, dtype=np.int64)
    ps = np.empty(nf + 1)
    pp = np.empty(nf + 1)
    ps[0] = s0
    pp[0] = p0
    for i in range(nf):
        ps[i + 1] = ps[i] + vals[j0 + i, 0]
        pp[i + 1] = pp[i] * probs[j0 + i, 0]
    while True:
        s = ps[nf]
        p = pp[nf]
        if s > x:
            t = acc + p
            if abs(acc) >= abs(p):
                comp += (acc - t) + p
            else:
                comp += (p - t) + acc
            acc = t
        b = int((s - lo) / bin_w)
        if b < 0:
            b = 0
        elif b >= nbins:
            b = nbins - 1
        hist[b] += p
        # odometer step from the last coordinate
        j = nf - 1
        while j >= 0:
            idx[j] += 1
            if idx[j] < m:
                break
            idx[j] = 0
            j -= 1
        if j < 0:
            break
        for i in range(j, nf):
            ps[i + 1] = ps[i] + vals[j0 + i, idx[i]]
            pp[i + 1] = pp[i] * probs[j0 + i, idx[i]]
    return acc + comp


def _tables(spec, alpha, k):
    pts = np.array([a[0] for a in spec.atoms])
    prob = np.array([a[1] for a in spec.atoms])
    w = np.arange(1, k + 1, dtype=float) ** (-alpha)
    return w[:, None] * pts[None, :], np.broadcast_to(prob, (k, len(prob))).copy()


def enumerate_tail(spec, alpha, x, k, *, threads=1):
    """Exact ``P{S_k > x}`` and a certified bracket for ``P{S > x}``.

    Parameters
    ----------
    spec : DistributionSpec
        A finite law (two-point or discrete).
    alpha : float
    x : float
    k : int
        Number of coordinates, ``1 <= k <= 24`` and ``m**k <= 2**26``.
    threads : int
        Worker threads. The work split does not depend on this value, so the
        result is identical for every thread count.

    Returns
    -------
    OracleBracket
    """
    if not isinstance(spec, DistributionSpec) or spec.kind not in ("two_point", "discrete"):
        raise ConfigError("enumeration needs a two-point or discrete law")
    alpha = check_alpha(alpha)
    x = float(x)
    k = int(k)
    if not 1 <= k <= MAX_K:
        raise ConfigError(f"k must lie in [1, {MAX_K}]")
    m = len(spec.atoms)
    if m**k > ENUM_BUDGET:
        kmax = int(math.floor(math.log(ENUM_BUDGET) / math.log(m)))
        raise ConfigError(f"{m}**{k} paths exceed the enumeration budget; use k <= {kmax}")
    vals, probs = _tables(spec, alpha, k)
    lo = float(vals.min(axis=1).sum())
    hi = float(vals.max(axis=1).sum())
    pad = 1e-9 * max(1.0, hi - lo)
    lo -= pad
    bin_w = (hi + pad - lo) / _NBINS

    # fixed prefix split: independent of the number of threads
    depth = 0
    while depth < k - 1 and m**depth < _PREFIX_TASKS:
        depth += 1
    prefixes = list(np.ndindex(*([m] * depth))) if depth else [()]

    def task(prefix):
        s0, p0 = 0.0, 1.0
        for j, a in enumerate(prefix):
            s0 += vals[j, a]
            p0 *= probs[j, a]
        hist = np.zeros(_NBINS)
        p = _enum_suffix(vals, probs, depth, s0, p0, x, lo, bin_w, hist)
        return p, hist

    if threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            results = list(pool.map(task, prefixes))
    else:
        results = [task(p) for p in prefixes]
    p_exact = min(1.0, math.fsum(r[0] for r in results))
    hist = np.zeros(_NBINS)
    for r in results:
        hist += r[1]
    tail_ge = np.concatenate([np.cumsum(hist[::-1])[::-1], [0.0]])

    def p_above_lo(y):
        i = int(math.floor((y - lo) / bin_w)) + 2
        return float(tail_ge[min(max(i, 0), _NBINS)])

    def p_above_hi(y):
        i = int(math.floor((y - lo) / bin_w)) - 1
        return min(1.0, float(tail_ge[min(max(i, 0), _NBINS)]))

    width = spec.span
    tail = hoeffding_tail_sum(alpha, k)
    eps_max = width * math.sqrt(tail * 800.0 / 2.0)
    lower, upper, eps = optimal_bracket(
        p_above_lo, p_above_hi, x, lambda e: remainder_bracket(spec, alpha, k, e), eps_max)
    return OracleBracket(k, x, p_exact, lower, upper, eps)
