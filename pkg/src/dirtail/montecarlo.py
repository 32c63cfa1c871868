"""Exponential-tilting Monte Carlo for the tail of the series.

Coordinates ``k <= K`` are drawn from the tilted laws
``exp(s_k * eta - psi(s_k)) dP`` with ``s_k = t / k**alpha``; the likelihood
ratio ``exp(sum_k psi(s_k) - t * S_K)`` turns tilted draws into unbiased
estimates under the original law. Uniforms come from a counter-based generator
keyed by ``(seed, row, coordinate)``, and work is cut into chunks whose layout
depends only on ``K``, so every thread count produces the same numbers.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special, stats

from . import _rng
from .constants import asymptotic_constants
from .distributions import CgfEval, DistributionSpec, get_cgf, poly_tilted_gap
from .errors import ConfigError, TruncationError
from .oracle import hoeffding_tail_sum, optimal_bracket, remainder_bracket
from .saddle import solve_t
from .series import check_alpha, mean_series, variance_series

__all__ = [
    "McConfig",
    "McResult",
    "LocalClt",
    "estimate_tail",
    "expectation_term",
    "local_clt_diagnostic",
    "local_clt_report",
    "auto_k",
]

log = logging.getLogger(__name__)

_TAIL_K_CAP = 4096
_DIAG_K_CAP = 1 << 14
_ROWS = 8192
_POLY_CELLS = 1 << 21
_SMOOTH_K_FLOOR = 1024
_MIN_NEFF = 100.0
_JACKKNIFE_GROUPS = 100

# stream tags
_TAG_TAIL, _TAG_ETERM, _TAG_CLT, _TAG_GAUSS, _TAG_REJECT = 11, 12, 13, 14, 15


@dataclass(frozen=True)
class McConfig:
    """Sampling configuration.

    Parameters
    ----------
    n_samples : int
    k_trunc : int or "auto"
        Number of simulated coordinates.
    seed : int
    threads : int
    """

    n_samples: int = 100_000
    k_trunc: int | str = "auto"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if int(self.n_samples) < 2:
            raise ConfigError("n_samples must be at least 2")
        if self.k_trunc != "auto" and (isinstance(self.k_trunc, str) or int(self.k_trunc) < 1):
            raise ConfigError("k_trunc must be a positive integer or 'auto'")
        if int(self.threads) < 1:
            raise ConfigError("threads must be at least 1")


@dataclass(frozen=True)
class McResult:
    """Monte Carlo estimate carried on the log scale.

    Attributes
    ----------
    log_estimate : float
    std_error_of_log : float
    truncation_bias_bound : float
        For tail estimates: largest distance from the estimate to the ends
        of the Hoeffding bracket for the full series (0 when the remainder is
        handled exactly). For the expectation term: Berry-Esseen bound on the
        distribution-function error of the Gaussian remainder.
    n_effective : float
        ``(sum w)**2 / sum w**2``.
    """

    log_estimate: float
    std_error_of_log: float
    truncation_bias_bound: float
    n_effective: float
    n_samples: int
    k_trunc: int
    t: float
    target: str
    bracket: tuple = (float("nan"), float("nan"))
    epsilon: float = float("nan")
    se_method: str = "delta"
    warnings: tuple = field(default=())

    @property
    def estimate(self):
        return math.exp(self.log_estimate) if self.log_estimate > -745 else 0.0

    @property
    def std_error(self):
        return self.estimate * self.std_error_of_log

    def to_dict(self):
        def num(v):
            v = float(v)
            return v if math.isfinite(v) else None

        return {
            "log_estimate": num(self.log_estimate),
            "std_error_of_log": num(self.std_error_of_log),
            "estimate": self.estimate if self.log_estimate >= -700 else None,
            "truncation_bias_bound": num(self.truncation_bias_bound),
            "n_effective": num(self.n_effective),
            "n_samples": self.n_samples,
            "k_trunc": self.k_trunc,
            "t": num(self.t),
            "target": self.target,
            "bracket": [num(self.bracket[0]), num(self.bracket[1])],
            "epsilon": num(self.epsilon),
            "se_method": self.se_method,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class LocalClt:
    ks: float
    emp_var: float
    sigma_sq: float
    n_samples: int
    k_trunc: int
    t: float

    def to_dict(self):
        return {"ks": self.ks, "emp_var": self.emp_var, "sigma_sq": self.sigma_sq,
                "n_samples": self.n_samples, "k_trunc": self.k_trunc, "t": self.t}


# ---------------------------------------------------------------------------
# tilted sampler

def _as_cgf(obj):
    if isinstance(obj, DistributionSpec):
        return get_cgf(obj)
    if isinstance(obj, CgfEval):
        return obj
    raise ConfigError("expected a DistributionSpec or CgfEval")


class _TiltedSums:
    """Draws of ``S_K`` with coordinate ``k`` tilted by ``t / k**alpha``."""

    def __init__(self, cgf, alpha, t, k):
        self.cgf, self.spec = cgf, cgf.spec
        self.alpha, self.t, self.k = alpha, float(t), int(k)
        kk = np.arange(1, self.k + 1, dtype=float)
        self.w = kk ** (-alpha)
        self.s = self.t * self.w
        core = cgf.core(self.s)
        self.log_mgf = math.fsum(core.psi)
        self.mean = math.fsum(self.w * core.d1)
        self.var = math.fsum(self.w**2 * core.d2)
        spec = self.spec
        if spec.kind in ("two_point", "discrete"):
            pts = np.array([a[0] for a in spec.atoms])
            logp = np.log([a[1] for a in spec.atoms])
            lw = logp[None, :] + self.s[:, None] * (pts - spec.b)[None, :]
            prob = np.exp(lw - special.logsumexp(lw, axis=1, keepdims=True))
            self._cum = np.cumsum(prob, axis=1)
            self._vals = self.w[:, None] * pts[None, :]
            self.rows = _ROWS
        elif spec.kind == "poly_edge":
            self.rows = max(64, min(_ROWS, _POLY_CELLS // self.k))
        else:
            self.rows = _ROWS

    def _chunk(self, key, rej_key, row0, n):
        spec = self.spec
        if spec.kind in ("two_point", "discrete"):
            return _rng.atom_sums(key, row0, n, self._cum, self._vals)
        if spec.kind == "gaussian_sanity":
            return _rng.gauss_sums(key, row0, n, self.w) + math.fsum(self.w * self.s)
        if spec.r == 1.0:
            gap = _rng.trunc_exp_sums(key, row0, n, self.s, self.w, spec.d)
            return spec.b * math.fsum(self.w) - gap
        u = _rng.uniform_block(key, row0, n, self.k)
        gaps = poly_tilted_gap(spec, np.broadcast_to(self.s, u.shape), u, rej_key, row0 * self.k)
        return spec.b * math.fsum(self.w) - gaps @ self.w

    def draw(self, key, rej_key, n, threads=1):
        starts = list(range(0, n, self.rows))

        def job(r0):
            return self._chunk(key, rej_key, r0, min(self.rows, n - r0))

        if threads > 1 and len(starts) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(job, starts))
        else:
            parts = [job(r0) for r0 in starts]
        return np.concatenate(parts)


def auto_k(alpha, t, cap=_TAIL_K_CAP, factor=4.0, floor=64):
    """Default number of simulated coordinates: ``factor * t**(1/alpha)`` clipped to ``[floor, cap]``.

    Beyond ``t**(1/alpha)`` the tilt ``t / k**alpha`` drops below one and the
    coordinates are close to their untilted law.
    """
    if t <= 0:
        return floor
    return int(min(cap, max(floor, math.ceil(factor * t ** (1.0 / alpha)))))


def _truncated_tilt(cgf, alpha, x, k):
    """Solve ``sum_{j<=k} j**-alpha psi'(t / j**alpha) = x``; ``None`` when ``x`` is
    at or above the largest value of ``S_k``."""
    w = np.arange(1, k + 1, dtype=float) ** (-alpha)
    if x <= 0:
        return 0.0
    if cgf.spec.kind != "gaussian_sanity" and x >= cgf.b * math.fsum(w):
        return None

    def f(u):
        return math.fsum(w * cgf.core(math.exp(u) * w).d1) - x

    lo, hi = -30.0, 0.0
    while f(hi) < 0:
        lo, hi = hi, hi + 2.0
        if hi > 200:
            return None
    return math.exp(optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-14))


# ---------------------------------------------------------------------------
# estimators

def _log_mean(logv):
    """Log of the mean of ``exp(logv)`` with the relative standard error."""
    n = logv.size
    finite = np.isfinite(logv)
    if not finite.any():
        return -math.inf, math.inf, 0.0, np.zeros(n)
    top = logv[finite].max()
    v = np.where(finite, np.exp(logv - top), 0.0)
    m = v.mean()
    sd = v.std(ddof=1)
    neff = v.sum() ** 2 / np.sum(v * v)
    return top + math.log(m), sd / (m * math.sqrt(n)), neff, v


def _jackknife_log(v, groups=_JACKKNIFE_GROUPS):
    n = v.size
    g = min(groups, n)
    edges = np.linspace(0, n, g + 1).astype(int)
    sums = np.add.reduceat(v, edges[:-1])
    counts = np.diff(edges)
    tot, cnt = sums.sum(), counts.sum()
    with np.errstate(divide="ignore"):
        loo = np.log((tot - sums) / (cnt - counts))
    loo = loo[np.isfinite(loo)]
    if loo.size < 2:
        return math.inf
    return math.sqrt((loo.size - 1) / loo.size * np.sum((loo - loo.mean()) ** 2))


def _heavy_tailed(v):
    if v.size < 4 or v.sum() == 0:
        return False
    share = v.max() / v.sum()
    kurt = stats.kurtosis(v, fisher=True, bias=True)
    return share > 0.1 or (np.isfinite(kurt) and kurt > 1e3)


def _resolve_k(cfg, alpha, t, cap, factor=4.0, floor=64):
    return auto_k(alpha, t, cap, factor, floor) if cfg.k_trunc == "auto" else int(cfg.k_trunc)


def estimate_tail(cgf, alpha, x, cfg=None, *, target="truncated", tilt="auto"):
    """Importance-sampling estimate of a tail probability.

    Parameters
    ----------
    cgf : DistributionSpec or CgfEval
    alpha : float
    x : float
    cfg : McConfig
    target : {"truncated", "series", "gaussian_remainder"}
        ``"truncated"`` estimates ``P{S_K > x}`` exactly without bias.
        ``"series"`` also reports a Hoeffding bracket for ``P{S > x}`` and
        fails if the bracket is wider than the statistical error allows.
        ``"gaussian_remainder"`` approximates ``P{S > x}`` by replacing the
        remainder beyond ``K`` with a centered Gaussian of the same variance
        and integrating it out; ``truncation_bias_bound`` then holds a
        Berry-Esseen bound on the absolute error of that replacement.
        For the Gaussian check law the remainder is Gaussian and integrated
        exactly, so both targets estimate ``P{S > x}`` without bias.
    tilt : {"auto", "truncated", "series"}
        ``"truncated"`` centers the tilted ``S_K`` at ``x``; ``"series"`` uses
        the root of ``M(t) = x`` for the whole series. ``"auto"`` picks the
        first for bounded laws and the second for the Gaussian check law.

    Returns
    -------
    McResult
    """
    cfg = cfg or McConfig()
    cgf = _as_cgf(cgf)
    alpha = check_alpha(alpha)
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise ConfigError("x must be finite and non-negative")
    if target not in ("truncated", "series", "gaussian_remainder"):
        raise ConfigError("target must be 'truncated', 'series' or 'gaussian_remainder'")
    if tilt not in ("auto", "truncated", "series"):
        raise ConfigError("tilt must be 'auto', 'truncated' or 'series'")
    spec = cgf.spec
    gaussian = spec.kind == "gaussian_sanity"
    smooth = gaussian or target == "gaussian_remainder"
    if tilt == "auto":
        tilt = "series" if smooth else "truncated"
    t_series = solve_t(cgf, alpha, x).t if (tilt == "series" or cfg.k_trunc == "auto") else None
    floor = _SMOOTH_K_FLOOR if target == "gaussian_remainder" else 64
    k = _resolve_k(cfg, alpha, t_series if t_series is not None else 0.0, _TAIL_K_CAP, floor=floor)
    n = int(cfg.n_samples)
    notes = []

    if tilt == "series":
        t = t_series
    else:
        t = _truncated_tilt(cgf, alpha, x, k)
        if t is None:
            # x is at or beyond the largest value of S_K
            bracket, eps, bias = _series_bracket(spec, alpha, k, x, lambda y: 0.0, target, 0.0)
            return McResult(-math.inf, 0.0, bias, 0.0, n, k, math.nan, target, bracket, eps,
                            "exact", ("threshold above the range of S_K; probability is 0",))
    sampler = _TiltedSums(cgf, alpha, t, k)
    key = _rng.derive_key(cfg.seed, _TAG_TAIL, k)
    sums = sampler.draw(key, _rng.derive_key(cfg.seed, _TAG_REJECT, k), n, cfg.threads)

    if smooth:
        v_rem = spec.variance * float(special.zeta(2.0 * alpha, k + 1))
        sd = math.sqrt(v_rem)

        def log_terms(y):
            return sampler.log_mgf - t * sums + special.log_ndtr((sums - y) / sd)
    else:
        def log_terms(y):
            with np.errstate(divide="ignore"):
                return np.where(sums > y, sampler.log_mgf - t * sums, -np.inf)

    log_est, rel_se, neff, v = _log_mean(log_terms(x))
    se_method = "delta"
    if _heavy_tailed(v):
        se_method = "jackknife"
        rel_se = _jackknife_log(v)
    if neff < _MIN_NEFF:
        msg = f"effective sample size {neff:.1f} < {_MIN_NEFF:.0f}; tilt does not match the event"
        log.warning(msg)
        notes.append(msg)

    if gaussian:
        bracket, eps, bias = (math.exp(log_est), math.exp(log_est)), 0.0, 0.0
    elif smooth:
        bias = _berry_esseen(spec, alpha, k, v_rem)
        p = math.exp(log_est)
        bracket, eps = (max(0.0, p - bias), min(1.0, p + bias)), 0.0
    else:
        def p_hat(y):
            lm = _log_mean(log_terms(y))[0]
            return math.exp(lm) if lm > -745 else 0.0

        bracket, eps, bias = _series_bracket(spec, alpha, k, x, p_hat, target, math.exp(log_est))
        if target == "series":
            se_p = math.exp(log_est) * rel_se if math.isfinite(log_est) else 0.0
            if bias > max(se_p, 0.0) and bias > 0:
                raise TruncationError(
                    f"truncation bracket half-width {bias:.3g} exceeds the standard error "
                    f"{se_p:.3g} at k_trunc={k}; increase k_trunc")
    return McResult(float(log_est), float(rel_se), float(bias), float(neff), n, k, float(t), target,
                    (float(bracket[0]), float(bracket[1])), float(eps), se_method, tuple(notes))


def _series_bracket(spec, alpha, k, x, p_hat, target, p_center):
    """Hoeffding bracket for ``P{S > x}`` from estimates of ``P{S_K > y}``."""
    if spec.kind == "gaussian_sanity":
        return (p_center, p_center), 0.0, 0.0
    tail = hoeffding_tail_sum(alpha, k)
    eps_max = spec.span * math.sqrt(tail * 800.0 / 2.0)
    lo, hi, eps = optimal_bracket(p_hat, p_hat, x, lambda e: remainder_bracket(spec, alpha, k, e), eps_max,
                                  n_grid=33)
    bias = max(hi - p_center, p_center - lo)
    return (lo, hi), eps, bias


def _gaussian_remainder(cgf, alpha, t, sampler):
    """Mean and variance of ``sum_{k>K}`` under the tilt, from the full series."""
    mu = mean_series(cgf, alpha, t).value - sampler.mean
    var = variance_series(cgf, alpha, t).value - sampler.var
    return mu, max(var, 0.0)


def _berry_esseen(spec, alpha, k, var):
    if var <= 0:
        return 0.0
    # E|X_j|**3 <= span * j**-alpha * E X_j**2 for |X_j| <= span * j**-alpha
    return 0.56 * spec.span * (k + 1.0) ** (-alpha) / math.sqrt(var)


def _centered_draws(cgf, alpha, t, cfg, tag):
    k = _resolve_k(cfg, alpha, t, _DIAG_K_CAP, factor=2.0, floor=16)
    sampler = _TiltedSums(cgf, alpha, t, k)
    n = int(cfg.n_samples)
    sums = sampler.draw(_rng.derive_key(cfg.seed, tag, k), _rng.derive_key(cfg.seed, _TAG_REJECT, tag, k),
                        n, cfg.threads)
    _, v_rem = _gaussian_remainder(cgf, alpha, t, sampler)
    return sums - sampler.mean, v_rem, k


def expectation_term(cgf, alpha, t, cfg=None):
    """Estimate ``t**(1/(2 alpha)) * E_t[exp(-t S_0) 1{S_0 > 0}]``.

    ``S_0`` is the series centered at its tilted mean. Coordinates up to ``K``
    are simulated; the rest are replaced by a Gaussian with their exact tilted
    variance, which is integrated in closed form:
    ``E[exp(-t(A+G)) 1{A+G>0}] = exp(-tA + t**2 v/2) Phi((A - t v)/sqrt(v))``.

    Returns
    -------
    McResult
        ``log_estimate`` is the log of the scaled expectation.
    """
    cfg = cfg or McConfig()
    cgf = _as_cgf(cgf)
    alpha = check_alpha(alpha)
    t = float(t)
    if not t > 0:
        raise ConfigError("t must be positive")
    if cgf.spec.kind == "gaussian_sanity":
        raise ConfigError("the expectation-term limit needs a law bounded above")
    a, v, k = _centered_draws(cgf, alpha, t, cfg, _TAG_ETERM)
    if v > 0:
        sd = math.sqrt(v)
        logv = -t * a + 0.5 * t * t * v + special.log_ndtr((a - t * v) / sd)
    else:
        with np.errstate(divide="ignore"):
            logv = np.where(a > 0, -t * a, -np.inf)
    log_est, rel_se, neff, vals = _log_mean(logv)
    se_method = "delta"
    if _heavy_tailed(vals):
        se_method = "jackknife"
        rel_se = _jackknife_log(vals)
    log_est += math.log(t) / (2.0 * alpha)
    bias = _berry_esseen(cgf.spec, alpha, k, v)
    notes = ()
    if neff < _MIN_NEFF:
        notes = (f"effective sample size {neff:.1f} < {_MIN_NEFF:.0f}",)
    return McResult(float(log_est), float(rel_se), float(bias), float(neff), int(cfg.n_samples), k, t,
                    "expectation_term",
                    se_method=se_method, warnings=notes)


def local_clt_report(cgf, alpha, t, cfg=None):
    """KS distance of ``t**(1 - 1/(2 alpha)) S_0`` to ``N(0, sigma_sq)`` and its variance.

    Uses the same simulated-plus-Gaussian representation as
    :func:`expectation_term`.
    """
    cfg = cfg or McConfig()
    cgf = _as_cgf(cgf)
    alpha = check_alpha(alpha)
    t = float(t)
    if t < 100.0:
        raise ConfigError("the local CLT diagnostic needs t >= 100")
    s2 = asymptotic_constants(cgf, alpha).sigma_sq
    a, v, k = _centered_draws(cgf, alpha, t, cfg, _TAG_CLT)
    if v > 0:
        g = _rng.normal_block(_rng.derive_key(cfg.seed, _TAG_GAUSS, k), 0, a.size, 1)[:, 0]
        a = a + math.sqrt(v) * g
    z = t ** (1.0 - 1.0 / (2.0 * alpha)) * a
    ks = stats.ks_1samp(z, stats.norm(0.0, math.sqrt(s2)).cdf).statistic
    return LocalClt(float(ks), float(np.var(z, ddof=1)), s2, int(cfg.n_samples), k, t)


def local_clt_diagnostic(cgf, alpha, t, cfg=None):
    """Kolmogorov-Smirnov distance of the normalized tilted sum to ``N(0, sigma_sq)``."""
    return local_clt_report(cgf, alpha, t, cfg).ks
