"""Cross-check suite behind ``dirtail validate``.

Each check records the measured value, its threshold and whether it passed.
The report contains no timings or other run-dependent data, so repeated runs
with the same seed produce identical output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .asymptotics import density_thm, tail_saddlepoint, tail_thm
from .constants import asymptotic_constants
from .distributions import get_cgf
from .montecarlo import McConfig, estimate_tail, expectation_term, local_clt_report
from .oracle import enumerate_tail
from .saddle import saddle_tolerance, solve_t, t_expansion
from .series import check_alpha, mean_series, prefactor_series

__all__ = ["Check", "run_checks", "report_dict"]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    relation: str = "<="

    def to_dict(self):
        v = float(self.value)
        return {"name": self.name, "value": v if math.isfinite(v) else None,
                "threshold": self.threshold, "relation": self.relation, "passed": bool(self.passed)}


def _le(name, value, threshold):
    return Check(name, float(value), float(threshold), bool(value <= threshold))


def _constant_checks(cgf, alpha):
    c = asymptotic_constants(cgf, alpha)
    out = [_le("dual_sigma_rel_err", c.dual_sigma_rel_err, 1e-6)]
    if alpha == 1.0:
        out.append(_le("sigma_sq_equals_b", abs(c.sigma_sq - c.b), 1e-8))
    else:
        out.append(_le("kappa_identity_rel_err", c.kappa_identity_rel_err, 1e-6))
    return out


def _saddle_checks(cgf, alpha):
    worst = 0.0
    for x in np.arange(0.5, 20.5, 1.5):
        sp = solve_t(cgf, alpha, x)
        worst = max(worst, abs(sp.residual) / saddle_tolerance(x))
    out = [_le("saddle_residual_over_tol", worst, 1.0)]
    spec = cgf.spec
    if spec.edge:
        c = asymptotic_constants(cgf, alpha)
        t = solve_t(cgf, alpha, 20.0).t
        te = t_expansion(c, 20.0, spec.edge, spec.r)
        out.append(_le("t_expansion_rel_gap_x20", abs(t - te) / te, 0.05))
    return out


def _series_checks(cgf, alpha):
    spec = cgf.spec
    if not spec.edge:
        return []
    c = asymptotic_constants(cgf, alpha)
    t = 1e3
    p = prefactor_series(cgf, alpha, t).value
    lead = -c.b * t if alpha == 1.0 else -(1.0 - alpha) / alpha**2 * c.kappa * t ** (1.0 / alpha)
    if spec.edge == "atom":
        expected = lead - 0.5 * math.log(spec.theta)
        tol = 5e-2 if alpha == 1.0 else 0.1
    else:
        r = spec.r
        expected = (lead + 0.5 * r * math.log(t) + 0.5 * r * (alpha * math.log(2 * math.pi) - 1.0)
                    - 0.5 * (math.log(spec.lam) + special.gammaln(r + 1.0)))
        tol = 5e-2 if alpha == 1.0 else 0.1
    out = [_le("prefactor_expansion_err_t1e3", abs(p - expected), tol)]
    if alpha == 1.0:
        m = mean_series(cgf, alpha, t).value
        corr = 0.5 * spec.r / t if spec.edge == "poly" else 0.0
        out.append(_le("mean_expansion_scaled_err_t1e3", t * abs(m - c.b * math.log(t) - c.q - corr), 1.0))
    return out


def _asymptotic_checks(cgf, alpha):
    spec = cgf.spec
    if not spec.edge:
        return []
    x = 16.0
    gap = abs(tail_saddlepoint(cgf, alpha, x).log_value - tail_thm(cgf, alpha, x).log_value)
    out = [_le("saddle_vs_thm_log_gap_x16", gap, 0.5)]
    if alpha == 1.0:
        d = density_thm(cgf, alpha, x).log_value - tail_thm(cgf, alpha, x).log_value
        out.append(_le("density_ratio_minus_log_t_x16", abs(d - math.log(solve_t(cgf, alpha, x).t)), 0.05))
    return out


def _mc_checks(cgf, alpha, seed, threads):
    spec = cgf.spec
    out = []
    if spec.kind in ("two_point", "discrete") and len(spec.atoms) ** 16 <= 1 << 26:
        k = 16
        x = 0.8 * spec.b * math.fsum(np.arange(1, k + 1, dtype=float) ** (-alpha))
        exact = enumerate_tail(spec, alpha, x, k, threads=threads).p_exact_truncated
        r = estimate_tail(cgf, alpha, x, McConfig(50_000, k, seed, threads))
        z = abs(r.estimate - exact) / r.std_error if r.std_error > 0 else abs(r.estimate - exact)
        out.append(_le("mc_vs_enumeration_abs_z", z, 3.0))
    if spec.kind == "gaussian_sanity":
        x = 5.0
        exact = float(special.log_ndtr(-x / math.sqrt(special.zeta(2.0 * alpha))))
        r = estimate_tail(cgf, alpha, x, McConfig(50_000, "auto", seed, threads))
        out.append(_le("mc_vs_gaussian_abs_z", abs(r.log_estimate - exact) / r.std_error_of_log, 3.0))
        return out
    s2 = asymptotic_constants(cgf, alpha).sigma_sq
    cfg = McConfig(20_000, "auto", seed, threads)
    e = expectation_term(cgf, alpha, 1e3, cfg)
    out.append(_le("expectation_term_rel_err_t1e3",
                   abs(math.exp(e.log_estimate) * math.sqrt(2 * math.pi * s2) - 1.0), 0.1))
    clt = local_clt_report(cgf, alpha, 1e3, cfg)
    out.append(_le("local_clt_ks_t1e3", clt.ks, 0.05))
    out.append(_le("local_clt_var_rel_err_t1e3", abs(clt.emp_var / s2 - 1.0), 0.05))
    return out


def _determinism_check(cgf, alpha, seed):
    x = 1.0
    a = estimate_tail(cgf, alpha, x, McConfig(20_000, 16, seed, 1))
    b = estimate_tail(cgf, alpha, x, McConfig(20_000, 16, seed, 4))
    same = a.log_estimate == b.log_estimate and a.std_error_of_log == b.std_error_of_log
    return [Check("threads_1_vs_4_identical", 0.0 if same else 1.0, 0.0, same, "==")]


def run_checks(spec, alpha, seed=0, threads=1):
    """Run every check that applies to ``spec`` and ``alpha``."""
    alpha = check_alpha(alpha)
    cgf = get_cgf(spec)
    checks = []
    if spec.edge:
        checks += _constant_checks(cgf, alpha)
    checks += _saddle_checks(cgf, alpha)
    checks += _series_checks(cgf, alpha)
    checks += _asymptotic_checks(cgf, alpha)
    checks += _mc_checks(cgf, alpha, seed, threads)
    checks += _determinism_check(cgf, alpha, seed)
    return checks


def report_dict(checks):
    return {"passed": all(c.passed for c in checks), "checks": [c.to_dict() for c in checks]}
