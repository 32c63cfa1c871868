import math

import numpy as np
import pytest
from scipy import special

from dirtail import _rng
from dirtail.asymptotics import tail_saddlepoint
from dirtail.constants import asymptotic_constants
from dirtail.distributions import DistributionSpec
from dirtail.errors import ConfigError, TruncationError
from dirtail.montecarlo import (
    McConfig, auto_k, estimate_tail, expectation_term, local_clt_diagnostic, local_clt_report,
)
from dirtail.oracle import enumerate_tail


def test_unbiased_over_seeds(rademacher):
    k, x = 8, 2.0
    exact = enumerate_tail(rademacher, 1.0, x, k).p_exact_truncated
    ests = np.array([estimate_tail(rademacher, 1.0, x, McConfig(4000, k, seed)).estimate for seed in range(20)])
    se = ests.std(ddof=1) / math.sqrt(ests.size)
    assert abs(ests.mean() - exact) < 3 * se + 1e-12


@pytest.mark.parametrize("x", [1.0, 2.0])
def test_reported_error_is_honest(rademacher, x):
    k = 12
    exact = enumerate_tail(rademacher, 0.8, x, k).p_exact_truncated
    r = estimate_tail(rademacher, 0.8, x, McConfig(20_000, k, 3))
    assert abs(r.estimate - exact) < 4 * r.std_error
    assert r.n_effective / r.n_samples > 0.1


def test_poly_truncated_against_plain_sampling(uniform):
    # plain Monte Carlo is adequate at a moderate level
    k, x, n = 8, 1.0, 400_000
    u = _rng.uniform_block(_rng.derive_key(123, 5), 0, n, k)
    s = (2.0 * u - 1.0) @ (np.arange(1, k + 1, dtype=float) ** -0.75)
    p_plain = np.mean(s > x)
    se_plain = math.sqrt(p_plain * (1 - p_plain) / n)
    r = estimate_tail(uniform, 0.75, x, McConfig(50_000, k, 1))
    assert abs(r.estimate - p_plain) < 4 * math.hypot(se_plain, r.std_error)


def test_gaussian_exact_remainder(gaussian):
    alpha, x = 0.8, 4.0
    exact = float(special.log_ndtr(-x / math.sqrt(special.zeta(2 * alpha))))
    r = estimate_tail(gaussian, alpha, x, McConfig(40_000, "auto", 2))
    assert abs(r.log_estimate - exact) < 4 * r.std_error_of_log
    assert r.truncation_bias_bound == 0.0


def test_gaussian_remainder_target(rademacher):
    x = 4.0
    r = estimate_tail(rademacher, 1.0, x, McConfig(20_000, "auto", 0), target="gaussian_remainder")
    sp = tail_saddlepoint(rademacher, 1.0, x).log_value
    assert abs(r.log_estimate - sp) < 0.1
    assert r.k_trunc >= 1024
    assert r.bracket[0] <= r.estimate <= r.bracket[1]


def test_threshold_above_range(rademacher):
    r = estimate_tail(rademacher, 1.0, 3.5, McConfig(1000, 16, 0))
    assert r.log_estimate == -math.inf and r.estimate == 0.0 and r.std_error_of_log == 0.0
    assert r.to_dict()["log_estimate"] is None


def test_series_target_refuses_wide_bracket(rademacher):
    with pytest.raises(TruncationError):
        estimate_tail(rademacher, 1.0, 1.0, McConfig(50_000, 8, 0), target="series")


def test_series_target_gaussian_is_exact(gaussian):
    r = estimate_tail(gaussian, 0.75, 2.0, McConfig(2000, 64, 0), target="series")
    assert r.truncation_bias_bound == 0.0
    assert r.bracket[0] == r.bracket[1] == pytest.approx(r.estimate)


class TestDeterminism:
    def test_same_seed(self, uniform):
        cfg = McConfig(5000, 16, 7)
        assert estimate_tail(uniform, 0.8, 1.5, cfg) == estimate_tail(uniform, 0.8, 1.5, cfg)

    def test_thread_count(self, uniform):
        a = estimate_tail(uniform, 0.8, 1.5, McConfig(20_000, 16, 7, threads=1))
        b = estimate_tail(uniform, 0.8, 1.5, McConfig(20_000, 16, 7, threads=4))
        assert a.log_estimate == b.log_estimate and a.std_error_of_log == b.std_error_of_log

    def test_seed_changes_result(self, rademacher):
        a = estimate_tail(rademacher, 1.0, 2.0, McConfig(5000, 16, 1))
        b = estimate_tail(rademacher, 1.0, 2.0, McConfig(5000, 16, 2))
        assert a.log_estimate != b.log_estimate


def test_expectation_term_limit(rademacher):
    s2 = asymptotic_constants(rademacher, 0.75).sigma_sq
    r = expectation_term(rademacher, 0.75, 1e3, McConfig(20_000, "auto", 0))
    assert abs(math.exp(r.log_estimate) * math.sqrt(2 * math.pi * s2) - 1.0) < 0.1
    assert r.target == "expectation_term"


def test_local_clt(rademacher):
    rep = local_clt_report(rademacher, 1.0, 1e3, McConfig(20_000, "auto", 0))
    assert rep.ks < 0.05
    assert rep.emp_var == pytest.approx(rep.sigma_sq, rel=0.05)
    assert local_clt_diagnostic(rademacher, 1.0, 1e3, McConfig(20_000, "auto", 0)) == rep.ks
    with pytest.raises(ConfigError):
        local_clt_report(rademacher, 1.0, 10.0)


def test_auto_k():
    assert auto_k(1.0, 0.5) == 64
    assert auto_k(1.0, 100.0) == 400
    assert auto_k(0.6, 1e6) == 4096
    assert auto_k(0.75, 8.0, factor=2.0, floor=16) == 32


@pytest.mark.parametrize("kw", [dict(n_samples=1), dict(k_trunc=0), dict(k_trunc="many"), dict(threads=0)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        McConfig(**kw)


def test_argument_validation(rademacher):
    with pytest.raises(ConfigError):
        estimate_tail(rademacher, 1.0, -1.0)
    with pytest.raises(ConfigError):
        estimate_tail(rademacher, 1.0, 1.0, target="full")
    with pytest.raises(ConfigError):
        expectation_term(DistributionSpec.gaussian_sanity(), 1.0, 100.0)
