import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirtail.errors import ConfigError
from dirtail.series import (
    cgf_series, check_alpha, em_finite, em_infinite, mean_series, prefactor_series, variance_series,
)

# Reference values: direct float sum of the first 10**6 terms plus the tail
# beyond 10**6 from the Taylor series of the summand written with Hurwitz
# zeta values (mpmath, 30 digits).
RADEMACHER_REF = {
    # (alpha, t): (M, P, V)
    (1.0, 10.0): (3.6985811346364494, -9.653428833624428, 0.09999969565063493),
    (1.0, 100.0): (6.001165991061647, -99.65342640971994, 0.01),
    (0.75, 10.0): (8.953496783046809, -30.64038197503096, 0.4131593880747015),
    (0.75, 100.0): (23.262463258277858, -667.2471425402956, 0.08901249548407693),
}
UNIFORM_MEAN_REF = {(1.0, 50.0): 3.9317244493818113, (0.75, 20.0): 6.858760254467669}


@pytest.mark.parametrize("key", list(RADEMACHER_REF))
def test_rademacher_series_reference(rademacher, key):
    alpha, t = key
    m, p, v = RADEMACHER_REF[key]
    assert mean_series(rademacher, alpha, t).value == pytest.approx(m, rel=1e-12)
    assert prefactor_series(rademacher, alpha, t).value == pytest.approx(p, rel=1e-12)
    assert variance_series(rademacher, alpha, t).value == pytest.approx(v, rel=1e-11)


@pytest.mark.parametrize("key", list(UNIFORM_MEAN_REF))
def test_uniform_mean_reference(uniform, key):
    alpha, t = key
    assert mean_series(uniform, alpha, t).value == pytest.approx(UNIFORM_MEAN_REF[key], rel=1e-12)


@pytest.mark.parametrize("alpha", [0.6, 0.8, 1.0])
@pytest.mark.parametrize("t", [0.5, 7.0, 300.0])
def test_prefactor_is_lambda_minus_t_mean(poly2, alpha, t):
    lam = cgf_series(poly2, alpha, t).value
    m = mean_series(poly2, alpha, t).value
    p = prefactor_series(poly2, alpha, t).value
    assert p == pytest.approx(lam - t * m, rel=1e-9, abs=1e-9 * abs(lam))


def test_zero_tilt(rademacher):
    assert mean_series(rademacher, 0.8, 0.0).value == 0.0
    assert variance_series(rademacher, 1.0, 0.0).value == pytest.approx(math.pi**2 / 6)


def test_remainder_bound_is_small(rademacher):
    r = mean_series(rademacher, 0.7, 50.0)
    assert r.remainder_bound <= 1e-12 * abs(r.value)
    assert r.k_cut >= 64


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 500.0), st.floats(0.55, 1.0))
def test_mean_increasing_and_variance_positive(t, alpha):
    from dirtail.distributions import DistributionSpec

    spec = DistributionSpec.rademacher()
    m1 = mean_series(spec, alpha, t).value
    m2 = mean_series(spec, alpha, t * 1.01).value
    assert m2 > m1 > 0
    # the derivative of M is the variance series
    v = variance_series(spec, alpha, t).value
    assert (m2 - m1) / (0.01 * t) == pytest.approx(v, rel=0.02)


def test_em_infinite_power():
    # sum_{j>=10} j**-2 = zeta(2) - H_9^(2)
    exact = math.pi**2 / 6 - sum(j**-2.0 for j in range(1, 10))
    r = em_infinite(lambda x: x**-2.0, lambda x: -2.0 * x**-3.0, lambda x: 6.0 * x**-4.0, 10)
    assert abs(r.value - exact) <= r.remainder_bound
    assert r.remainder_bound < 2e-4


def test_em_finite_power():
    exact = math.fsum(j**-1.5 for j in range(5, 2001))
    r = em_finite(lambda x: x**-1.5, lambda x: -1.5 * x**-2.5, lambda x: 3.75 * x**-3.5, 5, 2000)
    assert abs(r.value - exact) <= r.remainder_bound


@pytest.mark.parametrize("bad", [0.5, 0.2, 1.01, float("nan")])
def test_alpha_domain(bad):
    with pytest.raises(ConfigError):
        check_alpha(bad)


def test_negative_t(rademacher):
    with pytest.raises(ConfigError):
        mean_series(rademacher, 1.0, -1.0)
    with pytest.raises(ConfigError):
        mean_series(rademacher, 1.0, np.inf)
