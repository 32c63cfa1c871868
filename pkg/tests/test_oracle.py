import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from dirtail import _rng
from dirtail.asymptotics import tail_saddlepoint
from dirtail.distributions import DistributionSpec
from dirtail.errors import ConfigError
from dirtail.oracle import (
    enumerate_tail, hoeffding_bound, hoeffding_tail_sum, optimal_bracket, remainder_bracket,
)


def brute_tail(spec, alpha, x, k):
    pts = np.array([a[0] for a in spec.atoms])
    prob = np.array([a[1] for a in spec.atoms])
    w = np.arange(1, k + 1, dtype=float) ** (-alpha)
    total = 0.0
    for idx in itertools.product(range(len(pts)), repeat=k):
        idx = np.array(idx)
        if float(np.dot(w, pts[idx])) > x:
            total += float(np.prod(prob[idx]))
    return total


def test_small_cases(rademacher):
    assert enumerate_tail(rademacher, 1.0, 0.5, 1).p_exact_truncated == 0.5
    assert enumerate_tail(rademacher, 1.0, 1.2, 2).p_exact_truncated == 0.25


def test_rademacher_k16_vectorized_reference(rademacher):
    k = 16
    signs = ((np.arange(1 << k)[:, None] >> np.arange(k)) & 1) * 2.0 - 1.0
    s = signs @ (1.0 / np.arange(1, k + 1))
    ref = np.count_nonzero(s > 3.0) / (1 << k)
    assert enumerate_tail(rademacher, 1.0, 3.0, k).p_exact_truncated == ref


@pytest.mark.parametrize("alpha,x", [(0.75, 0.4), (1.0, 1.1), (0.6, 2.0)])
def test_discrete_three_atoms(alpha, x):
    spec = DistributionSpec.discrete([(-1.0, 0.4), (0.5, 0.4), (1.0, 0.2)])
    got = enumerate_tail(spec, alpha, x, 7).p_exact_truncated
    assert got == pytest.approx(brute_tail(spec, alpha, x, 7), rel=1e-13, abs=1e-16)


def test_thread_invariance(rademacher):
    a = enumerate_tail(rademacher, 0.8, 2.0, 18, threads=1)
    b = enumerate_tail(rademacher, 0.8, 2.0, 18, threads=4)
    assert a == b


def test_limits(rademacher, uniform):
    with pytest.raises(ConfigError):
        enumerate_tail(rademacher, 1.0, 1.0, 25)
    with pytest.raises(ConfigError):
        enumerate_tail(DistributionSpec.discrete([(-1, 0.25), (-0.5, 0.25), (0.5, 0.25), (1, 0.25)]), 1.0, 1.0, 14)
    with pytest.raises(ConfigError):
        enumerate_tail(uniform, 1.0, 1.0, 4)


def test_bracket_contains_truth_and_tightens(rademacher):
    # the saddlepoint value is accurate to a few percent here; it must fall
    # inside every certified bracket
    for x in (2.0, 3.0):
        p = tail_saddlepoint(rademacher, 1.0, x).value
        widths = []
        for k in (12, 20):
            o = enumerate_tail(rademacher, 1.0, x, k)
            assert o.lower <= p <= o.upper
            widths.append(o.upper - o.lower)
        assert widths[1] < widths[0]


@pytest.mark.parametrize("alpha", [0.6, 0.8, 1.0])
@pytest.mark.parametrize("k", [0, 5, 100])
def test_tail_sum_upper_bound(alpha, k):
    exact = float(special.zeta(2 * alpha, k + 1))
    bound = hoeffding_tail_sum(alpha, k)
    assert exact <= bound
    if k >= 100:
        assert bound <= exact * (1 + 1e-4)


def test_bound_formula(rademacher):
    lo, hi = remainder_bracket(rademacher, 1.0, 32, 0.5)
    t = hoeffding_tail_sum(1.0, 32)
    assert lo == hi == pytest.approx(math.exp(-2 * 0.25 / (4.0 * t)))
    assert hoeffding_bound(rademacher, 1.0, 32, 0.5) == pytest.approx(2 * lo)
    # small thresholds give the trivial bound
    assert remainder_bracket(rademacher, 1.0, 32, 0.05)[0] > 0.9
    with pytest.raises(ConfigError):
        remainder_bracket(rademacher, 1.0, 32, 0.0)
    with pytest.raises(ConfigError):
        remainder_bracket(DistributionSpec.gaussian_sanity(), 1.0, 32, 0.5)


@pytest.mark.parametrize("eps", [0.3, 0.5])
def test_bound_dominates_simulation(rademacher, eps):
    # remainder from 33 to 32 + 4096; the rest has variance < 2.5e-4
    k, m, n = 32, 4096, 4000
    key = _rng.derive_key(9, 77)
    u = _rng.uniform_block(key, 0, n, m)
    w = np.arange(k + 1, k + m + 1, dtype=float) ** -1.0
    r = np.where(u < 0.5, -1.0, 1.0) @ w
    freq = np.mean(np.abs(r) >= eps)
    se = math.sqrt(max(freq * (1 - freq), 1.0 / n) / n)
    assert freq <= hoeffding_bound(rademacher, 1.0, k, eps) + 3 * se


def test_optimal_bracket_synthetic():
    # P_K above y is a logistic curve, the remainder bound a Gaussian-like tail
    f = lambda y: 1.0 / (1.0 + math.exp(4.0 * y))  # noqa: E731
    delta = lambda e: (math.exp(-50 * e * e),) * 2  # noqa: E731
    lo, hi, eps = optimal_bracket(f, f, 0.0, delta, 1.0)
    grid = np.linspace(0, 1, 65)[1:]
    best = min(min(1.0, f(-e) + delta(e)[1]) - max(0.0, f(e) - delta(e)[0]) for e in grid)
    assert hi - lo <= best + 1e-12
    assert 0 < eps < 1 and lo <= 0.5 <= hi


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 10), st.floats(-1.0, 3.0))
def test_exact_probability_bounds(k, x):
    o = enumerate_tail(DistributionSpec.two_point(1.0, 0.3), 0.9, x, k)
    assert 0.0 <= o.lower <= o.upper <= 1.0
    assert 0.0 <= o.p_exact_truncated <= 1.0
