import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirtail.constants import asymptotic_constants
from dirtail.distributions import DistributionSpec
from dirtail.errors import ConfigError
from dirtail.saddle import saddle_tolerance, solve_t, t_expansion
from dirtail.series import mean_series

# root of M(t) = 3 for Rademacher, alpha = 1: mpmath findroot on the
# reference mean series, 30 digits
T3_RADEMACHER = 4.9729992577515001349


def test_reference_root(rademacher):
    sp = solve_t(rademacher, 1.0, 3.0)
    assert sp.t == pytest.approx(T3_RADEMACHER, rel=1e-12)
    assert abs(sp.residual) <= saddle_tolerance(3.0)


@pytest.mark.parametrize("spec", [DistributionSpec.rademacher(), DistributionSpec.poly_edge(1.0, 1.0),
                                  DistributionSpec.gaussian_sanity()])
@pytest.mark.parametrize("alpha", [0.75, 1.0])
@pytest.mark.parametrize("x", [0.5, 4.0, 12.0])
def test_residual_contract(spec, alpha, x):
    sp = solve_t(spec, alpha, x)
    assert sp.t > 0
    assert abs(mean_series(spec, alpha, sp.t).value - x) <= saddle_tolerance(x)


def test_gaussian_is_linear(gaussian):
    # M(t) = t * zeta(2 alpha) for the standard normal law
    from scipy import special

    sp = solve_t(gaussian, 0.8, 5.0)
    assert sp.t == pytest.approx(5.0 / special.zeta(1.6), rel=1e-12)


def test_zero_level(rademacher):
    sp = solve_t(rademacher, 1.0, 0.0)
    assert sp.t == 0.0 and sp.guess_source == "exact"


def test_invalid_level(rademacher):
    with pytest.raises(ConfigError):
        solve_t(rademacher, 1.0, -1.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 8.0), st.floats(0.01, 1.0))
def test_root_is_monotone(x, dx):
    spec = DistributionSpec.two_point(2.0, 0.3)
    assert solve_t(spec, 0.9, x + dx).t > solve_t(spec, 0.9, x).t


@pytest.mark.parametrize("spec,alpha", [(DistributionSpec.rademacher(), 1.0),
                                        (DistributionSpec.rademacher(), 0.75),
                                        (DistributionSpec.poly_edge(1.0, 2.0), 1.0)])
def test_expansion_close_at_large_x(spec, alpha):
    c = asymptotic_constants(spec, alpha)
    x = 14.0
    te = t_expansion(c, x, spec.edge, spec.r)
    assert solve_t(spec, alpha, x).t == pytest.approx(te, rel=0.05)


def test_expansion_vectorized_and_nan(rademacher):
    c = asymptotic_constants(rademacher, 0.75)
    out = t_expansion(c, np.array([2.0, 10.0]), "atom")
    assert out.shape == (2,) and 0 < out[0] < out[1]
    # at alpha = 1 the polynomial correction makes the expansion negative for small x
    c1 = asymptotic_constants(rademacher, 1.0)
    assert math.isnan(t_expansion(c1, -20.0, "poly", r=2.0))
    with pytest.raises(ConfigError):
        t_expansion(c, 5.0, "poly")
