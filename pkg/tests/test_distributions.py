import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dirtail.distributions import (
    CgfEval, DistributionSpec, edge_law_check, get_cgf, load_spec, psi, sample, sample_tilted,
)
from dirtail.errors import ConfigError


def _poly_psi_quad(spec, s):
    # independent: integrate exp(s*eta) against the density of b - eta = d U**(1/r)
    r, d, b = spec.r, spec.d, spec.b
    dens = lambda y: r * y ** (r - 1.0) / d**r  # noqa: E731
    m, _ = integrate.quad(lambda y: math.exp(s * (b - y)) * dens(y), 0.0, d, epsabs=0, epsrel=1e-13)
    return math.log(m)


class TestSpec:
    def test_two_point_balancing_atom(self):
        s = DistributionSpec.two_point(2.0, 0.3)
        (lo, p_lo), (hi, p_hi) = s.atoms
        assert hi == 2.0 and p_hi == 0.3
        assert lo * p_lo + hi * p_hi == pytest.approx(0.0, abs=1e-15)
        assert s.edge == "atom" and s.theta == 0.3

    def test_poly_edge_is_centered(self, poly2):
        # b - eta = d U**(1/r) has mean d r/(r+1), which must equal b
        assert poly2.d * poly2.r / (poly2.r + 1.0) == pytest.approx(poly2.b)
        assert poly2.edge == "poly"

    def test_uniform_preset(self, uniform):
        assert uniform.d == pytest.approx(2.0)
        assert uniform.lam == pytest.approx(0.5)
        assert uniform.variance == pytest.approx(1.0 / 3.0)

    @pytest.mark.parametrize("kw", [
        dict(kind="two_point", b=-1.0, theta=0.5, atoms=((-1.0, 0.5), (1.0, 0.5))),
        dict(kind="poly_edge", b=1.0, r=0.0),
        dict(kind="nope"),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            DistributionSpec(**kw)

    def test_discrete_requires_zero_mean(self):
        with pytest.raises(ConfigError):
            DistributionSpec.discrete([(-1.0, 0.5), (2.0, 0.5)])
        s = DistributionSpec.discrete([(-1.0, 0.5), (0.0, 0.25), (2.0, 0.25)])
        assert s.b == 2.0 and s.theta == 0.25

    def test_theta_bounds(self):
        with pytest.raises(ConfigError):
            DistributionSpec.two_point(1.0, 1.0)

    def test_load_spec_presets_and_toml(self, tmp_path):
        assert load_spec("rademacher") == DistributionSpec.rademacher()
        assert load_spec("two_point", b=2.0, theta=0.3) == DistributionSpec.two_point(2.0, 0.3)
        p = tmp_path / "law.toml"
        p.write_text('[dist]\nkind = "poly_edge"\nb = 1.5\nr = 2.0\n')
        assert load_spec(str(p)) == DistributionSpec.poly_edge(1.5, 2.0)
        with pytest.raises(ConfigError):
            load_spec(str(tmp_path / "missing.toml"))
        with pytest.raises(ConfigError):
            load_spec("cauchy")

    def test_to_dict_roundtrip_fields(self, rademacher):
        d = rademacher.to_dict()
        assert d["kind"] == "two_point" and d["b"] == 1.0 and d["theta"] == 0.5


class TestCgf:
    @pytest.mark.parametrize("t", [0.0, 1e-6, 0.3, 2.0, 40.0, 900.0])
    def test_rademacher_closed_form(self, rademacher, t):
        c = get_cgf(rademacher)
        with mp.workdps(40):
            ref = [float(mp.log(mp.cosh(t))), float(mp.tanh(t)), float(mp.sech(t) ** 2)]
        assert c.psi(t) == pytest.approx(ref[0], rel=1e-14, abs=1e-300)
        assert c.psi(t, 1) == pytest.approx(ref[1], rel=1e-14)
        assert c.psi(t, 2) == pytest.approx(ref[2], rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("t", [1e-4, 0.5, 3.0, 30.0])
    def test_uniform_closed_form(self, uniform, t):
        with mp.workdps(40):
            ref = float(mp.log(mp.sinh(t) / t))
            ref1 = float(mp.coth(t) - 1 / mp.mpf(t))
        assert psi(uniform, t) == pytest.approx(ref, rel=1e-12)
        assert psi(uniform, t, 1) == pytest.approx(ref1, rel=1e-11)

    @pytest.mark.parametrize("s", [-3.0, -0.2, 0.05, 1.0, 7.0, 25.0])
    def test_poly_against_quadrature(self, poly2, s):
        assert psi(poly2, s) == pytest.approx(_poly_psi_quad(poly2, s), rel=1e-10, abs=1e-14)

    @pytest.mark.parametrize("s", [0.01, 0.5, 4.0, 60.0])
    def test_modes_agree(self, poly2, s):
        a = CgfEval(poly2, "closed_form")
        b = CgfEval(poly2, "quadrature")
        for order in range(3):
            assert a.psi(s, order) == pytest.approx(b.psi(s, order), rel=1e-8, abs=1e-14)

    def test_discrete_matches_two_point(self):
        tp = DistributionSpec.two_point(2.0, 0.3)
        ds = DistributionSpec.discrete(tp.atoms)
        for s in (0.1, 1.0, 10.0):
            assert psi(ds, s) == pytest.approx(psi(tp, s), rel=1e-12)

    def test_L_and_lprime(self, rademacher):
        c = get_cgf(rademacher)
        # psi(t) - b t -> log theta for an atom edge
        assert c.L(200.0) == pytest.approx(math.log(0.5), rel=1e-12)
        assert c.lprime(5.0) == pytest.approx(math.tanh(5.0) - 1.0, rel=1e-10)

    def test_order_validation(self, rademacher):
        with pytest.raises(ConfigError):
            psi(rademacher, 1.0, order=5)
        with pytest.raises(ConfigError):
            psi(rademacher, float("nan"))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.0, 200.0), st.floats(1e-3, 5.0),
           st.sampled_from(["rademacher", "uniform", "poly2", "tp"]))
    def test_convexity_and_derivative_bounds(self, t, h, which):
        spec = {"rademacher": DistributionSpec.rademacher(),
                "uniform": DistributionSpec.poly_edge(1.0, 1.0),
                "poly2": DistributionSpec.poly_edge(1.0, 2.0),
                "tp": DistributionSpec.two_point(2.0, 0.3)}[which]
        c = get_cgf(spec)
        d1a, d1b = c.psi(t, 1), c.psi(t + h, 1)
        assert d1b >= d1a - 1e-12
        assert -1e-15 <= d1a <= spec.b
        assert c.psi(t, 2) >= 0.0
        # psi(t) <= b t since eta <= b
        assert c.psi(t) <= spec.b * t + 1e-12

    def test_origin(self, poly2):
        c = get_cgf(poly2)
        assert c.psi(0.0) == 0.0
        assert c.psi(0.0, 1) == pytest.approx(0.0, abs=1e-15)
        assert c.psi(0.0, 2) == pytest.approx(poly2.variance, rel=1e-13)


class TestEdgeAndSampling:
    def test_edge_law(self, poly2, rademacher):
        eps = np.logspace(-6, -1, 20)
        assert edge_law_check(poly2, eps).ok
        assert edge_law_check(rademacher, eps).ok

    def test_sample_moments(self, poly2):
        x = sample(poly2, 200_000, seed=3)
        assert x.max() <= poly2.b
        assert abs(x.mean()) < 5 * math.sqrt(poly2.variance / x.size)

    @pytest.mark.parametrize("s", [0.3, 2.0, 20.0])
    def test_tilted_mean(self, poly2, s):
        x = sample_tilted(poly2, s, 100_000, seed=1)
        c = get_cgf(poly2)
        se = math.sqrt(c.psi(s, 2) / x.size)
        assert abs(x.mean() - c.psi(s, 1)) < 5 * se

    def test_tilted_atoms(self):
        tp = DistributionSpec.two_point(2.0, 0.3)
        x = sample_tilted(tp, 1.5, 100_000, seed=2)
        c = get_cgf(tp)
        assert abs(x.mean() - c.psi(1.5, 1)) < 5 * math.sqrt(c.psi(1.5, 2) / x.size)

    def test_sampling_is_reproducible(self, uniform):
        assert np.array_equal(sample(uniform, 1000, 5), sample(uniform, 1000, 5))
        assert not np.array_equal(sample(uniform, 1000, 5), sample(uniform, 1000, 6))

    def test_negative_tilt_rejected(self, uniform):
        with pytest.raises(ConfigError):
            sample_tilted(uniform, -1.0, 10, 0)
