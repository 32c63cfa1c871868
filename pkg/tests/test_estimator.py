import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from dirtail.asymptotics import tail_thm
from dirtail.distributions import DistributionSpec
from dirtail.errors import ConfigError
from dirtail.estimator import DirichletTail


def test_thm_predict(rademacher):
    est = DirichletTail(dist="rademacher", alpha=1.0, method="thm").fit()
    out = est.predict([[4.0], [6.0]])
    assert out.shape == (2,)
    assert out[0] == tail_thm(rademacher, 1.0, 4.0).log_value
    assert est.transform([4.0, 6.0]).shape == (2, 1)


def test_spec_object_and_tilt():
    est = DirichletTail(dist=DistributionSpec.poly_edge(1.0, 2.0), alpha=0.75, method="saddle").fit()
    t = est.tilt(np.array([3.0, 5.0]))
    assert t[1] > t[0] > 0
    assert np.all(np.diff(est.predict([3.0, 5.0])) < 0)
    assert est.constants_.alpha == 0.75


def test_mc_method():
    est = DirichletTail(method="mc", n_samples=2000, k_trunc=16, seed=3).fit()
    a = est.predict([1.0])
    assert np.isfinite(a[0]) and a[0] < 0
    assert np.array_equal(a, clone(est).fit().predict([1.0]))


def test_density_method():
    est = DirichletTail(method="density").fit()
    assert est.predict([5.0])[0] > DirichletTail(method="thm").fit().predict([5.0])[0]


def test_params_and_errors():
    est = DirichletTail(alpha=0.8)
    assert est.get_params()["alpha"] == 0.8
    with pytest.raises(NotFittedError):
        est.predict([1.0])
    with pytest.raises(ConfigError):
        DirichletTail(method="magic").fit()
    with pytest.raises(ConfigError):
        DirichletTail(alpha=0.3).fit()
    with pytest.raises(ValueError):
        DirichletTail().fit().predict([[np.nan]])
