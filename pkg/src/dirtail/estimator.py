"""scikit-learn style front end for tail evaluation."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils import check_array

from .asymptotics import density_thm, tail_saddlepoint, tail_thm
from .constants import asymptotic_constants
from .distributions import DistributionSpec, get_cgf, load_spec
from .errors import ConfigError
from .montecarlo import McConfig, estimate_tail
from .saddle import solve_t
from .series import check_alpha

_METHODS = ("thm", "saddle", "mc", "density")


class DirichletTail(BaseEstimator, TransformerMixin):
    """Log tail probabilities of the series at the levels in ``X``.

    Parameters
    ----------
    dist : str, path or DistributionSpec
        Preset name, TOML file or a ready spec.
    alpha : float
    method : {"thm", "saddle", "mc", "density"}
    n_samples, k_trunc, seed, threads
        Monte Carlo settings, used when ``method == "mc"``.

    Examples
    --------
    >>> est = DirichletTail(dist="rademacher", alpha=1.0, method="thm").fit()
    >>> est.predict([[6.0], [8.0]]).shape
    (2,)
    """

    def __init__(self, dist="rademacher", alpha=1.0, method="saddle", n_samples=100_000,
                 k_trunc="auto", seed=0, threads=1):
        self.dist = dist
        self.alpha = alpha
        self.method = method
        self.n_samples = n_samples
        self.k_trunc = k_trunc
        self.seed = seed
        self.threads = threads

    def fit(self, X=None, y=None):
        if self.method not in _METHODS:
            raise ConfigError(f"method must be one of {_METHODS}")
        spec = self.dist if isinstance(self.dist, DistributionSpec) else load_spec(self.dist)
        self.alpha_ = check_alpha(self.alpha)
        self.spec_ = spec
        self.cgf_ = get_cgf(spec)
        self.constants_ = asymptotic_constants(spec, self.alpha_) if spec.edge else None
        return self

    def _check_fitted(self):
        if not hasattr(self, "spec_"):
            raise NotFittedError("call fit before predict")

    def _levels(self, X):
        X = check_array(X, ensure_2d=False, dtype=float)
        return np.asarray(X, dtype=float).ravel()

    def predict(self, X):
        """Log tail (or log density for ``method="density"``) at each level."""
        self._check_fitted()
        out = []
        for x in self._levels(X):
            if self.method == "thm":
                out.append(tail_thm(self.cgf_, self.alpha_, x).log_value)
            elif self.method == "density":
                out.append(density_thm(self.cgf_, self.alpha_, x).log_value)
            elif self.method == "saddle":
                out.append(tail_saddlepoint(self.cgf_, self.alpha_, x).log_value)
            else:
                cfg = McConfig(self.n_samples, self.k_trunc, self.seed, self.threads)
                out.append(estimate_tail(self.cgf_, self.alpha_, x, cfg).log_estimate)
        return np.array(out)

    def transform(self, X):
        return self.predict(X)[:, None]

    def tilt(self, X):
        """Solved tilt ``t(x)`` at each level."""
        self._check_fitted()
        return np.array([solve_t(self.cgf_, self.alpha_, x).t for x in self._levels(X)])
