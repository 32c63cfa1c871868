"""Centered bounded laws with a right edge, their cumulant generating functions
and samplers.

Four families are supported:

* ``two_point``: an atom of mass ``theta`` at ``b`` and the balancing atom below.
* ``poly_edge``: ``b - eta = d * U**(1/r)`` so ``P{b - eta <= eps} = lam * eps**r``.
* ``discrete``: arbitrary finite atoms with zero mean.
* ``gaussian_sanity``: standard normal, used only to sanity-check samplers.
"""
from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import mpmath as mp
import numba as nb
import numpy as np
from scipy import integrate, special

from . import _rng
from .errors import ConfigError

__all__ = [
    "DistributionSpec",
    "CgfEval",
    "EdgeReport",
    "get_cgf",
    "psi",
    "edge_law_check",
    "sample",
    "sample_tilted",
    "load_spec",
    "spec_from_mapping",
]

KINDS = ("two_point", "poly_edge", "discrete", "gaussian_sanity")
_MEAN_TOL = 1e-12
_N_TAYLOR = 40


@dataclass(frozen=True)
class DistributionSpec:
    """Law of a single coefficient ``eta``.

    Use the class constructors rather than the raw initializer.

    Attributes
    ----------
    kind : str
        One of ``two_point``, ``poly_edge``, ``discrete``, ``gaussian_sanity``.
    b : float or None
        Right edge of the support.
    theta : float or None
        Mass of the atom at ``b`` (atom edge only).
    r : float or None
        Edge exponent (polynomial edge only).
    atoms : tuple of (point, prob)
        Support points for the finite families, sorted by point.
    """

    kind: str
    b: float | None = None
    theta: float | None = None
    r: float | None = None
    atoms: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "gaussian_sanity":
            return
        if self.b is None or not np.isfinite(self.b) or self.b <= 0:
            raise ConfigError("b must be a finite positive number")
        if self.kind == "poly_edge":
            if self.r is None or not np.isfinite(self.r) or self.r <= 0:
                raise ConfigError("r must be a finite positive number")
            return
        pts = np.array([a[0] for a in self.atoms], dtype=float)
        prob = np.array([a[1] for a in self.atoms], dtype=float)
        if len(pts) < 2:
            raise ConfigError("a finite law needs at least two atoms")
        if np.any(~np.isfinite(pts)) or np.any(prob <= 0) or np.any(~np.isfinite(prob)):
            raise ConfigError("atoms must be finite with positive probabilities")
        if abs(math.fsum(prob) - 1.0) > _MEAN_TOL:
            raise ConfigError("atom probabilities must sum to 1")
        if abs(math.fsum(pts * prob)) > _MEAN_TOL:
            raise ConfigError("the law must have zero mean")
        if len(np.unique(pts)) != len(pts):
            raise ConfigError("atom locations must be distinct")
        if pts.max() != self.b:
            raise ConfigError("b must equal the largest atom")
        if self.theta is None or not 0 < self.theta < 1:
            raise ConfigError("theta must lie in (0, 1)")

    # constructors -------------------------------------------------------
    @classmethod
    def two_point(cls, b=1.0, theta=0.5):
        b = float(b)
        theta = float(theta)
        if not 0 < theta < 1:
            raise ConfigError("theta must lie in (0, 1)")
        lo = -theta * b / (1.0 - theta)
        return cls("two_point", b=b, theta=theta, atoms=((lo, 1.0 - theta), (b, theta)))

    @classmethod
    def rademacher(cls):
        return cls.two_point(1.0, 0.5)

    @classmethod
    def poly_edge(cls, b=1.0, r=1.0):
        return cls("poly_edge", b=float(b), r=float(r))

    @classmethod
    def discrete(cls, atoms):
        try:
            pairs = sorted((float(p), float(w)) for p, w in atoms)
        except (TypeError, ValueError) as exc:
            raise ConfigError("atoms must be (point, probability) pairs") from exc
        if not pairs:
            raise ConfigError("atoms must not be empty")
        b, theta = pairs[-1]
        return cls("discrete", b=b, theta=theta, atoms=tuple(pairs))

    @classmethod
    def gaussian_sanity(cls):
        return cls("gaussian_sanity")

    # derived quantities -------------------------------------------------
    @property
    def edge(self):
        """``'atom'``, ``'poly'`` or ``None`` for the Gaussian check law."""
        if self.kind == "gaussian_sanity":
            return None
        return "poly" if self.kind == "poly_edge" else "atom"

    @property
    def d(self):
        """Width of the support of ``b - eta`` for the polynomial edge."""
        if self.kind != "poly_edge":
            return None
        return self.b * (self.r + 1.0) / self.r

    @property
    def lam(self):
        """Edge constant: ``theta`` for an atom, ``d**-r`` for a polynomial edge."""
        if self.kind == "poly_edge":
            return self.d ** (-self.r)
        return self.theta

    @property
    def support_lo(self):
        if self.kind == "gaussian_sanity":
            return -np.inf
        if self.kind == "poly_edge":
            return self.b - self.d
        return self.atoms[0][0]

    @property
    def span(self):
        return np.inf if self.kind == "gaussian_sanity" else self.b - self.support_lo

    @property
    def variance(self):
        if self.kind == "gaussian_sanity":
            return 1.0
        if self.kind == "poly_edge":
            r, d = self.r, self.d
            return d * d * r / (r + 2.0) - self.b**2
        return math.fsum(w * p * p for p, w in self.atoms)

    @property
    def label(self):
        if self.kind == "two_point":
            return f"two_point(b={self.b:g}, theta={self.theta:g})"
        if self.kind == "poly_edge":
            return f"poly_edge(b={self.b:g}, r={self.r:g})"
        if self.kind == "discrete":
            return f"discrete({len(self.atoms)} atoms)"
        return "gaussian_sanity"

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind in ("two_point", "poly_edge"):
            out["b"] = self.b
        if self.kind == "two_point":
            out["theta"] = self.theta
        if self.kind == "poly_edge":
            out["r"] = self.r
        if self.kind == "discrete":
            out["atoms"] = [list(a) for a in self.atoms]
        return out


# ---------------------------------------------------------------------------
# configuration

_PRESETS = {
    "rademacher": lambda: DistributionSpec.rademacher(),
    "uniform": lambda: DistributionSpec.poly_edge(1.0, 1.0),
    "gaussian": lambda: DistributionSpec.gaussian_sanity(),
}


def spec_from_mapping(cfg):
    """Build a spec from a mapping such as the ``[dist]`` table of a TOML file."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind is None:
        raise ConfigError("missing 'kind'")
    kind = str(kind)
    if kind in _PRESETS and not cfg:
        return _PRESETS[kind]()
    if kind == "two_point":
        return DistributionSpec.two_point(cfg.pop("b", 1.0), cfg.pop("theta", 0.5))
    if kind == "poly_edge":
        return DistributionSpec.poly_edge(cfg.pop("b", 1.0), cfg.pop("r", 1.0))
    if kind == "discrete":
        if "atoms" not in cfg:
            raise ConfigError("discrete law needs 'atoms'")
        return DistributionSpec.discrete(cfg.pop("atoms"))
    if kind in ("gaussian_sanity", "gaussian"):
        return DistributionSpec.gaussian_sanity()
    raise ConfigError(f"unknown distribution kind {kind!r}")


def load_spec(name_or_path, **params):
    """Resolve a preset name, a family name with parameters, or a TOML path.

    Parameters
    ----------
    name_or_path : str or Path
        ``rademacher``, ``uniform``, ``gaussian_sanity``, a family name
        (``two_point``, ``poly_edge``, ``discrete``) or a path to a TOML file
        containing a ``[dist]`` table.
    **params
        Family parameters (``b``, ``theta``, ``r``, ``atoms``); ``None`` values
        are ignored.
    """
    params = {k: v for k, v in params.items() if v is not None}
    text = str(name_or_path)
    if text.endswith(".toml") or Path(text).is_file():
        path = Path(text)
        if not path.is_file():
            raise ConfigError(f"config file not found: {text}")
        try:
            import tomllib
        except ModuleNotFoundError:  # python < 3.11
            import tomli as tomllib
        try:
            data = tomllib.loads(path.read_text())
        except Exception as exc:  # malformed toml
            raise ConfigError(f"cannot parse {text}: {exc}") from exc
        if "dist" not in data:
            raise ConfigError(f"{text} has no [dist] table")
        cfg = dict(data["dist"])
        cfg.update(params)
        return spec_from_mapping(cfg)
    return spec_from_mapping({"kind": text, **params})


# ---------------------------------------------------------------------------
# cumulant generating function

Core = namedtuple("Core", "psi L d1 lp d2 d3 d4 pterm")
Core.__doc__ = """Values of psi and related functions at an array of arguments.

``L = psi - b*s``, ``lp = psi' - b``, ``d1..d4`` are derivatives of psi and
``pterm = psi - s*psi'``.
"""


def _moments_eta(spec, n_max):
    """Raw moments of eta as mpmath numbers."""
    if spec.kind == "poly_edge":
        b, d, r = mp.mpf(spec.b), mp.mpf(spec.d), mp.mpf(spec.r)
        out = []
        for n in range(n_max + 1):
            acc = mp.mpf(0)
            for j in range(n + 1):
                acc += mp.binomial(n, j) * b ** (n - j) * (-d) ** j * r / (r + j)
            out.append(acc)
        return out
    pts = [(mp.mpf(p), mp.mpf(w)) for p, w in spec.atoms]
    return [mp.fsum(w * p**n for p, w in pts) for n in range(n_max + 1)]


def _cumulants(mom):
    n_max = len(mom) - 1
    kap = [mp.mpf(0)] * (n_max + 1)
    for n in range(1, n_max + 1):
        acc = mom[n]
        for m in range(1, n):
            acc -= mp.binomial(n - 1, m - 1) * kap[m] * mom[n - m]
        kap[n] = acc
    return kap


@nb.njit(cache=True)
def _horner_nb(c, s):
    out = np.empty_like(s)
    for i in range(s.shape[0]):
        acc = 0.0
        x = s[i]
        for j in range(c.shape[0] - 1, -1, -1):
            acc = acc * x + c[j]
        out[i] = acc
    return out


def _f2(z):
    """``exp(z) - 1 - z`` without cancellation."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 0.1
    zs = z[small]
    acc = np.zeros_like(zs)
    for n in range(12, 1, -1):
        acc = (acc + 1.0 / math.factorial(n)) * zs
    out[small] = acc * zs
    zl = z[~small]
    out[~small] = np.expm1(zl) - zl
    return out


class CgfEval:
    """Evaluator of ``psi(t) = log E exp(t * eta)`` and its derivatives.

    Parameters
    ----------
    spec : DistributionSpec
    mode : {"closed_form", "quadrature"}
        ``closed_form`` uses special-function formulas for the two-point and
        polynomial-edge families. ``quadrature`` uses finite sums over atoms or
        numerical integration against the density, and is always used for
        user-supplied discrete laws.

    Notes
    -----
    For ``|s| * span`` below a threshold the closed-form mode evaluates a
    Taylor series built from exact cumulants, which keeps every derivative
    accurate to relative precision near the origin.
    """

    def __init__(self, spec, mode="closed_form"):
        if mode not in ("closed_form", "quadrature"):
            raise ConfigError(f"unknown mode {mode!r}")
        self.spec = spec
        if spec.kind == "discrete" or spec.kind == "gaussian_sanity":
            mode = "quadrature" if spec.kind == "discrete" else "closed_form"
        self.mode = mode
        self.b = spec.b
        if spec.kind == "gaussian_sanity":
            return
        self.span = spec.span
        if spec.kind in ("two_point", "discrete"):
            self._pts = np.array([a[0] for a in spec.atoms])
            self._prob = np.array([a[1] for a in spec.atoms])
            self._y = self.b - self._pts
            self._logp = np.log(self._prob)
        if spec.kind == "poly_edge":
            self._log_lam_gamma = math.log(spec.lam) + special.gammaln(spec.r + 1.0)
        if mode == "closed_form":
            self._build_taylor()

    # -- Taylor branch --------------------------------------------------
    def _build_taylor(self):
        with mp.workdps(60):
            kap = _cumulants(_moments_eta(self.spec, _N_TAYLOR))
            kap[1] = mp.mpf(0)
            self._kappa = [float(k) for k in kap]
            coeffs = []
            for j in range(5):
                coeffs.append(
                    np.array([float(kap[m + j] / mp.factorial(m)) if m + j >= 2 else 0.0
                              for m in range(_N_TAYLOR + 1 - j)])
                )
            self._taylor = coeffs
            self._taylor_p = np.array(
                [float(kap[n] * (1 - n) / mp.factorial(n)) if n >= 2 else 0.0
                 for n in range(_N_TAYLOR + 1)])
            # radius check: shrink the branch until the last terms are negligible
            z0 = 0.5
            while True:
                h = mp.mpf(z0) / mp.mpf(self.span)
                lead = abs(kap[2]) * h**2 / 2
                tail = max(abs(kap[n]) * h**n / mp.factorial(n) for n in range(_N_TAYLOR - 5, _N_TAYLOR + 1))
                if tail <= mp.mpf("1e-20") * lead or z0 < 1e-3:
                    break
                z0 /= 2
        self._z0 = z0

    @staticmethod
    def _horner(c, s):
        return _horner_nb(c, np.ascontiguousarray(s, dtype=np.float64))

    def _core_taylor(self, s):
        c = self._taylor
        psi_ = self._horner(c[0], s)
        d1 = self._horner(c[1], s)
        return Core(psi_, psi_ - self.b * s, d1, d1 - self.b,
                    self._horner(c[2], s), self._horner(c[3], s), self._horner(c[4], s),
                    self._horner(self._taylor_p, s))

    # -- two-point closed form ------------------------------------------
    def _core_two_point(self, s):
        b, th = self.b, self.spec.theta
        D = self.span
        q = special.expit(math.log((1.0 - th) / th) - s * D)
        pq = q * (1.0 - q)
        L = np.logaddexp(math.log(th), math.log1p(-th) - s * D)
        lp = -D * q
        return Core(b * s + L, L, b + lp, lp, D * D * pq, -(D**3) * pq * (1.0 - 2.0 * q),
                    D**4 * pq * (1.0 - 6.0 * pq), L + s * D * q)

    # -- finite atoms ---------------------------------------------------
    def _core_atoms_large(self, s):
        lw = self._logp[None, :] - s[:, None] * self._y[None, :]
        L = special.logsumexp(lw, axis=1)
        w = np.exp(lw - L[:, None])
        c = np.argmax(w, axis=1)
        yc = self._y[c]
        ey_rel = np.sum(w * (self._y[None, :] - yc[:, None]), axis=1)
        ey = yc + ey_rel
        dev = (self._y[None, :] - yc[:, None]) - ey_rel[:, None]
        d2 = np.sum(w * dev**2, axis=1)
        d3 = -np.sum(w * dev**3, axis=1)
        d4 = np.sum(w * dev**4, axis=1) - 3.0 * d2**2
        return Core(self.b * s + L, L, self.b - ey, -ey, d2, d3, d4, L + s * ey)

    def _core_atoms_small(self, s):
        x = self._pts[None, :]
        p = self._prob[None, :]
        z = s[:, None] * x
        e1 = np.sum(p * _f2(z), axis=1)
        mgf = 1.0 + e1
        psi_ = np.log1p(e1)
        m = np.sum(p * x * np.expm1(z), axis=1) / mgf
        w = p * np.exp(z) / mgf[:, None]
        dev = x - m[:, None]
        d2 = np.sum(w * dev**2, axis=1)
        d3 = np.sum(w * dev**3, axis=1)
        d4 = np.sum(w * dev**4, axis=1) - 3.0 * d2**2
        return Core(psi_, psi_ - self.b * s, m, m - self.b, d2, d3, d4, psi_ - s * m)

    # -- polynomial edge ------------------------------------------------
    @staticmethod
    def _central(m1, m2, m3, m4):
        c2 = m2 - m1 * m1
        c3 = m3 - 3.0 * m1 * m2 + 2.0 * m1**3
        mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1**4
        return c2, c3, mu4 - 3.0 * c2 * c2

    def _core_poly_pos(self, s):
        r, d, b = self.spec.r, self.spec.d, self.b
        z = s * d
        p0 = special.gammainc(r, z)
        logp0 = np.where(p0 > 0.5, np.log1p(-special.gammaincc(r, z)), np.log(p0))
        L = self._log_lam_gamma - r * np.log(s) + logp0
        ms = []
        for n in range(1, 5):
            lr = special.gammaln(r + n) - special.gammaln(r)
            ms.append(np.exp(lr) * s ** (-n) * special.gammainc(r + n, z) / p0)
        c2, c3, k4 = self._central(*ms)
        m1 = ms[0]
        big = z > 60.0 + 10.0 * r
        if np.any(big):
            sb = s[big]
            m1 = np.where(big, r / s, m1)
            c2 = np.where(big, r / s**2, c2)
            c3 = np.where(big, 2.0 * r / s**3, c3)
            k4 = np.where(big, 6.0 * r / s**4, k4)
            del sb
        return Core(b * s + L, L, b - m1, -m1, c2, -c3, k4, L + s * m1)

    def _core_poly_neg(self, s):
        r, d, b = self.spec.r, self.spec.d, self.b
        z = -s * d
        f0 = special.hyp1f1(r, r + 1.0, z)
        ms = [d**n * r / (r + n) * special.hyp1f1(r + n, r + n + 1.0, z) / f0 for n in range(1, 5)]
        c2, c3, k4 = self._central(*ms)
        L = np.log(f0)
        m1 = ms[0]
        return Core(b * s + L, L, b - m1, -m1, c2, -c3, k4, L + s * m1)

    def _poly_quad_scalar(self, s):
        r, d = self.spec.r, self.spec.d
        y0 = 0.0 if s >= 0 else d
        top = d if s <= 0 else min(d, 200.0 / s)
        ints = []
        for n in range(5):
            val, _ = integrate.quad(
                lambda y: y**n * np.exp(-s * (y - y0)) * r / d**r, 0.0, top,
                weight="alg", wvar=(r - 1.0, 0.0), epsabs=0.0, epsrel=1e-13, limit=200)
            ints.append(val)
        L = -s * y0 + math.log(ints[0])
        ms = [ints[n] / ints[0] for n in range(1, 5)]
        return L, ms

    def _core_poly_quad(self, s):
        b = self.b
        L = np.empty_like(s)
        ms = np.empty((4, s.size))
        for i, si in enumerate(s):
            L[i], m = self._poly_quad_scalar(float(si))
            ms[:, i] = m
        c2, c3, k4 = self._central(*ms)
        m1 = ms[0]
        return Core(b * s + L, L, b - m1, -m1, c2, -c3, k4, L + s * m1)

    # -- dispatch -------------------------------------------------------
    def core(self, s):
        """All values at the 1-D float array ``s``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if s.ndim != 1:
            s = s.ravel()
        kind = self.spec.kind
        if kind == "gaussian_sanity":
            nan = np.full_like(s, np.nan)
            one = np.ones_like(s)
            zero = np.zeros_like(s)
            return Core(0.5 * s * s, nan, s.copy(), nan, one, zero, zero, -0.5 * s * s)
        if self.mode == "quadrature":
            if kind == "poly_edge":
                return self._core_poly_quad(s)
            small = np.abs(s) * self.span <= 1.0
            return self._assemble(s, small, self._core_atoms_small, self._core_atoms_large)
        small = np.abs(s) * self.span <= self._z0
        if kind == "two_point":
            return self._assemble(s, small, self._core_taylor, self._core_two_point)

        def large(v):
            pos = v > 0
            if np.all(pos):
                return self._core_poly_pos(v)
            return self._assemble(v, ~pos, self._core_poly_neg, self._core_poly_pos)

        return self._assemble(s, small, self._core_taylor, large)

    @staticmethod
    def _assemble(s, mask, f_true, f_false):
        if np.all(mask):
            return f_true(s)
        if not np.any(mask):
            return f_false(s)
        a = f_true(s[mask])
        c = f_false(s[~mask])
        out = []
        for va, vc in zip(a, c):
            v = np.empty_like(s)
            v[mask] = va
            v[~mask] = vc
            out.append(v)
        return Core(*out)

    def psi(self, t, order=0):
        """``psi^{(order)}(t)`` for ``order`` in 0..4; scalar in, scalar out."""
        if order not in (0, 1, 2, 3, 4):
            raise ConfigError("order must be one of 0, 1, 2, 3, 4")
        arr = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ConfigError("t must be finite")
        c = self.core(arr.ravel())
        val = (c.psi, c.d1, c.d2, c.d3, c.d4)[order].reshape(arr.shape)
        return float(val) if arr.ndim == 0 else val

    def L(self, t):
        """``psi(t) - b*t``."""
        arr = np.asarray(t, dtype=float)
        val = self.core(arr.ravel()).L.reshape(arr.shape)
        return float(val) if arr.ndim == 0 else val

    def lprime(self, t):
        """``psi'(t) - b``."""
        arr = np.asarray(t, dtype=float)
        val = self.core(arr.ravel()).lp.reshape(arr.shape)
        return float(val) if arr.ndim == 0 else val


@lru_cache(maxsize=64)
def get_cgf(spec, mode="closed_form"):
    """Cached :class:`CgfEval` for ``spec``."""
    return CgfEval(spec, mode)


def psi(spec, t, order=0, mode="closed_form"):
    """Derivative of order ``order`` of the cumulant generating function at ``t``."""
    return get_cgf(spec, mode).psi(t, order)


# ---------------------------------------------------------------------------
# edge law

@dataclass(frozen=True)
class EdgeReport:
    """Ratio of ``P{b - eta <= eps}`` to its edge model on a grid of ``eps``."""

    eps: np.ndarray
    ratio: np.ndarray
    max_abs_dev: float
    ok: bool


def edge_law_check(spec, eps_grid, tol=1e-9):
    """Check the near-edge law against ``theta`` (atom) or ``lam * eps**r`` (poly)."""
    eps = np.asarray(eps_grid, dtype=float)
    if spec.kind == "gaussian_sanity":
        raise ConfigError("the Gaussian check law has no right edge")
    if np.any(eps <= 0):
        raise ConfigError("eps must be positive")
    if spec.kind == "poly_edge":
        d = spec.d
        mass = np.where(eps >= d, 1.0, (np.minimum(eps, d) / d) ** spec.r)
        model = spec.lam * eps**spec.r
    else:
        y = np.array([spec.b - p for p, _ in spec.atoms])
        w = np.array([w for _, w in spec.atoms])
        mass = np.array([w[y <= e].sum() for e in eps])
        model = np.full_like(eps, spec.theta)
    ratio = mass / model
    if spec.kind == "poly_edge":
        inside = eps <= spec.d
    else:
        inside = eps < min(spec.b - p for p, _ in spec.atoms if p < spec.b)
    dev = float(np.max(np.abs(ratio[inside] - 1.0))) if np.any(inside) else 0.0
    return EdgeReport(eps, ratio, dev, dev <= tol)


# ---------------------------------------------------------------------------
# sampling

@nb.njit(cache=True, nogil=True)
def _poly_reject(key, row0, s, d, r):
    """Exact tilted draws of ``b - eta`` by rejection from the base law."""
    n = s.shape[0]
    out = np.empty(n)
    inv_r = 1.0 / r
    for i in range(n):
        base = _rng._row_base(key, row0 + i)
        out[i] = np.nan
        for j in range(4096):
            y = d * _rng._uniform(base, 2 * j) ** inv_r
            if _rng._uniform(base, 2 * j + 1) <= np.exp(-s[i] * y):
                out[i] = y
                break
    return out


def poly_tilted_gap(spec, s, u, reject_key, row0=0):
    """Draw ``b - eta`` under the tilt ``exp(s * eta)`` for the polynomial edge.

    Parameters
    ----------
    spec : DistributionSpec
    s : ndarray
        Tilt per draw, ``s >= 0``.
    u : ndarray
        Uniforms of the same shape used by the inverse-CDF branch.
    reject_key : uint64
        Key for the rejection branch, used where ``s * d < 1`` and ``r != 1``.
    """
    r, d = spec.r, spec.d
    s = np.asarray(s, dtype=float)
    u = np.asarray(u, dtype=float)
    s, u = np.broadcast_arrays(s, u)
    out = np.empty(s.shape)
    z = s * d
    if r == 1.0:
        # truncated exponential: closed-form inverse for every tilt
        pos = z > 0
        out[~pos] = d * u[~pos]
        out[pos] = -np.log1p(u[pos] * np.expm1(-z[pos])) / s[pos]
        return np.clip(out, 0.0, d)
    inv = z >= 1.0
    if np.any(inv):
        zi, ui = z[inv], u[inv]
        p_all = special.gammainc(r, zi)
        p = ui * p_all
        root = np.where(
            p < 0.5,
            special.gammaincinv(r, np.minimum(p, 0.5)),
            special.gammainccinv(r, np.maximum((1.0 - ui) + ui * special.gammaincc(r, zi), 0.0)),
        )
        out[inv] = np.clip(root, 0.0, zi) / s[inv]
    rej = ~inv
    if np.any(rej):
        idx = np.flatnonzero(rej.ravel())
        draws = _poly_reject(reject_key, row0, s.ravel()[idx].copy(), d, r)
        out.ravel()[idx] = draws
    if np.any(~np.isfinite(out)):
        raise RuntimeError("tilted sampler failed to produce a draw")
    return out


def _atom_draw(spec, s, u):
    pts = np.array([a[0] for a in spec.atoms])
    logp = np.log([a[1] for a in spec.atoms])
    lw = logp[None, :] + float(s) * (pts - spec.b)[None, :]
    w = np.exp(lw - special.logsumexp(lw, axis=1, keepdims=True))
    cum = np.cumsum(w, axis=1)
    idx = np.searchsorted(cum[0, :-1], u, side="right")
    return pts[idx]


def sample_tilted(spec, s, n, seed):
    """``n`` draws of ``eta`` under the tilted law ``exp(s*eta - psi(s)) dP``.

    Parameters
    ----------
    spec : DistributionSpec
    s : float
        Tilt parameter, ``s >= 0``.
    n : int
        Number of draws.
    seed : int
        Seed of the counter-based generator.
    """
    s = float(s)
    if s < 0 or not np.isfinite(s):
        raise ConfigError("tilt must be finite and non-negative")
    n = int(n)
    key = _rng.derive_key(seed, 1)
    if spec.kind == "gaussian_sanity":
        return s + _rng.normal_block(key, 0, n, 1)[:, 0]
    u = _rng.uniform_block(key, 0, n, 1)[:, 0]
    if spec.kind == "poly_edge":
        gap = poly_tilted_gap(spec, np.full(n, s), u, _rng.derive_key(seed, 2))
        return spec.b - gap
    return _atom_draw(spec, s, u)


def sample(spec, n, seed):
    """``n`` draws of ``eta`` from its own law."""
    return sample_tilted(spec, 0.0, n, seed)
