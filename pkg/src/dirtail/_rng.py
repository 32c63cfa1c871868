"""Counter-based uniforms.

Every draw is a pure function of ``(key, row, col)`` so results do not depend
on how work is split across threads.
"""
import numba as nb
import numpy as np

_G1 = np.uint64(0x9E3779B97F4A7C15)
_G2 = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(inline="always", cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(inline="always", cache=True)
def _row_base(key, row):
    return _mix(key ^ (np.uint64(row) * _G1))


@nb.njit(inline="always", cache=True)
def _uniform(base, col):
    # open interval (0, 1)
    z = _mix(base + np.uint64(col) * _G2)
    return ((z >> _S11) + 0.5) * _INV53


def derive_key(seed, *tags):
    """Mix an integer seed with integer stream tags into a 64-bit key."""
    z = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        z = _mix_py(z ^ _G1)
        for tag in tags:
            z = _mix_py(z ^ (np.uint64(int(tag) & 0xFFFFFFFFFFFFFFFF) * _G2))
    return z


def _mix_py(z):
    z = np.uint64(z)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True, nogil=True)
def uniform_block(key, row0, n_rows, n_cols):
    """Uniforms ``u[i, j]`` keyed by ``(key, row0 + i, j)``."""
    out = np.empty((n_rows, n_cols))
    for i in range(n_rows):
        base = _row_base(key, row0 + i)
        for j in range(n_cols):
            out[i, j] = _uniform(base, j)
    return out


@nb.njit(cache=True, nogil=True)
def normal_block(key, row0, n_rows, n_cols):
    """Standard normals by Box-Muller on counter-based uniform pairs."""
    out = np.empty((n_rows, n_cols))
    for i in range(n_rows):
        base = _row_base(key, row0 + i)
        for j in range(n_cols):
            u1 = _uniform(base, 2 * j)
            u2 = _uniform(base, 2 * j + 1)
            out[i, j] = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return out


@nb.njit(cache=True, nogil=True)
def atom_sums(key, row0, n_rows, cum, vals):
    """Sum over ``k`` of ``vals[k, j_k]`` where ``j_k`` is drawn from row ``cum[k]``.

    ``cum[k]`` is a cumulative probability vector; the last entry is treated
    as 1 regardless of rounding.
    """
    n_k, m = cum.shape
    out = np.empty(n_rows)
    for i in range(n_rows):
        base = _row_base(key, row0 + i)
        acc = 0.0
        comp = 0.0
        for k in range(n_k):
            u = _uniform(base, k)
            j = 0
            while j < m - 1 and u >= cum[k, j]:
                j += 1
            v = vals[k, j]
            # Neumaier summation
            s = acc + v
            if abs(acc) >= abs(v):
                comp += (acc - s) + v
            else:
                comp += (v - s) + acc
            acc = s
        out[i] = acc + comp
    return out


@nb.njit(cache=True, nogil=True)
def gauss_sums(key, row0, n_rows, w):
    """Sum over ``k`` of ``w[k] * Z_k`` with counter-based standard normals."""
    n_k = w.shape[0]
    out = np.empty(n_rows)
    for i in range(n_rows):
        base = _row_base(key, row0 + i)
        acc = 0.0
        comp = 0.0
        for k in range(n_k):
            u1 = _uniform(base, 2 * k)
            u2 = _uniform(base, 2 * k + 1)
            v = w[k] * np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
            s = acc + v
            if abs(acc) >= abs(v):
                comp += (acc - s) + v
            else:
                comp += (v - s) + acc
            acc = s
        out[i] = acc + comp
    return out


@nb.njit(cache=True)
def neumaier_sum(x):
    """Compensated sum of a 1-D float array."""
    acc = 0.0
    comp = 0.0
    for i in range(x.shape[0]):
        v = x[i]
        s = acc + v
        if abs(acc) >= abs(v):
            comp += (acc - s) + v
        else:
            comp += (v - s) + acc
        acc = s
    return acc + comp


@nb.njit(cache=True, nogil=True)
def trunc_exp_sums(key, row0, n_rows, s, w, d):
    """Row sums ``sum_j w[j] * y[i, j]`` where ``y[i, j]`` is exponential with
    rate ``s[j]`` truncated to ``[0, d]``, drawn by inversion of the uniform
    keyed by ``(key, row0 + i, j)``."""
    k = s.shape[0]
    em = np.empty(k)
    for j in range(k):
        em[j] = np.expm1(-s[j] * d) if s[j] > 0 else 0.0
    out = np.empty(n_rows)
    for i in range(n_rows):
        base = _row_base(key, row0 + i)
        acc = 0.0
        for j in range(k):
            u = _uniform(base, j)
            if s[j] > 0:
                y = -np.log1p(u * em[j]) / s[j]
                if y > d:
                    y = d
            else:
                y = d * u
            acc += w[j] * y
        out[i] = acc
    return out
