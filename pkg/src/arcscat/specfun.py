"""Cylinder functions J_n, Y_n, H_n^(1) of complex argument, orders 0..2.

Near the origin the functions are summed from their power series, which also
yields the pieces needed for logarithmic kernel splitting::

    Y_n(z) = (2/pi) log(z/2) J_n(z) + Ysing_n(z) + Yreg_n(z)

where ``Ysing_n`` collects the negative powers (plus the constant of order 2)
and ``Yreg_n`` is an entire series vanishing like z**n. Outside the series
disk the AMOS routines in :mod:`scipy.special` are used and ``Yreg_n`` is
recovered by subtraction, which is harmless there because nothing is small.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

Z_MAX = 200.0
SERIES_RADIUS = 4.0
SERIES_RTOL = 1e-17
SERIES_MAX_TERMS = 120
EULER_GAMMA = 0.57721566490153286061


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _check_disk(z, allow_zero=True):
    az = np.abs(z)
    if np.any(az > Z_MAX):
        raise ValueError(f"argument outside supported range |z| <= {Z_MAX}")
    if not allow_zero and np.any(az == 0):
        raise ValueError("logarithmic singularity: Hankel function at z = 0")


def _check_order(n):
    if n not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {n!r}")


def _digamma_int(m):
    """psi(m) for positive integer m."""
    return -EULER_GAMMA + sum(1.0 / j for j in range(1, m))


def _series(z, n, coeff):
    """(z/2)**n * sum_m coeff(m) (-(z/2)**2)**m / (m! (m+n)!), summed to tolerance."""
    h = z / 2.0
    u = -(h * h)
    term = np.ones_like(z) / math.factorial(n)
    total = coeff(0) * term
    for m in range(1, SERIES_MAX_TERMS):
        term = term * u / (m * (m + n))
        inc = coeff(m) * term
        total = total + inc
        if np.all(np.abs(inc) <= SERIES_RTOL * np.abs(total)):
            break
    return h ** n * total


def _j_series(n, z):
    return _series(z, n, lambda m: 1.0)


def _yreg_series(n, z):
    return -_series(z, n, lambda m: _digamma_int(m + 1) + _digamma_int(m + n + 1)) / math.pi


def _ysing(n, z):
    if n == 0:
        return np.zeros_like(z)
    if n == 1:
        return -2.0 / (math.pi * z)
    return -4.0 / (math.pi * z * z) - 1.0 / math.pi


def _apply(z, small_fn, large_fn):
    z = _as_complex(z)
    out = np.empty_like(z)
    small = np.abs(z) <= SERIES_RADIUS
    if np.any(small):
        out[small] = small_fn(z[small])
    if np.any(~small):
        out[~small] = large_fn(z[~small])
    return out


def bessel_j(n: int, z):
    """J_n(z) for n in {0, 1, 2} and |z| <= Z_MAX."""
    _check_order(n)
    z = _as_complex(z)
    _check_disk(z)
    out = _apply(z, lambda s: _j_series(n, s), lambda s: _sp.jv(n, s))
    return out[()] if out.ndim == 0 else out


def bessel_y(n: int, z):
    _check_order(n)
    z = _as_complex(z)
    _check_disk(z, allow_zero=False)

    def small(s):
        return 2.0 / math.pi * np.log(s / 2.0) * _j_series(n, s) + _ysing(n, s) + _yreg_series(n, s)

    out = _apply(z, small, lambda s: _sp.yv(n, s))
    return out[()] if out.ndim == 0 else out


def hankel1(n: int, z):
    """H_n^(1)(z) = J_n(z) + i Y_n(z), principal branch of log."""
    _check_order(n)
    z = _as_complex(z)
    _check_disk(z, allow_zero=False)

    def small(s):
        y = 2.0 / math.pi * np.log(s / 2.0) * _j_series(n, s) + _ysing(n, s) + _yreg_series(n, s)
        return _j_series(n, s) + 1j * y

    out = _apply(z, small, lambda s: _sp.hankel1(n, s))
    return out[()] if out.ndim == 0 else out


def hankel1_upto(nmax: int, z):
    """[H_0, ..., H_nmax] by upward recurrence (stable for the dominant solution)."""
    z = _as_complex(z)
    out = [hankel1(0, z), hankel1(1, z)]
    for m in range(1, nmax):
        out.append(2.0 * m / z * out[m] - out[m - 1])
    return out[: nmax + 1]


def log_split_pieces(z):
    """Regular pieces of J_n, Y_n (n <= 2) for log-splitting, finite at z = 0.

    Returns a dict with ``J0, J1, J2, J1_z`` (= J1/z) and ``Yr0, Yr1, Yr2,
    Yr1_z`` (= Yreg_1/z). At z = 0 every entry takes its limit value.
    """
    z = _as_complex(z)
    _check_disk(z)
    small = np.abs(z) <= SERIES_RADIUS
    zs, zl = z[small], z[~small]
    out = {key: np.empty_like(z) for key in ("J0", "J1", "J2", "J1_z", "Yr0", "Yr1", "Yr2", "Yr1_z")}

    if zs.size:
        out["J0"][small] = _j_series(0, zs)
        j1_z = 0.5 * _series(zs, 0, lambda m: 1.0 / (m + 1))
        out["J1_z"][small] = j1_z
        out["J1"][small] = j1_z * zs
        out["J2"][small] = _j_series(2, zs)
        out["Yr0"][small] = _yreg_series(0, zs)
        yr1_z = -0.5 / math.pi * _series(
            zs, 0, lambda m: (_digamma_int(m + 1) + _digamma_int(m + 2)) / (m + 1)
        )
        out["Yr1_z"][small] = yr1_z
        out["Yr1"][small] = yr1_z * zs
        out["Yr2"][small] = _yreg_series(2, zs)

    if zl.size:
        logh = 2.0 / math.pi * np.log(zl / 2.0)
        j = [_sp.jv(n, zl) for n in range(3)]
        y = [_sp.yv(n, zl) for n in range(3)]
        for n in range(3):
            out[f"J{n}"][~small] = j[n]
            out[f"Yr{n}"][~small] = y[n] - logh * j[n] - _ysing(n, zl)
        out["J1_z"][~small] = j[1] / zl
        out["Yr1_z"][~small] = (y[1] - logh * j[1] - _ysing(1, zl)) / zl
    return out
