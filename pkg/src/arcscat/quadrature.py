"""Chebyshev grids, the spectral log-kernel rule and tangential derivatives.

All functions on the arc are sampled at theta_j = pi (2j + 1) / (2N), i.e. at
t_j = cos(theta_j), and regarded as even 2*pi-periodic functions of theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as _fft

from .geometry import ArcParametrization


@dataclass(frozen=True)
class ChebyshevGrid:
    n_points: int
    angles: np.ndarray = field(init=False, repr=False, compare=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError(f"need at least one point, got {self.n_points}")
        theta = np.pi * (2 * np.arange(self.n_points) + 1) / (2 * self.n_points)
        object.__setattr__(self, "angles", theta)
        object.__setattr__(self, "nodes", np.cos(theta))


def cos_coeffs(values):
    """a_n = (2 - delta_0n)/N sum_j v_j cos(n theta_j), along the last axis."""
    values = np.asarray(values)
    n = values.shape[-1]
    a = _fft.dct(values, type=2, axis=-1) / n
    a[..., 0] *= 0.5
    return a


def cos_synthesis(coeffs, theta=None):
    """Evaluate sum_n a_n cos(n theta); at the grid angles when ``theta`` is None."""
    coeffs = np.asarray(coeffs)
    n = coeffs.shape[-1]
    if theta is None:
        c = coeffs.copy()
        c[..., 0] *= 2.0
        return _fft.dct(c, type=3, axis=-1) / 2.0
    theta = np.asarray(theta, dtype=float)
    return np.cos(np.multiply.outer(theta, np.arange(n))) @ coeffs


def log_eigenvalues(n: int) -> np.ndarray:
    """lambda_0 = log(2)/2, lambda_m = 1/(2m)."""
    lam = np.empty(n)
    lam[0] = 0.5 * math.log(2.0)
    if n > 1:
        lam[1:] = 0.5 / np.arange(1, n)
    return lam


@dataclass(frozen=True)
class LogWeights:
    """R[i, j] = R_j(theta_i) such that

    int_0^pi log|cos t_i - cos t'| f(t') dt' ~= (pi/N) sum_j R[i, j] f(theta_j).
    """

    n_points: int
    aux: np.ndarray = field(repr=False, compare=False)
    matrix: np.ndarray = field(repr=False, compare=False)


def log_weights(n: int) -> LogWeights:
    if n < 1:
        raise ValueError(f"need N >= 1, got {n}")
    lam = log_eigenvalues(n)
    w = np.where(np.arange(n) == 0, 1.0, 2.0) * lam
    ell = np.arange(2 * n)
    aux = -np.cos(np.outer(ell, np.arange(n)) * (np.pi / n)) @ w
    i = np.arange(n)
    mat = aux[np.abs(i[:, None] - i[None, :])] + aux[i[:, None] + i[None, :] + 1]
    return LogWeights(n_points=n, aux=aux, matrix=mat)


def apply_log_quadrature(weights: LogWeights, smooth_factor, density, i=None):
    """(pi/N) sum_j factor_j density_j R[i, j]; every target when ``i`` is None."""
    factor = np.asarray(smooth_factor)
    density = np.asarray(density)
    n = weights.n_points
    if density.shape[-1] != n or factor.shape[-1] != n:
        raise ValueError(f"grid mismatch: expected samples on {n} points")
    rows = weights.matrix if i is None else weights.matrix[i]
    if factor.ndim == 2:
        # factor depends on the target as well: factor[i, j]
        if i is not None:
            factor = factor[i]
        return np.pi / n * np.sum(rows * factor * density, axis=-1)
    return np.pi / n * (rows @ (factor * density))


def theta_derivative_matrix(n: int) -> np.ndarray:
    """Dense d/dtheta acting on samples of an even cosine series of degree < n."""
    theta = ChebyshevGrid(n).angles
    modes = np.arange(n)
    analysis = np.cos(np.outer(modes, theta)) * (np.where(modes == 0, 1.0, 2.0) / n)[:, None]
    return (np.sin(np.outer(theta, modes)) * -modes) @ analysis


@dataclass(frozen=True)
class DiffOps:
    """D_s = d/ds along increasing t and D_s^w v = w D_s[w v], as N x N matrices."""

    ds: np.ndarray = field(repr=False)
    dsw: np.ndarray = field(repr=False)


def tangential_derivative_ops(arc: ArcParametrization, grid: ChebyshevGrid) -> DiffOps:
    theta = grid.angles
    jac = arc.jacobian(grid.nodes)
    dtheta = theta_derivative_matrix(grid.n_points)
    ds = -(1.0 / (jac * np.sin(theta)))[:, None] * dtheta
    dsw = -(np.sin(theta) / jac)[:, None] * dtheta - np.diag(np.cos(theta) / jac)
    return DiffOps(ds=ds, dsw=dsw)
