"""Thermoelastic fundamental solution, its log-splitting, and regularized kernels.

Two independent evaluation routes live here:

* a radial derivative engine (:func:`gamma_derivatives`) giving Cartesian
  derivatives of gamma_k(z) = (i/4) H_0(k|z|) of any order, used for the
  fundamental solution off the arc and for layer potentials;
* a log-splitting route on parameter pairs (t, tau) producing
  ``K = one * log|t - tau| + two`` with analytic ``two`` on the diagonal, used
  by the Nystrom assembly.

Kernel matrices follow the representation convention U(x) = int K(x, y) psi(y):
the single-layer kernel is E(x, y)^T. Gradients are taken in x; grad_y = -grad_x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .geometry import ArcParametrization
from .medium import MediumParams, WaveNumbers, compute_wavenumbers, regularization_constants
from .specfun import hankel1_upto, log_split_pieces

ROT = np.array([[0.0, -1.0], [1.0, 0.0]])  # the matrix A in M(d, nu) = A D_s
I2 = np.eye(2)
_ZERO_SUM_TOL = 1e-10


# ---------------------------------------------------------------------------
# Radial derivative engine
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _derivative_terms(a1: int, a2: int):
    """d1^a1 d2^a2 g(|z|) as {(p1, p2, m): c} meaning sum c z1^p1 z2^p2 f_m(r),

    where f_m = (r^-1 d/dr)^m g, using d_j f_m = z_j f_{m+1}.
    """
    terms = {(0, 0, 0): 1}
    for axis, count in ((0, a1), (1, a2)):
        for _ in range(count):
            new: dict = {}
            for (p1, p2, m), c in terms.items():
                p = [p1, p2]
                if p[axis] > 0:
                    q = list(p)
                    q[axis] -= 1
                    key = (q[0], q[1], m)
                    new[key] = new.get(key, 0) + c * p[axis]
                q = list(p)
                q[axis] += 1
                key = (q[0], q[1], m + 1)
                new[key] = new.get(key, 0) + c
            terms = new
    return tuple(terms.items())


def multi_indices(order: int):
    return [(a, n - a) for n in range(order + 1) for a in range(n, -1, -1)]


def gamma_derivatives(k: complex, z, order: int) -> dict:
    """All Cartesian derivatives of gamma_k at z (shape (..., 2)) up to ``order``.

    Returns {(a1, a2): array} for a1 + a2 <= order; z must be nonzero.
    """
    z = np.asarray(z, dtype=float)
    z1, z2 = z[..., 0], z[..., 1]
    r = np.hypot(z1, z2)
    h = hankel1_upto(max(order, 1), k * r)
    f = [0.25j * (-k) ** m * h[m] / r ** m for m in range(order + 1)]
    out = {}
    for a1, a2 in multi_indices(order):
        acc = np.zeros(r.shape, dtype=complex)
        for (p1, p2, m), c in _derivative_terms(a1, a2):
            acc = acc + c * z1 ** p1 * z2 ** p2 * f[m]
        out[(a1, a2)] = acc
    return out


def _shift(alpha, *axes):
    a = list(alpha)
    for ax in axes:
        a[ax] += 1
    return tuple(a)


# ---------------------------------------------------------------------------
# Material coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelCoefficients:
    """Scalar prefactors shared by all kernels of one medium."""

    m: MediumParams
    w: WaveNumbers

    @classmethod
    def of(cls, m: MediumParams, w: WaveNumbers | None = None) -> "KernelCoefficients":
        return cls(m=m, w=compute_wavenumbers(m) if w is None else w)

    @property
    def ks(self):
        return self.w.ks

    @property
    def k1(self):
        return self.w.k1

    @property
    def k2(self):
        return self.w.k2

    @property
    def delta(self):
        return self.w.delta

    @property
    def L(self):
        return self.m.lam2mu

    @property
    def rho_w2(self):
        return self.m.rho * self.m.omega ** 2

    @property
    def iwe(self):
        """i omega eta."""
        return 1j * self.m.omega * self.m.eta

    @property
    def a1(self):
        return (self.w.kp ** 2 - self.k2 ** 2) / self.delta

    @property
    def a2(self):
        return (self.w.kp ** 2 - self.k1 ** 2) / self.delta

    @property
    def e12(self):
        return self.iwe / (self.delta * self.L)

    @property
    def e21(self):
        return -self.m.gamma / (self.delta * self.L)

    def wavenumber(self, key: str) -> complex:
        return {"s": self.ks, "1": self.k1, "2": self.k2}[key]

    @property
    def phi_combo(self) -> dict:
        """Phi = gamma_ks - a1 gamma_k1 + a2 gamma_k2 (entries of E11 via grad grad Phi)."""
        return {"s": 1.0, "1": -self.a1, "2": self.a2}

    @property
    def e22_combo(self) -> dict:
        return {"1": -(self.w.kp ** 2 - self.k1 ** 2) / self.delta,
                "2": (self.w.kp ** 2 - self.k2 ** 2) / self.delta}


# ---------------------------------------------------------------------------
# Fundamental solution via the derivative engine
# ---------------------------------------------------------------------------

def _combo_derivative(dg: dict, combo: dict, alpha) -> np.ndarray:
    return sum(c * dg[key][alpha] for key, c in combo.items())


def fundamental_derivatives(coef: KernelCoefficients, z, order: int = 0) -> dict:
    """{alpha: d_z^alpha E(z)} with E of shape (..., 3, 3), z = x - y."""
    z = np.asarray(z, dtype=float)
    if np.any(np.hypot(z[..., 0], z[..., 1]) == 0):
        raise ValueError("on-diagonal evaluation: x == y")
    dg = {key: gamma_derivatives(coef.wavenumber(key), z, order + 2) for key in ("s", "1", "2")}
    phi = coef.phi_combo
    diff = {"1": 1.0, "2": -1.0}
    e22 = coef.e22_combo
    out = {}
    for alpha in multi_indices(order):
        E = np.zeros(z.shape[:-1] + (3, 3), dtype=complex)
        for a in range(2):
            for b in range(2):
                val = _combo_derivative(dg, phi, _shift(alpha, a, b)) / coef.rho_w2
                if a == b:
                    val = val + dg["s"][alpha] / coef.m.mu
                E[..., a, b] = val
            grad = _combo_derivative(dg, diff, _shift(alpha, a))
            E[..., a, 2] = coef.e12 * grad
            E[..., 2, a] = coef.e21 * grad
        E[..., 2, 2] = _combo_derivative(dg, e22, alpha)
        out[alpha] = E
    return out


def eval_fundamental(m: MediumParams, w: WaveNumbers | None, x, y) -> np.ndarray:
    """The 3x3 matrix E(x, y) = [[E11, E12], [E21^T, E22]]."""
    coef = KernelCoefficients.of(m, w)
    z = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return fundamental_derivatives(coef, z, 0)[(0, 0)]


def _traction(lam, mu, grad_u, nu):
    """sigma(u) nu with grad_u[..., a, b] = d_b u_a."""
    div = grad_u[..., 0, 0] + grad_u[..., 1, 1]
    sym = grad_u + np.swapaxes(grad_u, -1, -2)
    return lam * div[..., None] * nu + mu * np.einsum("...ab,...b->...a", sym, nu)


def layer_kernel(kind: int, coef: KernelCoefficients, x, y, nu_y) -> np.ndarray:
    """(B_kind^*(d_y, nu_y) E(x, y))^T, the potential kernel for boundary condition ``kind``.

    Broadcasts over leading axes of x, y, nu_y; returns (..., 3, 3).
    """
    if kind not in (1, 2, 3, 4):
        raise ValueError(f"boundary condition kind must be 1..4, got {kind}")
    z = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    nu = np.broadcast_to(np.asarray(nu_y, dtype=float), z.shape)
    d = fundamental_derivatives(coef, z, 1 if kind != 1 else 0)
    G = d[(0, 0)]
    if kind == 1:
        return np.swapaxes(G, -1, -2)
    # d/dy_b G = -d/dz_b G
    dyG = np.stack([-d[(1, 0)], -d[(0, 1)]], axis=-1)  # (..., 3, 3, b)
    H = np.empty_like(G)
    for c in range(3):
        u = G[..., 0:2, c]
        p = G[..., 2, c]
        if kind in (2, 4):
            grad_u = dyG[..., 0:2, c, :]
            H[..., 0:2, c] = _traction(coef.m.lam, coef.m.mu, grad_u, nu) - coef.iwe * nu * p[..., None]
        else:
            H[..., 0:2, c] = u
        if kind in (2, 3):
            H[..., 2, c] = np.einsum("...b,...b->...", dyG[..., 2, c, :], nu)
        else:
            H[..., 2, c] = -p
    return np.swapaxes(H, -1, -2)


# ---------------------------------------------------------------------------
# Log-splitting on parameter pairs
# ---------------------------------------------------------------------------

@dataclass
class Split:
    """A kernel K(t, tau) = one * log|t - tau| + two, values of shape (..., *block)."""

    one: np.ndarray
    two: np.ndarray

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Split":
        return Split(fn(self.one), fn(self.two))

    def __add__(self, other: "Split") -> "Split":
        return Split(self.one + other.one, self.two + other.two)

    def __sub__(self, other: "Split") -> "Split":
        return Split(self.one - other.one, self.two - other.two)

    def __mul__(self, c) -> "Split":
        return Split(self.one * c, self.two * c)

    __rmul__ = __mul__

    def full(self, logd: np.ndarray) -> np.ndarray:
        """one * log|t - tau| + two; ``logd`` broadcast against the value shape."""
        extra = self.one.ndim - logd.ndim
        return self.one * logd.reshape(logd.shape + (1,) * extra) + self.two


class PairGeometry:
    """Geometry of parameter pairs (t, tau) on an arc, broadcast together.

    Diagonal pairs (t == tau) carry the limits log(r/|t - tau|) -> log|x'(t)| and
    (x(t) - x(tau))/r -> x'(t)/|x'(t)|.
    """

    def __init__(self, arc: ArcParametrization, t, tau):
        t, tau = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(tau, dtype=float))
        self.arc = arc
        self.t, self.tau = t, tau
        xt, xs = arc.position(t), arc.position(tau)
        der_t = arc.derivative(t)
        self.nu_x = arc.normal(t)
        self.nu_y = arc.normal(tau)
        self.jac_t = np.linalg.norm(der_t, axis=-1)
        d = t - tau
        self.diag = d == 0
        z = xt - xs
        r = np.hypot(z[..., 0], z[..., 1])
        if np.any((r == 0) & ~self.diag):
            raise ValueError("arc self-intersects: x(t) == x(tau) with t != tau")
        safe_r = np.where(self.diag, 1.0, r)
        safe_d = np.where(self.diag, 1.0, np.abs(d))
        self.r = np.where(self.diag, 0.0, r)
        self.logd = np.where(self.diag, 0.0, np.log(safe_d))
        self.lr = np.where(self.diag, np.log(self.jac_t), np.log(safe_r / safe_d))
        self.zhat = np.where(self.diag[..., None], der_t / self.jac_t[..., None], z / safe_r[..., None])
        self.z = z

    @classmethod
    def grid(cls, arc, nodes):
        return cls(arc, nodes[:, None], nodes[None, :])

    def full(self, s: Split) -> np.ndarray:
        if np.any(self.diag):
            raise ValueError("on-diagonal evaluation: full kernel is singular at t == tau")
        return s.full(self.logd)


class _HankelSplit:
    """Split pieces of H_n(k r), n = 0, 1, 2, relative to log|t - tau|.

    H_n = B_n log|t - tau| + A_n + i Ysing_n(k r); the negative-power part of
    Ysing_n is k-independent after the k-scaling used in P1/P2 and is dropped
    (it cancels in zero-sum combinations). The constant -1/pi of Ysing_2 is kept.
    """

    def __init__(self, k: complex, pg: PairGeometry):
        self.k = k
        p = log_split_pieces(k * pg.r)
        lk = np.log(k / 2.0) + pg.lr
        c = 2j / math.pi
        self.B = [c * p["J0"], c * p["J1"], c * p["J2"]]
        self.A = [p[f"J{n}"] + c * lk * p[f"J{n}"] + 1j * p[f"Yr{n}"] for n in range(3)]
        self.B1_z = c * p["J1_z"]
        self.A1_z = p["J1_z"] + c * lk * p["J1_z"] + 1j * p["Yr1_z"]
        self.zhat = pg.zhat

    def gamma(self) -> Split:
        return Split(0.25j * self.B[0], 0.25j * self.A[0])

    def grad(self) -> Split:
        f = -0.25j * self.k
        return Split(f * self.B[1][..., None] * self.zhat, f * self.A[1][..., None] * self.zhat)

    def hess(self) -> Split:
        f = 0.25j * self.k ** 2
        zz = self.zhat[..., :, None] * self.zhat[..., None, :]
        one = f * (self.B[2][..., None, None] * zz - self.B1_z[..., None, None] * I2)
        two = f * ((self.A[2] - 1j / math.pi)[..., None, None] * zz - self.A1_z[..., None, None] * I2)
        return Split(one, two)


class SplitEvaluator:
    """Split gamma-combinations and fundamental-solution blocks on a PairGeometry."""

    def __init__(self, coef: KernelCoefficients, pg: PairGeometry):
        self.coef = coef
        self.pg = pg
        self._h: dict = {}

    def _hs(self, key: str) -> _HankelSplit:
        if key not in self._h:
            self._h[key] = _HankelSplit(self.coef.wavenumber(key), self.pg)
        return self._h[key]

    def gamma(self, combo: dict) -> Split:
        """sum c_k gamma_k."""
        return _sum(c * self._hs(key).gamma() for key, c in combo.items())

    def _check_zero_sum(self, combo):
        total = sum(combo.values())
        if abs(total) > _ZERO_SUM_TOL * max(abs(c) for c in combo.values()):
            raise ValueError("gradient combinations must have zero coefficient sum")

    def grad(self, combo: dict) -> Split:
        """sum c_k grad_x gamma_k, (..., 2); requires sum c_k = 0."""
        self._check_zero_sum(combo)
        return _sum(c * self._hs(key).grad() for key, c in combo.items())

    def hess(self, combo: dict) -> Split:
        """sum c_k grad_x grad_x^T gamma_k, (..., 2, 2); requires sum c_k = 0."""
        self._check_zero_sum(combo)
        return _sum(c * self._hs(key).hess() for key, c in combo.items())

    # fundamental-solution blocks

    def e11(self) -> Split:
        c = self.coef
        g = self.gamma({"s": 1.0 / c.m.mu}).map(lambda a: a[..., None, None] * I2)
        return g + self.hess(c.phi_combo) * (1.0 / c.rho_w2)

    def grad_diff(self) -> Split:
        """grad_x (gamma_k1 - gamma_k2)."""
        return self.grad({"1": 1.0, "2": -1.0})

    def e12(self) -> Split:
        return self.grad_diff() * self.coef.e12

    def e21(self) -> Split:
        return self.grad_diff() * self.coef.e21

    def e22(self) -> Split:
        return self.gamma(self.coef.e22_combo)

    def fundamental(self) -> Split:
        """The 3x3 matrix E(x(t), x(tau)) split."""
        return _assemble_blocks(self.e11(), self.e12(), self.e21().map(_row), self.e22())


def _sum(splits):
    splits = list(splits)
    out = splits[0]
    for s in splits[1:]:
        out = out + s
    return out


def _col(a):
    return a[..., :, None]


def _row(a):
    return a[..., None, :]


def _scalar(a):
    return a[..., None, None]


def _assemble_blocks(uu: Split, up: Split, pu: Split, pp: Split) -> Split:
    """[[uu (2x2), up (2 vector)], [pu (1x2), pp (scalar)]] -> (..., 3, 3)."""
    def build(b11, b12, b21, b22):
        shape = b11.shape[:-2] + (3, 3)
        out = np.zeros(shape, dtype=complex)
        out[..., 0:2, 0:2] = b11
        out[..., 0:2, 2] = b12
        out[..., 2:3, 0:2] = b21
        out[..., 2, 2] = b22
        return out
    return Split(build(uu.one, up.one, pu.one, pp.one), build(uu.two, up.two, pu.two, pp.two))


def split_fundamental(m: MediumParams, w: WaveNumbers | None, arc: ArcParametrization, t, tau) -> Split:
    """E(x(t), x(tau)) = E1 log|t - tau| + E2 at broadcastable parameter arrays."""
    coef = KernelCoefficients.of(m, w)
    return SplitEvaluator(coef, PairGeometry(arc, t, tau)).fundamental()


# ---------------------------------------------------------------------------
# Weakly singular kernel families of the weighted operators
# ---------------------------------------------------------------------------

BLOCKS = {"uu": (slice(0, 2), slice(0, 2)), "up": (slice(0, 2), slice(2, 3)),
          "pu": (slice(2, 3), slice(0, 2)), "pp": (slice(2, 3), slice(2, 3))}


@dataclass(frozen=True)
class FamilyTerm:
    """One term L S R of a weighted operator, S weakly singular.

    ``sin_power`` is 0 for density weight 1/w and 2 for weight w (after t = cos
    theta); ``left`` is None or "Ds"; ``right`` is None or "Dsw".
    """

    name: str
    block: str
    sin_power: int
    left: str | None
    right: str | None
    kernel: Callable[[SplitEvaluator], Split]


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


def _dot(a, b):
    return np.einsum("...a,...a->...", a, b)


def _v11_terms(c: KernelCoefficients, rc) -> list:
    """Four terms of the traction-traction block (shared by V2w and V4w)."""
    mu = c.m.mu
    sigma = {"s": -2.0 * mu, "1": 2.0 * mu - rc.c3, "2": rc.c3}

    def k1(ev: SplitEvaluator):
        nx, ny = ev.pg.nu_x, ev.pg.nu_y
        geo = 2.0 * _outer(nx, ny) - _outer(ny, nx) - _dot(nx, ny)[..., None, None] * I2
        a = ev.gamma({"s": -c.rho_w2}).map(lambda v: _scalar(v) * geo)
        b = ev.gamma({"1": rc.c1, "2": -rc.c2}).map(lambda v: _scalar(v) * _outer(nx, ny))
        return a - b

    def k2(ev: SplitEvaluator):
        g = ev.gamma({"s": 4.0 * mu}).map(lambda v: _scalar(v) * I2)
        return g + ev.e11().map(lambda a: ROT @ a @ ROT) * (4.0 * mu ** 2)

    def k3(ev: SplitEvaluator):
        nx = ev.pg.nu_x
        return ev.grad(sigma).map(lambda g: _outer(nx, g) @ ROT)

    def k4(ev: SplitEvaluator):
        ny = ev.pg.nu_y
        return ev.grad(sigma).map(lambda g: ROT @ _outer(-g, ny))

    return [
        FamilyTerm("V11_1", "uu", 2, None, None, k1),
        FamilyTerm("V11_2", "uu", 0, "Ds", "Dsw", k2),
        FamilyTerm("V11_3", "uu", 0, None, "Dsw", k3),
        FamilyTerm("V11_4", "uu", 2, "Ds", None, k4),
    ]


def _v22_terms(c: KernelCoefficients) -> list:
    kp2, k1s, k2s = c.w.kp ** 2, c.k1 ** 2, c.k2 ** 2

    def k1(ev: SplitEvaluator):
        combo = {"1": -k1s * (kp2 - k1s) / c.delta, "2": k2s * (kp2 - k2s) / c.delta}
        return ev.gamma(combo).map(lambda v: _scalar(v * _dot(ev.pg.nu_x, ev.pg.nu_y)))

    def k2(ev: SplitEvaluator):
        return ev.e22().map(_scalar)

    return [
        FamilyTerm("V22_1", "pp", 2, None, None, k1),
        FamilyTerm("V22_2", "pp", 0, "Ds", "Dsw", k2),
    ]


def _k2_diff(c: KernelCoefficients) -> dict:
    """k1^2 gamma_k1 - k2^2 gamma_k2."""
    return {"1": c.k1 ** 2, "2": -c.k2 ** 2}


def _v1_family(c: KernelCoefficients) -> list:
    return [
        FamilyTerm("E11", "uu", 0, None, None, lambda ev: ev.e11()),
        FamilyTerm("E21", "up", 0, None, None, lambda ev: ev.e21().map(_col)),
        FamilyTerm("E12T", "pu", 0, None, None, lambda ev: ev.e12().map(_row)),
        FamilyTerm("E22", "pp", 0, None, None, lambda ev: ev.e22().map(_scalar)),
    ]


def _v2_family(c: KernelCoefficients, rc) -> list:
    g, L, d, kp2 = c.m.gamma, c.L, c.delta, c.w.kp ** 2
    iwe = c.iwe
    diff = {"1": 1.0, "2": -1.0}

    def up1(ev):
        # nu_x d/dnu_y (gamma_k1 - gamma_k2), d/dnu_y = -nu_y . grad_x
        return ev.grad(diff).map(lambda v: _col(ev.pg.nu_x * (-_dot(ev.pg.nu_y, v))[..., None])) * (g * kp2 / d)

    def up2(ev):
        return ev.grad(diff).map(lambda v: _col(-v)) * (2.0 * c.m.mu * g / (d * L))

    def up3(ev):
        av = ev.pg.nu_y @ ROT.T
        return ev.gamma(_k2_diff(c)).map(lambda v: _col(v[..., None] * av)) * (-2.0 * c.m.mu * g / (d * L))

    def pu1(ev):
        return ev.grad(diff).map(lambda v: _row(_dot(ev.pg.nu_x, v)[..., None] * ev.pg.nu_y)) * (iwe * kp2 / d)

    def pu2(ev):
        return ev.grad(diff).map(_row) * (2.0 * c.m.mu * iwe / (d * L))

    def pu3(ev):
        na = ev.pg.nu_x @ ROT
        return ev.gamma(_k2_diff(c)).map(lambda v: _row(v[..., None] * na)) * (-2.0 * c.m.mu * iwe / (d * L))

    return _v11_terms(c, rc) + [
        FamilyTerm("V2_12_1", "up", 2, None, None, up1),
        FamilyTerm("V2_12_2", "up", 0, "Ds", "Dsw", up2),
        FamilyTerm("V2_12_3", "up", 2, "Ds", None, up3),
        FamilyTerm("V2_21_1", "pu", 2, None, None, pu1),
        FamilyTerm("V2_21_2", "pu", 0, "Ds", "Dsw", pu2),
        FamilyTerm("V2_21_3", "pu", 0, None, "Dsw", pu3),
    ] + _v22_terms(c)


def _v3_family(c: KernelCoefficients) -> list:
    g, L, d = c.m.gamma, c.L, c.delta
    iwe = c.iwe
    diff = {"1": 1.0, "2": -1.0}
    neg_k2 = {"1": -c.k1 ** 2, "2": c.k2 ** 2}

    def up1(ev):
        return ev.gamma(neg_k2).map(lambda v: _col(v[..., None] * ev.pg.nu_y)) * (g / (d * L))

    def up2(ev):
        # -A grad_y(...) with grad_y = -grad_x
        return ev.grad(diff).map(lambda v: _col(v @ ROT.T)) * (g / (d * L))

    def pu1(ev):
        return ev.gamma(neg_k2).map(lambda v: _row(v[..., None] * ev.pg.nu_x)) * (iwe / (d * L))

    def pu2(ev):
        return ev.grad(diff).map(lambda v: _row(v @ ROT)) * (-iwe / (d * L))

    return [
        FamilyTerm("E11", "uu", 0, None, None, lambda ev: ev.e11()),
        FamilyTerm("V3_12_1", "up", 2, None, None, up1),
        FamilyTerm("V3_12_2", "up", 0, None, "Dsw", up2),
        FamilyTerm("V3_21_1", "pu", 0, None, None, pu1),
        FamilyTerm("V3_21_2", "pu", 0, "Ds", None, pu2),
    ] + _v22_terms(c)


def _v4_family(c: KernelCoefficients, rc) -> list:
    g, L, d, kp2 = c.m.gamma, c.L, c.delta, c.w.kp ** 2
    iwe = c.iwe
    diff = {"1": 1.0, "2": -1.0}

    def up1(ev):
        return ev.gamma(diff).map(lambda v: _col(v[..., None] * ev.pg.nu_x)) * (-g * kp2 / d)

    def up2(ev):
        return ev.grad(diff).map(lambda v: _col(v @ ROT.T)) * (2.0 * c.m.mu * g / (L * d))

    def pu1(ev):
        return ev.gamma(diff).map(lambda v: _row(v[..., None] * ev.pg.nu_y)) * (-iwe * kp2 / d)

    def pu2(ev):
        return ev.grad(diff).map(lambda v: _row(v @ ROT)) * (-2.0 * iwe * c.m.mu / (L * d))

    return _v11_terms(c, rc) + [
        FamilyTerm("V4_12_1", "up", 0, None, None, up1),
        FamilyTerm("V4_12_2", "up", 0, "Ds", None, up2),
        FamilyTerm("V4_21_1", "pu", 2, None, None, pu1),
        FamilyTerm("V4_21_2", "pu", 0, None, "Dsw", pu2),
        FamilyTerm("E22", "pp", 0, None, None, lambda ev: ev.e22().map(_scalar)),
    ]


def build_regularized_family(which: str, m: MediumParams, w: WaveNumbers | None = None) -> list:
    """Terms L S R whose sum is the weighted operator ``which`` in {V1, V2, V3, V4}.

    V1 is listed too (plain weakly singular blocks of E^T) so that every
    operator is assembled by the same path.
    """
    coef = KernelCoefficients.of(m, w)
    if which == "V1":
        return _v1_family(coef)
    if which == "V3":
        return _v3_family(coef)
    rc = regularization_constants(m, coef.w)
    if which == "V2":
        return _v2_family(coef, rc)
    if which == "V4":
        return _v4_family(coef, rc)
    raise ValueError(f"unknown operator family {which!r}; expected V1, V2, V3 or V4")
