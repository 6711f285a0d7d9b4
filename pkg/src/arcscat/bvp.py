"""Incident waves, boundary data, GMRES and the direct/regularized solvers.

For boundary condition kind i the scattered field is a weighted potential
U = S_i[psi] with kernel (B_i^* E)^T and density weight W_i, where
W1 = (1/w, 1/w, 1/w), W2 = (w, w, w), W3 = (1/w, 1/w, w), W4 = (w, w, 1/w).
The regularized solvers precondition with the companion operator:

    kind 1: V2w V1w psi = V2w G1,  U = S1[psi]
    kind 2: V2w V1w psi = G2,      U = S2[V1w psi]
    kind 3: V4w V3w psi = V4w G3,  U = S3[psi]
    kind 4: V4w V3w psi = G4,      U = S4[V3w psi]
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .geometry import ArcParametrization
from .kernels import KernelCoefficients, layer_kernel
from .medium import MediumParams, WaveNumbers, compute_wavenumbers
from .operators import DiscreteOperator, assemble, compose
from .quadrature import ChebyshevGrid

KINDS = (1, 2, 3, 4)
VARIANTS = ("direct", "regularized")
STAGNATION_WINDOW = 20
STAGNATION_DECREASE = 1e-14
MIN_DISTANCE = 1e-6

# density-weight sin powers per component (0 for 1/w, 2 for w)
_SIN_POWERS = {1: (0, 0, 0), 2: (2, 2, 2), 3: (0, 0, 2), 4: (2, 2, 0)}
_DIRECT_OP = {1: "V1w", 2: "V2w", 3: "V3w", 4: "V4w"}
_PAIR = {1: ("V2w", "V1w"), 2: ("V2w", "V1w"), 3: ("V4w", "V3w"), 4: ("V4w", "V3w")}


def _check_kind(kind):
    if kind not in KINDS:
        raise ValueError(f"boundary condition kind must be 1..4, got {kind!r}")


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ValueError(f"variant must be 'direct' or 'regularized', got {variant!r}")


@dataclass(frozen=True)
class IncidentField:
    """Plane shear wave u = d_perp exp(i ks x.d), d = (cos theta, sin theta), p = 0."""

    theta_inc: float = 0.0
    amplitude: float = 1.0

    @property
    def direction(self):
        return np.array([math.cos(self.theta_inc), math.sin(self.theta_inc)])

    @property
    def polarization(self):
        return np.array([-math.sin(self.theta_inc), math.cos(self.theta_inc)])

    def _phase(self, x, ks):
        return self.amplitude * np.exp(1j * ks * (np.asarray(x, dtype=float) @ self.direction))

    def displacement(self, x, m: MediumParams):
        ks = compute_wavenumbers(m).ks
        return self._phase(x, ks)[..., None] * self.polarization

    def gradient(self, x, m: MediumParams):
        """grad[..., a, b] = d_b u_a."""
        ks = compute_wavenumbers(m).ks
        e = self._phase(x, ks)
        return 1j * ks * e[..., None, None] * np.outer(self.polarization, self.direction)

    def traction(self, x, nu, m: MediumParams):
        """sigma(u) nu = i mu ks e [(d.nu) d_perp + (d_perp.nu) d]; div u = 0."""
        ks = compute_wavenumbers(m).ks
        e = self._phase(x, ks)
        nu = np.asarray(nu, dtype=float)
        d, dp = self.direction, self.polarization
        vec = (nu @ d)[..., None] * dp + (nu @ dp)[..., None] * d
        return 1j * m.mu * ks * e[..., None] * vec


@dataclass(frozen=True)
class BoundaryData:
    values: np.ndarray = field(repr=False)
    bc_kind: int


def boundary_data(bc_kind: int, inc: IncidentField, arc: ArcParametrization,
                  grid: ChebyshevGrid, m: MediumParams) -> BoundaryData:
    """G = -B_kind U_inc at the nodes, in operator layout (u1 | u2 | p)."""
    _check_kind(bc_kind)
    x = arc.position(grid.nodes)
    if bc_kind in (1, 3):
        u = inc.displacement(x, m)
    else:
        u = inc.traction(x, arc.normal(grid.nodes), m)
    n = grid.n_points
    g = np.zeros(3 * n, dtype=complex)
    g[:n], g[n:2 * n] = -u[:, 0], -u[:, 1]
    if not np.all(np.isfinite(g)):
        raise NumericalError("non-finite boundary data")
    return BoundaryData(values=g, bc_kind=bc_kind)


@dataclass
class SolveReport:
    n_iterations: int
    residual_history: list
    t_precompute: float = 0.0
    t_iterations: float = 0.0
    converged: bool = False
    stagnated: bool = False

    def to_dict(self) -> dict:
        return {
            "n_iterations": self.n_iterations,
            "t_precompute": self.t_precompute,
            "t_iterations": self.t_iterations,
            "converged": self.converged,
            "stagnated": self.stagnated,
            "residual_history": [float(r) for r in self.residual_history],
        }


def gmres(action, rhs, tol: float = 1e-10, max_it: int | None = None):
    """Full GMRES (no restart) on the relative residual |b - A x| / |b|, x0 = 0.

    ``action`` is a callable or a matrix. Stops when the residual reaches
    ``tol``, after ``max_it`` iterations, or when the relative residual has
    dropped by less than 1e-14 over the last 20 iterations (stagnation).
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    apply = action if callable(action) else (lambda v, a=np.asarray(action): a @ v)
    b = np.asarray(rhs, dtype=complex)
    n = b.size
    if max_it is None:
        max_it = n
    if not np.all(np.isfinite(b)):
        raise NumericalError("non-finite right-hand side")
    beta = np.linalg.norm(b)
    if beta == 0.0:
        return np.zeros(n, dtype=complex), SolveReport(0, [0.0], converged=True)

    max_it = min(max_it, n)
    Q = np.zeros((max_it + 1, n), dtype=complex)
    H = np.zeros((max_it + 1, max_it), dtype=complex)
    cs = np.zeros(max_it, dtype=complex)
    sn = np.zeros(max_it, dtype=complex)
    g = np.zeros(max_it + 1, dtype=complex)
    g[0] = beta
    Q[0] = b / beta
    history = [1.0]
    converged = stagnated = False
    k = 0
    for k in range(1, max_it + 1):
        j = k - 1
        v = np.asarray(apply(Q[j]), dtype=complex)
        if not np.all(np.isfinite(v)):
            raise NumericalError("non-finite values in GMRES operator action",
                                 report=SolveReport(j, history))
        # modified Gram-Schmidt, one reorthogonalization pass
        for _ in range(2):
            for i in range(k):
                h = np.vdot(Q[i], v)
                H[i, j] += h
                v = v - h * Q[i]
        H[k, j] = np.linalg.norm(v)
        breakdown = H[k, j] == 0
        if not breakdown:
            Q[k] = v / H[k, j]
        for i in range(j):
            t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
            H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + cs[i] * H[i + 1, j]
            H[i, j] = t
        denom = math.hypot(abs(H[j, j]), abs(H[k, j]))
        if denom == 0.0:
            cs[j], sn[j] = 1.0, 0.0
        else:
            cs[j] = abs(H[j, j]) / denom if H[j, j] != 0 else 0.0
            phase = H[j, j] / abs(H[j, j]) if H[j, j] != 0 else 1.0
            sn[j] = phase * np.conj(H[k, j]) / denom
            H[j, j] = phase * denom
            H[k, j] = 0.0
        g[k] = -np.conj(sn[j]) * g[j]
        g[j] = cs[j] * g[j]
        res = abs(g[k]) / beta
        history.append(float(res))
        if res <= tol:
            converged = True
            break
        if breakdown:
            break
        if k >= STAGNATION_WINDOW and history[k - STAGNATION_WINDOW] - res < STAGNATION_DECREASE:
            stagnated = True
            break
    y = _upper_solve(H[:k, :k], g[:k])
    x = Q[:k].T @ y
    if not np.all(np.isfinite(x)):
        raise NumericalError("non-finite GMRES iterate", report=SolveReport(k, history))
    return x, SolveReport(k, history, converged=converged, stagnated=stagnated)


def _upper_solve(R, g):
    from scipy.linalg import solve_triangular

    return solve_triangular(R, g, lower=False)


@dataclass
class Density:
    """Solution of the discrete BIE plus the vector the potential consumes."""

    values: np.ndarray = field(repr=False)
    bc_kind: int
    variant: str
    layer_values: np.ndarray | None = field(default=None, repr=False)


def solve_bvp(bc_kind: int, variant: str, m: MediumParams, arc: ArcParametrization,
              grid: ChebyshevGrid, inc: IncidentField, tol: float = 1e-10,
              max_it: int | None = None, w: WaveNumbers | None = None):
    """Assemble and solve one of the eight discrete BIEs; returns (Density, SolveReport)."""
    _check_kind(bc_kind)
    _check_variant(variant)
    t0 = time.perf_counter()
    w = compute_wavenumbers(m) if w is None else w
    g = boundary_data(bc_kind, inc, arc, grid, m).values
    inner = None
    if variant == "direct":
        A = assemble(_DIRECT_OP[bc_kind], m, w, arc, grid)
        rhs = g
    else:
        outer_tag, inner_tag = _PAIR[bc_kind]
        outer = assemble(outer_tag, m, w, arc, grid)
        inner = assemble(inner_tag, m, w, arc, grid)
        A = compose(outer, inner)
        rhs = outer.matrix @ g if bc_kind in (1, 3) else g
    t_pre = time.perf_counter() - t0

    t1 = time.perf_counter()
    try:
        psi, report = gmres(A.matrix, rhs, tol=tol, max_it=max_it)
    except NumericalError as exc:
        if exc.report is not None:
            exc.report.t_precompute = t_pre
            exc.report.t_iterations = time.perf_counter() - t1
        raise
    report.t_precompute = t_pre
    report.t_iterations = time.perf_counter() - t1

    layer = psi
    if variant == "regularized" and bc_kind in (2, 4):
        layer = inner.matrix @ psi
    return Density(values=psi, bc_kind=bc_kind, variant=variant, layer_values=layer), report


def _layer_values(density: Density, m, arc, grid, w):
    if density.layer_values is not None:
        return density.layer_values
    if density.variant == "regularized" and density.bc_kind in (2, 4):
        inner: DiscreteOperator = assemble(_PAIR[density.bc_kind][1], m, w, arc, grid)
        return inner.matrix @ density.values
    return density.values


def distance_to_arc(arc: ArcParametrization, points, n_samples: int = 4001) -> np.ndarray:
    """Approximate distance from points to the arc (dense sampling plus local refinement)."""
    from scipy.optimize import minimize_scalar

    pts = np.atleast_2d(np.asarray(points, dtype=float))
    t = np.linspace(-1.0, 1.0, n_samples)
    x = arc.position(t)
    d = np.linalg.norm(pts[:, None, :] - x[None, :, :], axis=-1)
    best = np.argmin(d, axis=1)
    out = d[np.arange(len(pts)), best]
    h = t[1] - t[0]
    for i, j in enumerate(best):
        if out[i] > 10 * h * np.max(arc.jacobian(t[j])):
            continue
        lo, hi = max(-1.0, t[j] - h), min(1.0, t[j] + h)
        res = minimize_scalar(lambda s: np.linalg.norm(pts[i] - arc.position(s)),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        out[i] = min(out[i], res.fun)
    return out


def near_field(density: Density, bc_kind: int, variant: str, m: MediumParams,
               arc: ArcParametrization, grid: ChebyshevGrid, points,
               w: WaveNumbers | None = None) -> np.ndarray:
    """Scattered field (u1, u2, p) at off-arc points, shape (len(points), 3)."""
    _check_kind(bc_kind)
    _check_variant(variant)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        return np.zeros((0, 3), dtype=complex)
    if np.any(distance_to_arc(arc, pts) <= MIN_DISTANCE):
        raise ValueError("near-singular evaluation unsupported: point within 1e-6 of the arc")
    w = compute_wavenumbers(m) if w is None else w
    coef = KernelCoefficients.of(m, w)
    phi = _layer_values(density, m, arc, grid, w)
    n = grid.n_points
    y = arc.position(grid.nodes)
    nu = arc.normal(grid.nodes)
    jac = arc.jacobian(grid.nodes)
    sin = np.sin(grid.angles)
    dens = phi.reshape(3, n).T  # (N, 3)
    weights = np.stack([(np.pi / n) * jac * sin ** p for p in _SIN_POWERS[bc_kind]], axis=-1)
    wd = weights * dens
    out = np.empty((pts.shape[0], 3), dtype=complex)
    chunk = max(1, 20000 // n)
    for s in range(0, pts.shape[0], chunk):
        K = layer_kernel(bc_kind, coef, pts[s:s + chunk, None, :], y[None, :, :], nu[None, :, :])
        out[s:s + chunk] = np.einsum("pjab,jb->pa", K, wd)
    return out


def near_field_error(candidate, reference) -> float:
    """max_x |U - U_ref| / max_x |U_ref| with |.| the Euclidean norm of (u1, u2, p)."""
    cand = np.asarray(candidate)
    ref = np.asarray(reference)
    if cand.shape != ref.shape:
        raise ValueError(f"point sets differ: {cand.shape} vs {ref.shape}")
    denom = np.max(np.linalg.norm(ref.reshape(len(ref), -1), axis=-1)) if ref.size else 0.0
    if denom == 0.0:
        raise ValueError("zero reference norm")
    return float(np.max(np.linalg.norm((cand - ref).reshape(len(ref), -1), axis=-1)) / denom)


def circle_points(radius: float = 4.0, n: int = 128) -> np.ndarray:
    phi = 2.0 * np.pi * np.arange(n) / n
    return radius * np.stack([np.cos(phi), np.sin(phi)], axis=-1)
