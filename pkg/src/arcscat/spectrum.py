"""Eigenvalue diagnostics of composite operators and a Chebyshev coefficient oracle."""

from __future__ import annotations

import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NumericalError
from .medium import MediumParams, spectral_constants
from .operators import DiscreteOperator, dump_operator

CLUSTER_RADIUS = 0.05
MODE_BANDWIDTH = CLUSTER_RADIUS / 5


@dataclass(frozen=True)
class Cluster:
    center: complex
    count: int


@dataclass
class EigenReport:
    eigenvalues: np.ndarray = field(repr=False)
    cluster_points: dict
    cluster_counts: dict
    min_abs: float
    radius: float = CLUSTER_RADIUS

    def clusters(self, bandwidth: float = MODE_BANDWIDTH) -> list:
        return find_clusters(self.eigenvalues, radius=self.radius, bandwidth=bandwidth)

    def to_dict(self, top: int = 2) -> dict:
        return {
            "cluster_points": {k: [v.real, v.imag] for k, v in self.cluster_points.items()},
            "cluster_counts": dict(self.cluster_counts),
            "radius": self.radius,
            "min_abs": self.min_abs,
            "n_eigenvalues": int(self.eigenvalues.size),
            "clusters": [{"center": [c.center.real, c.center.imag], "count": c.count}
                         for c in self.clusters()[:top]],
        }


def find_clusters(values, radius: float = CLUSTER_RADIUS, bandwidth: float = MODE_BANDWIDTH) -> list:
    """Modes of the eigenvalue cloud by flat-kernel mean shift, most populous first.

    Every eigenvalue is shifted to the mean of its ``bandwidth`` neighbours until
    it settles; modes closer than bandwidth/2 merge. A cluster's count is the
    number of eigenvalues in its basin lying within ``radius`` of the mode.
    """
    z = np.asarray(values, dtype=complex).ravel()
    if z.size == 0:
        return []
    c = z.copy()
    for _ in range(500):
        near = np.abs(c[:, None] - z[None, :]) <= bandwidth
        new = (near @ z) / near.sum(axis=1)
        done = np.max(np.abs(new - c)) < 1e-12
        c = new
        if done:
            break
    modes: list = []
    label = np.empty(z.size, dtype=int)
    for i, ci in enumerate(c):
        for j, mj in enumerate(modes):
            if abs(ci - mj) < bandwidth / 2:
                label[i] = j
                break
        else:
            modes.append(ci)
            label[i] = len(modes) - 1
    clusters = []
    for j, mj in enumerate(modes):
        members = z[label == j]
        clusters.append(Cluster(center=complex(mj), count=int(np.sum(np.abs(members - mj) <= radius))))
    clusters.sort(key=lambda cl: (-cl.count, cl.center.real, cl.center.imag))
    return clusters


def eigenvalues(op: DiscreteOperator, m: MediumParams | None = None,
                radius: float = CLUSTER_RADIUS) -> EigenReport:
    """Full spectrum and counts within ``radius`` of the theoretical cluster points.

    With ``m`` given the points are -1/4 and -1/4 + C**2; identity-tagged
    operators are checked against the single point 1.
    """
    try:
        ev = np.linalg.eigvals(op.matrix)
    except np.linalg.LinAlgError as exc:
        path = Path(tempfile.mkdtemp(prefix="arcscat-")) / "failed_operator.bin"
        dump_operator(op, path)
        raise NumericalError(f"eigensolver did not converge; matrix dumped to {path}") from exc
    points = {}
    if op.tag == "I":
        points["one"] = 1.0 + 0.0j
    elif m is not None:
        sc = spectral_constants(m)
        points = {"cluster_a": sc.cluster_a, "cluster_b": sc.cluster_b}
    counts = {k: int(np.sum(np.abs(ev - p) <= radius)) for k, p in points.items()}
    return EigenReport(eigenvalues=ev, cluster_points=points, cluster_counts=counts,
                       min_abs=float(np.min(np.abs(ev))), radius=radius)


def write_eigenvalues_csv(report: EigenReport, path, tag: str, n_points: int, m: MediumParams) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("# tag,N,omega,lambda,mu\n")
        fh.write(f"# {tag},{n_points},{m.omega!r},{m.lam!r},{m.mu!r}\n")
        fh.write("# re,im\n")
        for z in report.eigenvalues:
            fh.write(f"{float(z.real)!r},{float(z.imag)!r}\n")
    return path


# ---------------------------------------------------------------------------
# Chebyshev coefficient-space oracle
# ---------------------------------------------------------------------------

def log_diagonal(M: int) -> np.ndarray:
    """d_n: eigenvalues of the 1/w-weighted log operator on T_n."""
    d = np.empty(M)
    d[0] = 0.5 * np.log(2.0)
    d[1:] = 0.5 / np.arange(1, M)
    return d


def hypersingular_diagonal(M: int) -> np.ndarray:
    """e_n = -(n + 1)/2: eigenvalues of the w-weighted hypersingular operator on U_n."""
    return -(np.arange(M) + 1.0) / 2.0


def u_to_t(M: int) -> np.ndarray:
    """Column m holds the T-coefficients of U_m = 2 sum' T_j (j = 0 halved)."""
    C = np.zeros((M, M))
    for m in range(M):
        for j in range(m % 2, m + 1, 2):
            C[j, m] = 1.0 if j == 0 else 2.0
    return C


def t_to_u(M: int) -> np.ndarray:
    """Column n holds the U-coefficients of T_n."""
    B = np.zeros((M, M))
    B[0, 0] = 1.0
    if M > 1:
        B[1, 1] = 0.5
    for n in range(2, M):
        B[n, n] = 0.5
        B[n - 2, n] = -0.5
    return B


@dataclass
class ChebOracleRecord:
    M: int
    matrix: np.ndarray = field(repr=False)
    expected_diagonal: np.ndarray = field(repr=False)
    diagonal_error: float
    lower_max: float
    structure_error: float
    helmholtz_diagonal_error: float

    def passed(self, tol: float = 1e-13) -> bool:
        return max(self.diagonal_error, self.lower_max, self.structure_error,
                   self.helmholtz_diagonal_error) <= tol


def composed_operator(M: int) -> np.ndarray:
    """Coefficient matrix of (1/w-log operator) o (w-hypersingular operator) on T_0..T_{M-1}."""
    d, e = log_diagonal(M), hypersingular_diagonal(M)
    return np.diag(d) @ u_to_t(M) @ np.diag(e) @ t_to_u(M)


def column_formula(n: int, M: int) -> np.ndarray:
    """e_n d_n T_n + (e_n - e_{n-2}) sum'_{j = n-2, n-4, ...} d_j T_j, halving j = 0."""
    d, e = log_diagonal(M), hypersingular_diagonal(M)
    col = np.zeros(M)
    col[n] = e[n] * d[n]
    if n >= 2:
        for j in range(n % 2, n - 1, 2):
            col[j] += (e[n] - e[n - 2]) * d[j] * (0.5 if j == 0 else 1.0)
    return col


def cheb_helmholtz_oracle(M: int) -> ChebOracleRecord:
    """Check the upper-triangular structure and diagonal of the composed operator."""
    if M < 4:
        raise ValueError(f"truncation must be at least 4, got {M}")
    J = composed_operator(M)
    n = np.arange(M)
    expected = np.where(n == 0, -np.log(2.0) / 4.0, -0.25 - 0.25 / np.maximum(n, 1))
    structure = max(np.max(np.abs(J[:, k] - column_formula(k, M))) for k in range(M))
    # e_n d_n against the closed form -1/4 - 1/(4n)
    d, e = log_diagonal(M), hypersingular_diagonal(M)
    return ChebOracleRecord(
        M=M,
        matrix=J,
        expected_diagonal=expected,
        diagonal_error=float(np.max(np.abs(np.diag(J) - expected))),
        lower_max=float(np.max(np.abs(np.tril(J, -1)))),
        structure_error=float(structure),
        helmholtz_diagonal_error=float(np.max(np.abs(e * d - expected))),
    )
