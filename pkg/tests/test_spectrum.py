import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcscat.errors import NumericalError
from arcscat.geometry import make_arc
from arcscat.medium import MediumParams
from arcscat.operators import DiscreteOperator, assemble, compose, identity_operator
from arcscat.quadrature import ChebyshevGrid
from arcscat.spectrum import (
    cheb_helmholtz_oracle,
    column_formula,
    composed_operator,
    eigenvalues,
    find_clusters,
    write_eigenvalues_csv,
)


def test_cheb_oracle_passes():
    rec = cheb_helmholtz_oracle(65)
    assert rec.passed(1e-13)
    assert rec.lower_max < 1e-13


def test_cheb_diagonal_examples():
    J = composed_operator(8)
    assert J[0, 0] == pytest.approx(-math.log(2) / 4, abs=1e-15)
    assert J[2, 2] == pytest.approx(-0.375, abs=1e-15)
    n = np.arange(1, 8)
    assert np.allclose(np.diag(J)[1:], -(n + 1) / (4 * n), atol=1e-15)


def test_column_four_against_dense_composition():
    M = 16
    J = composed_operator(M)
    col = column_formula(4, M)
    assert np.max(np.abs(J[:, 4] - col)) < 1e-13
    # the j = 0 term is halved: without halving the top entry would differ
    unhalved = col.copy()
    unhalved[0] *= 2
    assert abs(J[0, 4] - unhalved[0]) > 1e-3


def test_cheb_truncation_stability():
    a = np.diag(composed_operator(32))
    b = np.diag(composed_operator(64))
    assert np.max(np.abs(a[:16] - b[:16])) < 1e-12


def test_cheb_oracle_small_truncation():
    with pytest.raises(ValueError):
        cheb_helmholtz_oracle(3)


def test_identity_spectrum():
    rep = eigenvalues(identity_operator(ChebyshevGrid(7)))
    assert np.allclose(rep.eigenvalues, 1, atol=1e-15)
    assert rep.cluster_counts == {"one": 21}
    top = rep.clusters()
    assert len(top) == 1 and top[0].count == 21 and abs(top[0].center - 1) < 1e-15


@settings(max_examples=10, deadline=None)
@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_scaling_covariance(c):
    rng = np.random.default_rng(1)
    A = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    g = ChebyshevGrid(4)
    e1 = np.sort_complex(eigenvalues(DiscreteOperator(A, g, "V2wV1w")).eigenvalues * c)
    e2 = np.sort_complex(eigenvalues(DiscreteOperator(A * c, g, "V2wV1w")).eigenvalues)
    # match by nearest neighbour since sorting can swap close pairs
    d = np.abs(e1[:, None] - e2[None, :]).min(axis=1)
    assert np.max(d) < 1e-12 * abs(c) * np.max(np.abs(e1 / c))


def test_find_clusters_synthetic(rng):
    a = -0.25 + 0.002 * (rng.standard_normal(200) + 1j * rng.standard_normal(200))
    b = -0.21 + 0.002 * (rng.standard_normal(120) + 1j * rng.standard_normal(120))
    noise = rng.uniform(-1, 1, 15) + 1j * rng.uniform(-1, 1, 15)
    cl = find_clusters(np.concatenate([a, b, noise]))
    assert abs(cl[0].center + 0.25) < 1e-3 and 195 <= cl[0].count <= 215
    assert abs(cl[1].center + 0.21) < 1e-3 and 115 <= cl[1].count <= 135
    assert find_clusters([]) == []


def test_eigensolver_failure_dumps(monkeypatch):
    def broken(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigvals", broken)
    with pytest.raises(NumericalError, match="dumped to"):
        eigenvalues(identity_operator(ChebyshevGrid(3)))


@pytest.fixture(scope="module")
def strip_spectrum():
    m = MediumParams(omega=10.0)
    arc = make_arc("flat_strip")
    g = ChebyshevGrid(60)
    op = compose(assemble("V4w", m, None, arc, g), assemble("V3w", m, None, arc, g))
    return m, eigenvalues(op, m)


def test_composite_spectrum_clusters(strip_spectrum):
    m, rep = strip_spectrum
    assert rep.cluster_points["cluster_a"] == -0.25
    assert rep.cluster_points["cluster_b"] == pytest.approx(-0.234375)
    total = rep.cluster_counts["cluster_a"] + rep.cluster_counts["cluster_b"]
    assert total >= rep.eigenvalues.size // 2
    assert rep.min_abs > 0
    d = rep.to_dict()
    assert d["n_eigenvalues"] == 180 and len(d["clusters"]) == 2


def test_eigenvalue_csv(strip_spectrum, tmp_path):
    m, rep = strip_spectrum
    path = write_eigenvalues_csv(rep, tmp_path / "e.csv", "V4wV3w", 60, m)
    lines = path.read_text().splitlines()
    assert lines[0] == "# tag,N,omega,lambda,mu"
    assert lines[1] == "# V4wV3w,60,10.0,2.0,1.0"
    data = np.loadtxt(path, delimiter=",", comments="#")
    assert np.array_equal(data[:, 0] + 1j * data[:, 1], rep.eigenvalues)
