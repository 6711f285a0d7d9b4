import math

import numpy as np
import pytest

from arcscat.bvp import (
    Density,
    IncidentField,
    boundary_data,
    circle_points,
    distance_to_arc,
    gmres,
    near_field,
    near_field_error,
    solve_bvp,
)
from arcscat.errors import NumericalError
from arcscat.geometry import make_arc
from arcscat.medium import MediumParams
from arcscat.quadrature import ChebyshevGrid

from oracles import traction


def _fd_traction(inc, x, nu, m, h=1e-6):
    grad = np.stack([(inc.displacement(x + h * e, m) - inc.displacement(x - h * e, m)) / (2 * h)
                     for e in np.eye(2)], axis=-1)
    return traction(m.lam, m.mu, grad, nu)


def test_incident_field_invariants():
    inc = IncidentField(0.7)
    d, dp = inc.direction, inc.polarization
    assert abs(np.linalg.norm(d) - 1) < 1e-15 and abs(np.linalg.norm(dp) - 1) < 1e-15
    assert abs(d @ dp) < 1e-16
    m = MediumParams(omega=3.0)
    g = inc.gradient(np.array([[0.3, -0.2]]), m)
    assert abs(np.trace(g[0])) < 1e-14


def test_dirichlet_data_flat_strip():
    m = MediumParams(omega=10.0)
    g = ChebyshevGrid(12)
    t = g.nodes
    G = boundary_data(1, IncidentField(0.0), make_arc("flat_strip"), g, m).values.reshape(3, -1)
    assert np.allclose(G[0], 0, atol=0)
    assert np.allclose(G[1], -np.exp(10j * t), rtol=1e-15, atol=1e-15)
    assert np.all(G[2] == 0)
    G3 = boundary_data(3, IncidentField(0.0), make_arc("flat_strip"), g, m).values
    assert np.array_equal(G3, G.ravel())


def test_traction_data_flat_strip():
    m = MediumParams(omega=10.0)
    g = ChebyshevGrid(12)
    t = g.nodes
    arc = make_arc("flat_strip")
    inc = IncidentField(0.0)
    G = boundary_data(2, inc, arc, g, m).values.reshape(3, -1)
    expected = 1j * m.mu * 10.0 * np.exp(10j * t)
    assert np.allclose(G[0], expected, rtol=1e-14)
    assert np.allclose(G[1], 0, atol=1e-14) and np.all(G[2] == 0)
    fd = _fd_traction(inc, arc.position(t), arc.normal(t), m)
    assert np.max(np.abs(-fd[:, 0] - G[0])) < 1e-7 * np.max(np.abs(G[0]))


def test_traction_normal_incidence():
    m = MediumParams(omega=10.0)
    arc = make_arc("flat_strip")
    inc = IncidentField(math.pi / 2)
    x = arc.position(np.array([0.1, -0.4]))
    nu = arc.normal(np.array([0.1, -0.4]))
    closed = inc.traction(x, nu, m)
    expected = -1j * m.mu * 10.0 * np.exp(1j * 10.0 * (x @ inc.direction))[:, None] * inc.polarization
    assert np.allclose(closed, expected, rtol=1e-14, atol=1e-14)
    assert np.allclose(_fd_traction(inc, x, nu, m), closed, rtol=1e-7, atol=1e-6)


@pytest.mark.parametrize("arc_name", ["spiral", "fish"])
def test_traction_matches_finite_differences(arc_name):
    m = MediumParams(omega=7.0)
    arc = make_arc(arc_name)
    inc = IncidentField(0.9)
    t = ChebyshevGrid(20).nodes
    x, nu = arc.position(t), arc.normal(t)
    closed = inc.traction(x, nu, m)
    assert np.max(np.abs(_fd_traction(inc, x, nu, m) - closed)) < 1e-6 * np.max(np.abs(closed))


def test_gmres_identity():
    b = np.arange(1.0, 6.0) + 0j
    x, rep = gmres(np.eye(5), b, tol=1e-12)
    assert rep.n_iterations == 1 and rep.converged
    assert rep.residual_history[-1] < 1e-15
    assert np.allclose(x, b, rtol=1e-15, atol=0)


def test_gmres_diagonal():
    x, rep = gmres(np.diag([2.0, 3.0]), np.array([2.0, 3.0]), tol=1e-12)
    assert rep.n_iterations <= 2 and rep.converged
    assert np.allclose(x, 1, atol=1e-12)


def test_gmres_random_system(rng):
    n = 50
    A = np.eye(n) * 4 + rng.standard_normal((n, n)) / math.sqrt(n) + 1j * rng.standard_normal((n, n)) / math.sqrt(n)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x, rep = gmres(lambda v: A @ v, b, tol=1e-10)
    assert rep.converged and rep.residual_history[-1] <= 1e-10
    ref = np.linalg.solve(A, b)
    assert np.max(np.abs(x - ref)) <= 1e-9 * np.max(np.abs(ref))
    assert all(b2 <= a2 * (1 + 1e-12) for a2, b2 in zip(rep.residual_history, rep.residual_history[1:]))


def test_gmres_zero_rhs():
    x, rep = gmres(np.eye(3), np.zeros(3), tol=1e-10)
    assert rep.n_iterations == 0 and rep.converged and np.all(x == 0)


def test_gmres_max_it_and_stagnation(rng):
    # rotation-like operator: no progress for many steps until the Krylov space fills
    n = 60
    P = np.roll(np.eye(n), 1, axis=0)
    b = np.zeros(n)
    b[0] = 1
    x, rep = gmres(P, b, tol=1e-12, max_it=10)
    assert not rep.converged and rep.n_iterations == 10
    x, rep = gmres(P, b, tol=1e-12, max_it=59)
    assert rep.stagnated and not rep.converged
    assert rep.n_iterations < 59


def test_gmres_rejects_bad_input():
    with pytest.raises(ValueError):
        gmres(np.eye(2), np.ones(2), tol=0.0)
    with pytest.raises(NumericalError):
        gmres(np.eye(2), np.array([1.0, np.nan]))
    with pytest.raises(NumericalError):
        gmres(lambda v: v * np.nan, np.ones(2))


@pytest.fixture(scope="module")
def strip_solutions():
    m = MediumParams(omega=10.0)
    arc = make_arc("flat_strip")
    g = ChebyshevGrid(80)
    inc = IncidentField(math.pi / 4)
    sols = {(k, v): solve_bvp(k, v, m, arc, g, inc, tol=1e-12) for k in (1, 2, 3, 4)
            for v in ("direct", "regularized")}
    return m, arc, g, sols


def test_all_variants_converge(strip_solutions):
    for key, (_, rep) in strip_solutions[3].items():
        assert rep.converged, key
        assert rep.residual_history[-1] <= 1e-12
        assert rep.t_precompute > 0 and rep.t_iterations >= 0


def test_cross_variant_agreement(strip_solutions):
    m, arc, g, sols = strip_solutions
    pts = circle_points(4.0, 32)
    for k in (1, 2, 3, 4):
        ud = near_field(sols[(k, "direct")][0], k, "direct", m, arc, g, pts)
        ur = near_field(sols[(k, "regularized")][0], k, "regularized", m, arc, g, pts)
        assert near_field_error(ur, ud) < 1e-9, k


def test_regularized_needs_fewer_iterations(strip_solutions):
    sols = strip_solutions[3]
    for k in (2, 3, 4):
        assert sols[(k, "regularized")][1].n_iterations < sols[(k, "direct")][1].n_iterations


def test_zero_incident_amplitude():
    m = MediumParams(omega=5.0)
    g = ChebyshevGrid(16)
    d, rep = solve_bvp(2, "regularized", m, make_arc("fish"), g, IncidentField(0.3, amplitude=0.0))
    assert rep.n_iterations == 0 and np.all(d.values == 0)


def test_near_field_linear_and_zero(strip_solutions, rng):
    m, arc, g, _ = strip_solutions
    n = 3 * g.n_points
    pts = circle_points(2.0, 16)
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    for k in (1, 2, 3, 4):
        f = lambda v: near_field(Density(v, k, "direct"), k, "direct", m, arc, g, pts)
        lhs = f(2 * a - 3j * b)
        rhs = 2 * f(a) - 3j * f(b)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))
        assert np.all(f(np.zeros(n, dtype=complex)) == 0)


def test_near_field_too_close(strip_solutions):
    m, arc, g, sols = strip_solutions
    d = sols[(1, "direct")][0]
    with pytest.raises(ValueError, match="near-singular evaluation unsupported"):
        near_field(d, 1, "direct", m, arc, g, np.array([[0.3, 5e-7]]))
    out = near_field(d, 1, "direct", m, arc, g, np.array([[0.3, 1e-3]]))
    assert np.all(np.isfinite(out))


def test_distance_to_arc():
    arc = make_arc("fish")
    t = np.array([-0.6, 0.05, 0.7])
    x = arc.position(t) + 0.01 * arc.normal(t)
    assert np.allclose(distance_to_arc(arc, x), 0.01, atol=1e-9)


def test_near_field_error_examples():
    ref = np.array([[1 + 1j, 2, 0], [0, 1j, 3]])
    assert near_field_error(ref, ref) == 0
    assert near_field_error(ref, 2 * ref) == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(ValueError, match="zero reference norm"):
        near_field_error(ref, np.zeros_like(ref))


def test_invalid_kind_and_variant():
    m = MediumParams(omega=1.0)
    g = ChebyshevGrid(4)
    with pytest.raises(ValueError, match="kind"):
        solve_bvp(5, "direct", m, make_arc("flat_strip"), g, IncidentField())
    with pytest.raises(ValueError, match="variant"):
        solve_bvp(1, "fast", m, make_arc("flat_strip"), g, IncidentField())


def test_circle_points():
    p = circle_points(4.0, 128)
    assert p.shape == (128, 2)
    assert np.allclose(np.linalg.norm(p, axis=1), 4.0, rtol=1e-15)
