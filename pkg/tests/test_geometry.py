import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arcscat.geometry import make_arc, make_custom_arc, weight
from arcscat.quadrature import ChebyshevGrid


def test_flat_strip_values():
    a = make_arc("flat_strip")
    assert np.array_equal(a.position(0.5), [0.5, 0.0])
    assert a.jacobian(0.5) == 1.0
    assert np.array_equal(a.normal(0.5), [0.0, -1.0])


def test_spiral_radius():
    assert np.linalg.norm(make_arc("spiral").position(1.0)) == pytest.approx(math.e, rel=1e-15)


def test_fish_midpoint():
    assert np.allclose(make_arc("fish").position(0.0), [1.7, 0.0], atol=1e-15)


def test_unknown_arc():
    with pytest.raises(ValueError, match="unknown arc"):
        make_arc("circle")


@pytest.mark.parametrize("n", [16, 150])
def test_normal_orthogonal_and_unit(arc, n):
    t = ChebyshevGrid(n).nodes
    nu = arc.normal(t)
    d = arc.derivative(t)
    assert np.max(np.abs(np.sum(nu * d, axis=-1))) < 1e-13 * np.max(np.abs(d))
    assert np.allclose(np.linalg.norm(nu, axis=-1), 1.0, atol=1e-15)


def test_derivatives_match_finite_differences(arc):
    t = np.linspace(-0.99, 0.99, 41)
    h = 1e-6
    fd = (arc.position(t + h) - arc.position(t - h)) / (2 * h)
    assert np.max(np.abs(fd - arc.derivative(t))) < 1e-7 * np.max(np.abs(arc.derivative(t)))


@given(st.floats(0.0, math.pi))
def test_weight_is_sine(theta):
    # the only error left is the rounding of cos(theta), amplified by 1/sin(theta)
    s = math.sin(theta)
    tol = 4e-16 * (1.0 + 1.0 / max(s, 1e-300)) if s > 0 else 1e-7
    assert abs(weight(math.cos(theta)) - s) <= tol


def test_weight_endpoints():
    assert weight(1.0) == 0 and weight(-1.0) == 0 and weight(0.0) == 1


def test_custom_quarter_circle_normal_is_radial():
    pos = lambda t: np.stack([np.cos(np.pi / 4 * (t + 1)), np.sin(np.pi / 4 * (t + 1))], axis=-1)
    der = lambda t: np.pi / 4 * np.stack([-np.sin(np.pi / 4 * (t + 1)), np.cos(np.pi / 4 * (t + 1))], axis=-1)
    a = make_custom_arc(pos, der)
    x = a.position(0.0)
    nu = a.normal(0.0)
    assert abs(abs(nu @ x) - 1.0) < 1e-12


def test_custom_inconsistent_derivative():
    pos = lambda t: np.stack([t, t ** 2], axis=-1)
    der = lambda t: np.stack([np.ones_like(t), t], axis=-1)
    with pytest.raises(ValueError, match="inconsistent"):
        make_custom_arc(pos, der)


def test_custom_degenerate():
    pos = lambda t: np.stack([t ** 3, np.zeros_like(t)], axis=-1)
    der = lambda t: np.stack([3 * t ** 2, np.zeros_like(t)], axis=-1)
    with pytest.raises(ValueError, match="degenerate parametrization"):
        make_custom_arc(pos, der)


def test_custom_flat_strip_matches_builtin():
    ref = make_arc("flat_strip")
    a = make_custom_arc(ref.position_fn, ref.derivative_fn)
    t = ChebyshevGrid(32).nodes
    for f in ("position", "derivative", "jacobian", "normal"):
        assert np.array_equal(getattr(a, f)(t), getattr(ref, f)(t))
