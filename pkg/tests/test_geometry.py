import numpy as np
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from qerlab.geometry import (PERIOD, ManifoldModel, TubePoint, apply_J, complexify, grad_rho,
                             hamilton_field, kahler_potential, wrap)

vec4 = arrays(float, 4, elements=st.floats(-10, 10))


@given(vec4)
def test_J_squares_to_minus_identity(v):
    np.testing.assert_allclose(apply_J(apply_J(v)), -v)


def test_J_on_basis():
    # J d/dx = d/dxi on the circle
    np.testing.assert_array_equal(apply_J(np.array([1.0, 0.0])), [0.0, 1.0])
    np.testing.assert_array_equal(apply_J(np.array([0.0, 1.0])), [-1.0, 0.0])


@given(arrays(float, 2, elements=st.floats(-3, 3)), arrays(float, 2, elements=st.floats(-3, 3)))
def test_potential_and_gradient(x, xi):
    p = TubePoint(x, xi)
    assert np.isclose(kahler_potential(p), 0.5 * xi @ xi)
    np.testing.assert_allclose(grad_rho(p), np.concatenate([np.zeros(2), xi]))


def test_complexify_sign():
    p = TubePoint(np.array([0.3]), np.array([0.7]))
    assert complexify(p)[0] == 0.3 - 0.7j


@given(vec4)
def test_hamilton_field_is_orthogonal_to_gradient(g):
    assert abs(hamilton_field(g) @ g) < 1e-9 * (1 + g @ g)


def test_hamilton_field_of_rho_generates_geodesic_flow():
    xi = np.array([0.6, 0.8])
    H = hamilton_field(grad_rho(TubePoint(np.zeros(2), xi)))
    # H = d_x rho . d_xi - d_xi rho . d_x = -xi . d_x
    np.testing.assert_allclose(H, [-0.6, -0.8, 0, 0])


@given(st.floats(-100, 100))
def test_wrap_range(x):
    w = wrap(x)
    assert -np.pi <= w < np.pi
    assert np.isclose(np.cos(w), np.cos(x), atol=1e-9)


def test_manifold_contains():
    m = ManifoldModel(n=2, tau=2.0)
    pts = TubePoint(np.zeros((3, 2)), np.array([[0, 0], [1.9, 0], [1.5, 1.5]]))
    np.testing.assert_array_equal(m.contains(pts), [True, True, False])
    assert m.period == PERIOD
    np.testing.assert_array_equal(m.metric(), np.eye(2))
