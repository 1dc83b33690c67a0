import numpy as np
import pytest
from hypothesis import given, strategies as st

from qerlab.hypersurface import Tilted, TubeGraph, Vertical, intersect_sphere_bundle
from qerlab.qer import (calibrate_b0sq, density_q, density_q_fd, general_position_check, qer_rhs,
                        qer_rhs_angular_average, qer_rhs_defect)
from qerlab.spectral import ModeSum
from qerlab.geometry import TubePoint

SPECS = [Vertical(), Vertical(axis=1, c=0.5), Tilted(), Tilted(a=(0.2, -0.5), axis=0), TubeGraph()]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.params()["kind"])
def test_density_matches_finite_difference_oracle(spec):
    g = intersect_sphere_bundle(spec, 24)
    np.testing.assert_allclose(density_q(spec, g.point), density_q_fd(spec, g.point), atol=1e-7, rtol=1e-6)


def test_density_on_vertical_is_minus_15_xi1_squared():
    g = intersect_sphere_bundle(Vertical(), 64)
    np.testing.assert_allclose(density_q(Vertical(), g.point), -15 * g.xi[:, 0] ** 2, atol=1e-12)


def test_density_requires_unit_shell():
    p = TubePoint(np.zeros((1, 2)), np.array([[0.5, 0.0]]))
    with pytest.raises(ValueError):
        density_q(Vertical(), p)


def test_liouville_integral_vertical():
    # -15 int xi_1^2 over {x1 = 0} x S^1: -15 * 2 pi * pi
    assert np.isclose(qer_rhs(Vertical()), -30 * np.pi ** 2, rtol=1e-12)
    assert np.isclose(qer_rhs_angular_average(Vertical()), -15 * np.pi, rtol=1e-12)


def test_linear_in_test_function():
    spec = TubeGraph()
    a1 = lambda x, xi: np.cos(x[:, 0])
    a2 = lambda x, xi: xi[:, 1] ** 2
    both = lambda x, xi: 2 * a1(x, xi) - 3 * a2(x, xi)
    assert np.isclose(qer_rhs(spec, both), 2 * qer_rhs(spec, a1) - 3 * qer_rhs(spec, a2), rtol=1e-10)


def test_defect_reference_vertical():
    # the slice {xi = (1, 0)} of {x1 = 0} is a circle of length 2 pi, q = -15
    u = ModeSum.single((5, 0), 1.0, 0.2)
    assert np.isclose(qer_rhs_defect(Vertical(), lambda x, xi: np.ones(len(x)), u), -30 * np.pi, rtol=1e-10)
    # direction tangent to the slice: q vanishes
    v = ModeSum.single((0, 5), 1.0, 0.2)
    assert abs(qer_rhs_defect(Vertical(), lambda x, xi: np.ones(len(x)), v)) < 1e-9


def test_calibration_constant():
    assert np.isclose(calibrate_b0sq(), 1.0, rtol=1e-12)


def test_general_position():
    assert general_position_check(Vertical()).ok
    assert general_position_check(Vertical()).value < 0
    # an odd probe integrates to zero
    assert not general_position_check(Vertical(), lambda x, xi: xi[:, 1]).ok


@given(st.floats(-0.3, 0.3))
def test_small_tilts_stay_negative(t):
    assert qer_rhs(Tilted(a=(t, 0.0), axis=1), resolution=32) < 0
