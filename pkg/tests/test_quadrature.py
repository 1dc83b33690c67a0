import numpy as np
import pytest
from hypothesis import given, strategies as st

from qerlab.quadrature import gauss_panels, panel_edges, periodic_nodes, shell_band_edges, xi_quadrature


@given(st.integers(0, 15), st.floats(0.05, 1.0))
def test_gauss_panels_exact_for_polynomials(deg, width):
    x, w = gauss_panels(panel_edges(0.0, 2.0, width), order=8)
    assert np.isclose(np.sum(w * x ** deg), 2.0 ** (deg + 1) / (deg + 1), rtol=1e-12)


def test_panel_edges_respect_breaks():
    e = panel_edges(0.0, 2.0, 0.3, breaks=(0.77, 1.23))
    assert 0.77 in e and 1.23 in e
    assert e[0] == 0 and e[-1] == 2 and np.all(np.diff(e) <= 0.3 + 1e-12)


def test_periodic_nodes_integrate_trig_exactly():
    x, w = periodic_nodes(16)
    assert np.isclose(w.sum(), 2 * np.pi)
    assert abs(np.sum(w * np.cos(7 * x))) < 1e-13


@pytest.mark.parametrize("n,tau,area", [(1, 2.0, 4.0), (2, 2.0, 4 * np.pi), (2, 1.5, 2.25 * np.pi)])
def test_xi_ball_measure(n, tau, area):
    xi, w, r = xi_quadrature(n, tau, 0.05)
    assert np.isclose(w.sum(), area, rtol=1e-12)
    assert np.all(r <= tau + 1e-12)
    np.testing.assert_allclose(r, np.linalg.norm(xi, axis=-1))


def test_xi_quadrature_integrates_gaussian():
    h = 0.02
    xi, w, _ = xi_quadrature(2, 2.0, h)
    g = np.exp(-np.sum((xi - [0.6, 0.8]) ** 2, axis=-1) / h)
    assert np.isclose(np.sum(w * g), np.pi * h, rtol=1e-9)


def test_shell_band_refines_near_unit_shell():
    # band 1 +- 10 sqrt(h) = [0.9, 1.1] with panels of width sqrt(h)/2
    e = shell_band_edges(0.0, 2.0, 1e-4)
    near = np.diff(e)[(e[:-1] >= 0.9) & (e[1:] <= 1.1)]
    assert np.isclose(near.max(), 0.005)
    assert np.diff(e)[e[1:] <= 0.9].max() > 0.1
