import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import erf

from conftest import random_mode_sum
from qerlab import fbi
from qerlab.fbi import Axis, PhaseSpaceField
from qerlab.geometry import TubePoint
from qerlab.spectral import ModeSum


def _gauss_transform(k, c, h, x, xi):
    # independent closed form: c e^{i k.x} exp(-|xi - h k|^2 / 2h)
    k = np.asarray(k, dtype=float)
    return c * np.exp(1j * x @ k) * np.exp(-np.sum((xi - h * k) ** 2, axis=-1) / (2 * h))


@given(st.sampled_from([(3, 4), (-5, 0), (12, -5), (0, 13), (8, 15)]), st.integers(0, 2**32))
def test_single_mode_closed_form(k, seed):
    rng = np.random.default_rng(seed)
    h = 1 / np.hypot(*k)
    c = complex(rng.standard_normal(), rng.standard_normal())
    x = rng.uniform(0, 2 * np.pi, (7, 2))
    xi = rng.uniform(-1.4, 1.4, (7, 2))
    got = fbi.eval_T(ModeSum.single(k, c, h), TubePoint(x, xi))
    np.testing.assert_allclose(got, _gauss_transform(k, c, h, x, xi), rtol=1e-11, atol=1e-300)


def test_log_transform_matches(rng):
    u = random_mode_sum(rng, 25)
    p = TubePoint(rng.uniform(0, 6, (6, 2)), rng.uniform(-1, 1, (6, 2)))
    np.testing.assert_allclose(np.exp(fbi.log_eval_T(u, p)), fbi.eval_T(u, p), rtol=1e-10)


@pytest.mark.parametrize("r2,n", [(25, 2), (100, 2), (16, 1), (100, 1)])
def test_heat_kernel_quadrature_ratio(r2, n, rng):
    # direct heat-kernel quadrature differs from the closed form by h^(-n/4)
    u = random_mode_sum(rng, r2, n=n)
    p = TubePoint(rng.uniform(0, 6, (4, n)), rng.uniform(-0.9, 0.9, (4, n)))
    ratio = fbi.eval_T_heat(u, p) / fbi.eval_T(u, p)
    np.testing.assert_allclose(ratio, u.h ** (-n / 4), rtol=1e-9)
    assert np.isclose(fbi.heat_constant(n, u.h), u.h ** (-n / 4))


@pytest.mark.parametrize("m", [5, 10, 40])
def test_ambient_norm_erf_oracle(m):
    h, tau = 1 / m, 2.0
    u = ModeSum.single((m,), 1.0, h)
    gauss = np.sqrt(np.pi * h) / 2 * (erf((tau - 1) / np.sqrt(h)) + erf((tau + 1) / np.sqrt(h)))
    expect = np.sqrt(h ** -0.5 * 2 * np.pi * gauss)
    assert np.isclose(fbi.ambient_norm(u, tau), expect, rtol=1e-10)
    assert np.isclose(fbi.ambient_norm(u, tau, normalized=False), expect * h ** 0.25, rtol=1e-10)


@pytest.mark.parametrize("m,eps", [(10, 0.25), (20, 0.25), (40, 0.1)])
def test_off_shell_mass_erf_oracle(m, eps):
    h, tau = 1 / m, 2.0
    s = np.sqrt(h)
    total = erf((tau - 1) / s) + erf((tau + 1) / s)
    on = 2 * erf(eps / s) + erf((2 + eps) / s) - erf((2 - eps) / s)
    expect = (total - on) / total
    got = fbi.energy_mass_off_shell(ModeSum.single((-m,), 1.0, h), eps, tau)
    assert np.isclose(got, expect, rtol=1e-8)


def test_off_shell_mass_eps_validation():
    with pytest.raises(ValueError):
        fbi.energy_mass_off_shell(ModeSum.single((5,), 1.0, 0.2), 1.5, 2.0)


def test_anti_wick_average_of_energy():
    # the |Tu|^2 density in xi is a Gaussian at hk with variance h/2 per axis
    m = 40
    u = ModeSum.single((24, 32), 1.0, 1 / m)
    avg = fbi.anti_wick_average(u, lambda xi: np.sum(xi ** 2, axis=-1))
    assert np.isclose(avg, 1 + u.h, rtol=1e-8)
    assert np.isclose(fbi.anti_wick_average(u, lambda xi: np.ones(len(xi))), 1.0)


@given(st.integers(0, 2**32))
def test_holomorphy_and_negative_control(seed):
    rng = np.random.default_rng(seed)
    u = random_mode_sum(rng, 65)
    p = TubePoint(rng.uniform(0, 6, (8, 2)), rng.uniform(-1.5, 1.5, (8, 2)))
    assert fbi.holomorphy_residual(u, p).max() < 1e-12
    assert fbi.holomorphy_residual(u.conjugate_probe(), p).min() > 1e-2


def test_conjugated_symbol_vanishes_only_on_W():
    xi = np.array([[0.6, 0.8]])
    assert fbi.symbol_P_rho(xi, xi, np.zeros_like(xi))[0] == 0
    assert abs(fbi.symbol_P_rho(xi, 1.2 * xi, np.zeros_like(xi))[0]) > 0.1
    assert abs(fbi.symbol_P_rho(xi, xi, np.array([[0.1, 0.0]]))[0]) > 0.01


def test_bump_profile():
    t = np.linspace(-1.5, 1.5, 301)
    b = fbi.bump(t, flat=0.5)
    assert np.all(b[np.abs(t) >= 1] == 0)
    assert np.all(b[np.abs(t) <= 0.5] == 1)
    assert np.all((b >= 0) & (b <= 1))


def test_unwindowed_ft_of_mode_oracle():
    # int_0^{2 pi} e^{-i x x*/h} e^{-ikx} dx = 2 pi at x* = -1, h = 1/k, 0 at other lattice points
    k = 10
    h = 1 / k
    ax = Axis.periodic_cell("x1", 256)
    vals = np.exp(-1j * k * ax.coords)
    field = PhaseSpaceField((ax,), vals, h, 1)
    d = fbi.semiclassical_FT(field, [[0.0]], [None], [np.array([-1.0, -0.9, 0.5])])
    np.testing.assert_allclose(d.amp[0, :], [2 * np.pi, 0, 0], atol=1e-10)


def test_field_roundtrip(tmp_path, rng):
    axes = (Axis.periodic_cell("x1", 5), Axis.interval("xi1", -1, 1, 3))
    vals = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    f = PhaseSpaceField(axes, vals, 0.1, 1, {"tag": "t"})
    f.to_binary(tmp_path / "f.psf")
    f.to_csv(tmp_path / "f.csv")
    for g in (PhaseSpaceField.from_binary(tmp_path / "f.psf"), PhaseSpaceField.from_csv(tmp_path / "f.csv")):
        np.testing.assert_array_equal(g.values, vals)
        assert g.header() == f.header()


def test_field_validation():
    ax = Axis.periodic_cell("x1", 4)
    with pytest.raises(ValueError):
        PhaseSpaceField((ax,), np.zeros(3), 0.1, 1)
    with pytest.raises(ValueError):
        PhaseSpaceField((ax,), np.array([0, 0, np.nan, 0]), 0.1, 1)


def test_ft_aliasing_guard():
    ax = Axis.periodic_cell("x1", 8)
    f = PhaseSpaceField((ax,), np.ones(8), 0.01, 1)
    with pytest.raises(ValueError):
        fbi.semiclassical_FT(f, [[0.0]], [None], [np.array([0.0, 1.0])])


def test_distance_to_W():
    pts = {"xi1": np.array([1.0, 2.0]), "xi2": np.array([0.0, 0.0]),
           "x1*": np.array([1.0, 2.0]), "x2*": np.array([0.0, 0.0]),
           "xi1*": np.array([0.0, 0.0]), "xi2*": np.array([0.0, 0.0])}
    d = fbi.distance_to_W(pts, 2)
    assert d[0] == 0
    assert np.isclose(d[1], np.sqrt(2))
    assert fbi.distance_to_crude(pts, 2)[0] == 0
