import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_mode_sum
from qerlab.geometry import TubePoint
from qerlab.spectral import (EnsembleSpec, ModeSum, eval_u, eval_u_complex, jet, log_eval_u_complex,
                             make_shell_ensemble, parseval_norm, shell_points)

R2 = [1, 2, 5, 25, 50, 65, 325]


@pytest.mark.parametrize("r2", R2)
def test_shell_points_brute_force(r2):
    r = int(np.ceil(np.sqrt(r2)))
    brute = sorted(k for k in itertools.product(range(-r, r + 1), repeat=2) if k[0] ** 2 + k[1] ** 2 == r2)
    assert [tuple(k) for k in shell_points(r2, 2)] == brute


def test_shell_point_counts():
    # r2 = 25: (0,±5),(±5,0),(±3,±4),(±4,±3)
    assert len(shell_points(25, 2)) == 12
    assert len(shell_points(3, 2)) == 0
    assert [tuple(k) for k in shell_points(16, 1)] == [(-4,), (4,)]


def test_off_shell_modes_rejected():
    with pytest.raises(ValueError):
        ModeSum(0.2, np.array([[3, 4], [1, 1]]), np.ones(2))


@given(st.sampled_from(R2), st.integers(0, 2**32))
def test_complexification_restricts_to_u(r2, seed):
    rng = np.random.default_rng(seed)
    u = random_mode_sum(rng, r2)
    x = rng.uniform(0, 2 * np.pi, (5, 2))
    np.testing.assert_allclose(eval_u_complex(u, TubePoint(x, np.zeros_like(x))), eval_u(u, x), atol=1e-12)


@given(st.sampled_from(R2), st.integers(0, 2**32))
def test_log_eval_matches_direct(r2, seed):
    rng = np.random.default_rng(seed)
    u = random_mode_sum(rng, r2)
    p = TubePoint(rng.uniform(0, 6, (5, 2)), rng.uniform(-0.5, 0.5, (5, 2)))
    direct = eval_u_complex(u, p)
    lg = log_eval_u_complex(u, p)
    np.testing.assert_allclose(np.exp(lg), direct, rtol=1e-10)


def test_jet_against_finite_differences(rng):
    u = random_mode_sum(rng, 25)
    x, xi = np.array([0.4, 1.1]), np.array([0.3, -0.2])
    J = jet(u, TubePoint(x, xi))
    val = lambda x_, xi_: eval_u_complex(u, TubePoint(x_, xi_))
    e = 1e-6
    scale = np.exp(J.log_scale)
    for j in range(2):
        d = np.zeros(2)
        d[j] = e
        fd = (val(x + d, xi) - val(x - d, xi)) / (2 * e)
        assert abs(J.grad[..., j] * scale - fd) < 1e-6 * abs(fd) + 1e-6
    fd_lap = sum((val(x + d, xi) - 2 * val(x, xi) + val(x - d, xi)) / 1e-6 for d in (np.array([1e-3, 0]), np.array([0, 1e-3])))
    # u^C is an eigenfunction: Delta_x u^C = -|k|^2 u^C
    assert abs(fd_lap + 25 * val(x, xi)) < 1e-3 * abs(val(x, xi)) * 25


@given(st.sampled_from(R2), st.integers(0, 2**32))
def test_parseval(r2, seed):
    u = random_mode_sum(np.random.default_rng(seed), r2)
    assert np.isclose(parseval_norm(u), 2 * np.pi * np.linalg.norm(u.cs), rtol=1e-10)
    assert np.isclose(u.l2_norm(), 2 * np.pi * np.linalg.norm(u.cs), rtol=1e-12)


def test_ensemble_is_deterministic_and_normalized():
    a = make_shell_ensemble(EnsembleSpec(25, 5, seed=7))
    b = make_shell_ensemble(EnsembleSpec(25, 5, seed=7))
    c = make_shell_ensemble(EnsembleSpec(25, 5, seed=8))
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u.cs, v.cs)
    assert not np.allclose(a[0].cs, c[0].cs)
    for u in a:
        assert np.isclose(u.l2_norm(), 1.0)
        assert len(u.ks) == 12


def test_ensemble_rejects_thin_shell():
    with pytest.raises(ValueError):
        make_shell_ensemble(EnsembleSpec(2, 3))


def test_conjugate_probe_is_antiholomorphic(rng):
    u = random_mode_sum(rng, 5)
    v = u.conjugate_probe()
    x = np.array([0.2, 0.3])
    xi = np.array([0.1, 0.0])
    k = u.ks
    expect = np.sum(v.cs * np.exp(1j * (k @ (x + 1j * xi))))
    assert np.isclose(eval_u_complex(v, TubePoint(x, xi)), expect)
