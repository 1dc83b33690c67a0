import numpy as np
import pytest

from conftest import random_mode_sum
from qerlab.hypersurface import SurfaceGrid, TubeGraph, Vertical, sample_nodes, surface_grid
from qerlab.qer import (cauchy_lhs, grid_for, log_restriction_norm, log_weighted_norm, mode_forms,
                        restriction_norm, weighted_norm)
from qerlab.spectral import EnsembleSpec, ModeSum, make_shell_ensemble

ONE = lambda x, xi: np.ones(len(x))


def test_weighted_identity_on_random_quadrature(rng):
    # |Tu|^2 = exp(-1/h) |exp(-rho/h) u^C|^2 pointwise, so any quadrature agrees
    for spec in (Vertical(), TubeGraph()):
        u = random_mode_sum(rng, 25)
        p = sample_nodes(spec, rng, 50)
        g = SurfaceGrid(spec, p.x, p.xi, rng.uniform(0.1, 2.0, 50))
        lw = log_weighted_norm(u, spec, [g])
        lr = log_restriction_norm(u, spec, [g], normalized=False)
        assert np.isclose(lw, 2 * lr + 1 / u.h, rtol=1e-13)


def test_normalization_factor(rng):
    u = random_mode_sum(rng, 25)
    a = restriction_norm(u, Vertical(), normalized=True)
    b = restriction_norm(u, Vertical(), normalized=False)
    assert np.isclose(a / b, u.h ** -0.5)


def test_streamed_blocks_match_full_grid():
    u = ModeSum.single((3, 4), 1.0, 0.2).normalized()
    spec = TubeGraph()
    full = restriction_norm(u, spec, grid=surface_grid(spec, 2.0, 0.2, x_bandwidth=0))
    blocks = restriction_norm(u, spec, grid=grid_for(u, spec, max_nodes=5000))
    assert np.isclose(full, blocks, rtol=1e-12)


def test_mode_forms_match_direct_evaluation(rng):
    spec = TubeGraph()
    ens = make_shell_ensemble(EnsembleSpec(25, 3, seed=3))
    forms = mode_forms(ens[0].ks, ens[0].h, spec, a=ONE)
    for u in ens:
        direct = cauchy_lhs(u, spec, ONE)
        via = forms.cauchy(u.cs)
        assert np.isclose(via.scaled, direct.scaled, rtol=1e-9)
        assert np.isclose(forms.norm(u.cs), restriction_norm(u, spec), rtol=1e-9)


def test_gram_is_hermitian_psd():
    spec = TubeGraph()
    ks = make_shell_ensemble(EnsembleSpec(25, 1))[0].ks
    f = mode_forms(ks, 0.2, spec)
    np.testing.assert_allclose(f.gram, f.gram.conj().T, atol=1e-12 * np.abs(f.gram).max())
    assert np.linalg.eigvalsh(f.gram).min() > -1e-10 * np.abs(f.gram).max()


def test_cauchy_functional_is_quadratic(rng):
    u = random_mode_sum(rng, 25)
    spec = Vertical()
    a = cauchy_lhs(u, spec, ONE)
    b = cauchy_lhs(ModeSum(u.h, u.ks, 2j * u.cs), spec, ONE)
    assert np.isclose(b.scaled, 4 * a.scaled, rtol=1e-10)


def test_cauchy_grid_independence():
    u = ModeSum.single((10, 0), 1.0, 0.1).normalized()
    coarse = cauchy_lhs(u, Vertical(), ONE)
    fine = cauchy_lhs(u, Vertical(), ONE, grid=grid_for(u, Vertical(), extra_bandwidth=6))
    assert np.isclose(coarse.scaled, fine.scaled, rtol=1e-10)


def test_weighted_norm_is_integral_not_root():
    # the weighted quantity is the integral of e^{-2 rho/h}|u^C|^2 itself
    u = ModeSum.single((3, 4), 1.0, 0.2).normalized()
    g = grid_for(u, Vertical())
    g = list(g)
    bare = restriction_norm(u, Vertical(), grid=g, normalized=False)
    assert np.isclose(weighted_norm(u, Vertical(), grid=g), bare ** 2 * np.exp(1 / u.h), rtol=1e-12)


@pytest.mark.parametrize("m", [5, 10, 20, 40])
def test_single_mode_functional_on_vertical_slice(m):
    # the scaled functional of one lattice mode is (1 - h)/2 up to exp(-1/h) tails
    h = 1 / m
    u = ModeSum.single((m, 0), 1.0, h).normalized()
    val = cauchy_lhs(u, Vertical(), ONE).scaled.real
    assert abs(val - (1 - h) / 2) < np.exp(-0.9 / h)
