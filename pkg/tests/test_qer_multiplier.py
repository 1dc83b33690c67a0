import pytest

from qerlab.hypersurface import Tilted, Vertical
from qerlab.qer import QSymbol, multiplier_residual
from qerlab.spectral import ModeSum


@pytest.mark.parametrize("spec", [Vertical(), Tilted()], ids=["vertical", "tilted"])
def test_identity_symbol_is_exact(spec):
    u = ModeSum.single((6, 8), 1.0, 0.1)
    assert multiplier_residual(u, spec, QSymbol.identity()) < 1e-13


def test_fiber_cutoff_becomes_exact():
    r = [multiplier_residual(ModeSum.single(k, 1.0, h), Vertical(), QSymbol.fiber_cutoff())
         for k, h in (((3, 4), 0.2), ((12, 16), 0.05), ((24, 32), 0.025))]
    assert r[0] > r[1] > r[2]
    assert r[2] < 1e-12


def test_generic_symbol_residual_decreases():
    r = [multiplier_residual(ModeSum.single(k, 1.0, h), Vertical(), QSymbol.generic())
         for k, h in (((3, 4), 0.2), ((6, 8), 0.1), ((12, 16), 0.05))]
    assert r[0] > r[1] > r[2]
    # roughly first order: a factor 4 in h gives a factor between 2 and 8
    assert 2 < r[0] / r[2] < 8
