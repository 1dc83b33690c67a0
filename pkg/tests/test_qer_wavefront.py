import numpy as np
import pytest

from qerlab.hypersurface import Tilted, Vertical
from qerlab.qer import containment_sweep, flow_out_set, wf_sigma_containment
from qerlab.spectral import ModeSum


def test_flow_out_points_have_zero_distance():
    fo = flow_out_set(Vertical(), 64, 17)
    pts = {nm: fo.points[::37, i] for i, nm in enumerate(fo.names)}
    assert np.abs(fo.distance(pts)).max() < 1e-12


def test_flow_out_off_shell_distance():
    fo = flow_out_set(Vertical(), 256, 33)
    # momentum of length 1.5 is 0.5 away from the unit shell at least
    pts = {"xi1": np.array([1.5]), "xi2": np.array([0.0]), "x2*": np.array([0.0]),
           "xi1*": np.array([0.0]), "xi2*": np.array([0.0])}
    assert fo.distance(pts)[0] >= 0.5 - 1e-9


@pytest.mark.parametrize("spec", [Vertical(), Tilted()], ids=["vertical", "tilted"])
def test_sigma_containment_scales_with_sqrt_h(spec):
    r = [wf_sigma_containment(ModeSum.single(k, 1.0, h), spec).max_distance
         for k, h in (((6, 8), 0.1), ((24, 32), 0.025))]
    # four times smaller h halves the radius
    assert 0.4 < r[1] / r[0] < 0.6


def test_ambient_containment_fit():
    fit = containment_sweep([(6, 8), (12, 16), (24, 32)])
    assert 0.4 <= fit.exponent <= 0.6
    assert np.all(np.array(fit.radii) < 4 * np.sqrt(fit.hs))
