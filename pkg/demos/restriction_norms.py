"""Restriction norms of torus eigenfunctions on three hypersurfaces.

A slice {x1 = 0} sees the same Gaussian mass for every lattice mode, the
curved tube {|xi| = sqrt(1 + cos(x1)/2)} keeps norms bounded above and
below, and both stay flat as h shrinks.

    python3 demos/restriction_norms.py
"""
import numpy as np

from qerlab.hypersurface import Tilted, TubeGraph, Vertical, condition_a_check
from qerlab.qer import restriction_norm
from qerlab.spectral import EnsembleSpec, make_shell_ensemble

print("condition (a) on the curved tube:", condition_a_check(TubeGraph()))
print("condition (a) on the slice:      ", condition_a_check(Vertical()))
print()
print("  h        slice     tilted    curved tube (mean of 4 draws)")
for m in (5, 10, 20):
    ens = make_shell_ensemble(EnsembleSpec(m * m, 4, seed=1))
    row = [np.mean([restriction_norm(u, s) for u in ens]) for s in (Vertical(), Tilted(), TubeGraph())]
    print(f"1/{m:<4d}  " + "  ".join(f"{v:8.5f}" for v in row))
