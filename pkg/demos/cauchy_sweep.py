"""h-sweep of the scaled Cauchy functional for single modes on a slice.

Writes sweep.csv/sweep.json to the given directory (default ./demo-out).

    python3 demos/cauchy_sweep.py [outdir]
"""
import sys

import numpy as np

from qerlab.hypersurface import Vertical
from qerlab.qer import emit_report, scaling_experiment
from qerlab.spectral import ModeSum

out = sys.argv[1] if len(sys.argv) > 1 else "demo-out"


def family(h):
    m = round(1 / h)
    return [ModeSum.single((m, 0), 1.0, h).normalized()]


rep = scaling_experiment(family, Vertical(), [1 / 5, 1 / 10, 1 / 20, 1 / 40], a=lambda x, xi: np.ones(len(x)))
print("  h       scaled LHS   (1-h)/2     defect reference   restriction norm")
for r in rep.rows:
    print(f"{r.h:.4f}   {r.scaled_lhs:.6f}   {(1 - r.h) / 2:.6f}   {r.rhs:12.4f}      {r.norm:.6f}")
print("written:", *emit_report(rep, f"{out}/sweep"))
