"""Restriction density q on Sigma cap S*M and the sign of the principal symbol.

    python3 demos/density_and_symbols.py
"""
import numpy as np

from qerlab.hypersurface import Tilted, TubeGraph, Vertical, intersect_sphere_bundle
from qerlab.qer import density_q, ellipticity_scan, general_position_check, qer_rhs

g = intersect_sphere_bundle(Vertical(), 16)
q = density_q(Vertical(), g.point)
print("slice {x1 = 0}: q against -15 xi_1^2 at a few nodes")
for xi, v in list(zip(g.xi, q))[::4]:
    print(f"  xi = ({xi[0]:+.3f}, {xi[1]:+.3f})  q = {v:+.4f}  -15 xi1^2 = {-15 * xi[0] ** 2:+.4f}")
print("integral of q:", qer_rhs(Vertical()), " (-30 pi^2 =", -30 * np.pi ** 2, ")")

for t in (0.0, 0.1, 0.3):
    print(f"tilt {t}: integral {qer_rhs(Tilted(a=(t, 0.0), axis=1)):.3f}")
print("odd probe xi_2 is not in general position:", not general_position_check(Vertical(), lambda x, xi: xi[:, 1]).ok)

for spec in (TubeGraph(), Vertical()):
    s = ellipticity_scan(spec)
    print(f"{spec.kind:10s} max sigma(A) = {s.max_sigma:+.4f}  margin = {s.margin:.4f}  corner-free = {s.local_condition}")
