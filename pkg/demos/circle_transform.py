"""Transform of a single circle mode and where its phase-space mass sits.

    python3 demos/circle_transform.py
"""
import numpy as np

from qerlab import fbi
from qerlab.geometry import TubePoint
from qerlab.spectral import ModeSum

k = 20
h = 1 / k
u = ModeSum.single((-k,), 1.0, h)

# |Tu| is a Gaussian in xi centred at the momentum -1 of the mode
xi = np.linspace(-2, 2, 9)
vals = np.abs(fbi.eval_T(u, TubePoint(np.zeros((9, 1)), xi[:, None])))
print("xi      |Tu(0, xi)|   exp(-k(xi+1)^2/2)")
for a, b in zip(xi, vals):
    print(f"{a:+.2f}   {b:.6e}   {np.exp(-k * (a + 1) ** 2 / 2):.6e}")

# the direct heat-kernel quadrature agrees with the closed form up to h^(-1/4)
p = TubePoint(np.array([[0.3]]), np.array([[-0.8]]))
print("\nheat kernel / closed form:", fbi.calibrate_heat_constant(u, p), " expected", h ** -0.25)

# off-shell mass decays like exp(-c/h)
for m in (10, 20, 40, 80):
    v = ModeSum.single((-m,), 1.0, 1 / m)
    print(f"h = 1/{m:<3d} log off-shell mass (eps=0.25) = {fbi.log_energy_mass_off_shell(v, 0.25):9.3f}")
