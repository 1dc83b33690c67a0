"""Principal symbols of the second-order Cauchy operator and an ellipticity scan."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import TubePoint, apply_J, grad_rho
from ..hypersurface import angles, f_value, intersect_sphere_bundle, local_condition_check, normal

__all__ = ["tangent_covector", "symbol_A", "symbol_B", "EllipticityScan", "ellipticity_scan"]


def tangent_covector(spec, p: TubePoint, eta) -> np.ndarray:
    """Project an ambient covector onto the cotangent space of Sigma (drop the nu part)."""
    nu = normal(spec, p)
    eta = np.asarray(eta, dtype=float)
    return eta - np.sum(eta * nu, -1, keepdims=True) * nu


def symbol_A(spec, p: TubePoint, eta) -> np.ndarray:
    """-|eta|^2 + eta(X)^2 + |grad rho|^2 f(theta, phi) with X = J nu."""
    eta = tangent_covector(spec, p, eta)
    X = apply_J(normal(spec, p))
    theta, phi = angles(spec, p)
    g2 = np.sum(grad_rho(p) ** 2, -1)
    return -np.sum(eta**2, -1) + np.sum(eta * X, -1) ** 2 + g2 * f_value(theta, phi)


def symbol_B(spec, p: TubePoint, eta) -> np.ndarray:
    """2 eta((grad rho)^T) - cos theta cos phi: the real part of the first-order operator's symbol."""
    eta = tangent_covector(spec, p, eta)
    nu = normal(spec, p)
    gr = grad_rho(p)
    gt = gr - np.sum(gr * nu, -1, keepdims=True) * nu
    theta, phi = angles(spec, p)
    return 2.0 * np.sum(eta * gt, -1) - np.cos(theta) * np.cos(phi)


@dataclass
class EllipticityScan:
    min_sigma: float
    max_sigma: float
    max_f_term: float      # max of |grad rho|^2 f over the nodes
    margin: float          # -max_sigma
    local_condition: bool
    nodes: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def ellipticity_scan(spec, eta_radius: float = 1.0, resolution: int = 64, n_eta: int = 32,
                     seed: int = 0, delta: float = 0.1, require_condition: bool = False) -> EllipticityScan:
    """Extremes of sigma(A) over Sigma cap S*M times a ball of tangent covectors.

    Each node gets eta = 0, eta = +-eta_radius X and ``n_eta`` random
    covectors in the ball.  With ``require_condition`` a failed corner
    avoidance check raises instead of reporting.
    """
    ok = local_condition_check(spec, delta, resolution)
    if require_condition and not ok:
        raise ValueError("local condition fails on this hypersurface")
    grid = intersect_sphere_bundle(spec, resolution)
    p = grid.point
    m = grid.size
    dim = 2 * spec.n
    rng = np.random.default_rng(seed)
    X = grid.X
    etas = [np.zeros((m, dim)), eta_radius * X, -eta_radius * X]
    for _ in range(n_eta if eta_radius > 0 else 0):
        v = tangent_covector(spec, p, rng.standard_normal((m, dim)))
        v /= np.linalg.norm(v, axis=-1, keepdims=True)
        etas.append(v * eta_radius * rng.uniform(0, 1, (m, 1)) ** (1.0 / (dim - 1)))
    vals = np.stack([symbol_A(spec, p, e) for e in etas])
    fterm = np.sum(grad_rho(p) ** 2, -1) * f_value(grid.theta, grid.phi)
    mx = float(vals.max())
    return EllipticityScan(float(vals.min()), mx, float(fterm.max()), 0.0 - mx, ok, m)
