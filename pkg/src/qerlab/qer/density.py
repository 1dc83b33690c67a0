"""Restriction density q on Sigma cap S*M and its integrals.

On flat models the density reduces to

    q = |b0|^2 [ -15 (xi . nu_x)^2 - (xi . nu_xi)(xi . nu_x) ]

where (nu_x; nu_xi) is the unit normal.  It comes from two pieces: a
phase term 8 |b0|^2 (d_beta phi)(xi . d_x beta) with d_beta phi = -2 <nu_x, xi>
(the FBI phase has gradient (xi', 0) at y = x over the fibre point xi'), and
(xi . nu_x)^2 - (d_beta rho)(xi . nu_x).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import PERIOD, TubePoint
from ..hypersurface import ChartError, _zero_set_graph, intersect_sphere_bundle, normal

__all__ = [
    "B0SQ", "q_parts", "density_q", "density_q_fd", "fbi_phase", "qer_rhs", "qer_rhs_defect",
    "qer_rhs_angular_average", "calibrate_b0sq", "GeneralPosition", "general_position_check",
]

# squared leading heat amplitude; frozen after calibrate_b0sq() returned 1
B0SQ = 1.0


def _split(nu, n):
    return nu[..., :n], nu[..., n:]


def q_parts(spec, p: TubePoint, b0sq: float = B0SQ):
    """(q1, q2) at nodes of Sigma cap S*M."""
    n = p.n
    nx, nxi = _split(normal(spec, p), n)
    s = np.sum(p.xi * nx, -1)
    d_beta_phi = -2.0 * s
    q1 = 8.0 * b0sq * d_beta_phi * s
    q2 = b0sq * (s**2 - np.sum(p.xi * nxi, -1) * s)
    return q1, q2


def _check_shell(p, tol=1e-8):
    if np.any(np.abs(np.linalg.norm(p.xi, axis=-1) - 1.0) > tol):
        raise ValueError("density is defined on the unit shell only")


def density_q(spec, p: TubePoint, b0sq: float = B0SQ) -> np.ndarray:
    _check_shell(p)
    q1, q2 = q_parts(spec, p, b0sq)
    return q1 + q2


def fbi_phase(x, xi, y):
    """phi(z, y) = i((z - y)^2 / 2 + rho(z)) with z = x - i xi (flat, nearest image)."""
    d = x - 1j * xi - y
    return 1j * (0.5 * np.sum(d * d, -1) + 0.5 * np.sum(xi * xi, -1))


def density_q_fd(spec, p: TubePoint, b0sq: float = B0SQ, eps: float = 1e-5) -> np.ndarray:
    """Same density from finite differences of F, rho and the FBI phase only."""
    _check_shell(p)
    n = p.n
    x, xi = np.atleast_2d(p.x), np.atleast_2d(p.xi)
    base = np.concatenate([x, xi], -1)
    E = np.eye(2 * n)

    def F(v):
        return spec.F(v[..., :n], v[..., n:])

    def grad_fd(fun, v):
        return np.stack([(fun(v + eps * E[j]) - fun(v - eps * E[j])) / (2 * eps) for j in range(2 * n)], -1)

    gF = grad_fd(F, base)
    nu = gF / np.linalg.norm(gF, axis=-1, keepdims=True)

    def beta(v):
        g = grad_fd(F, v)
        return F(v) / np.linalg.norm(g, axis=-1)

    # derivative of the normalized defining function in x (eps larger: nested differences)
    h2 = 1e-4
    dx_beta = np.stack([(beta(base + h2 * E[j]) - beta(base - h2 * E[j])) / (2 * h2) for j in range(n)], -1)
    # d_beta phi: phase at fibre point -2 xi, y = x, differentiated along nu in the z-chart
    zb = np.concatenate([x, -2 * xi], -1)

    def phase(v):
        return fbi_phase(v[..., :n], v[..., n:], x)

    d_phi = np.sum(grad_fd(phase, zb) * nu, -1).real
    rho_beta = np.sum(grad_fd(lambda v: 0.5 * np.sum(v[..., n:] ** 2, -1), base) * nu, -1)
    s = np.sum(xi * nu[..., :n], -1)
    q1 = 8.0 * b0sq * d_phi * np.sum(xi * dx_beta, -1)
    q2 = b0sq * (s**2 - rho_beta * s)
    return (q1 + q2).reshape(np.shape(p.xi)[:-1])


def _eval_a(a, x, xi):
    if a is None:
        return np.ones(len(x))
    return np.broadcast_to(np.asarray(a(x, xi), dtype=float), (len(x),))


def qer_rhs(spec, a=None, resolution: int = 64, b0sq: float = B0SQ, grid=None) -> float:
    """Integral of a q over Sigma cap S*M against the induced Liouville measure."""
    grid = grid if grid is not None else intersect_sphere_bundle(spec, resolution)
    if grid.size == 0:
        raise ValueError("empty intersection")
    q = density_q(spec, grid.point, b0sq)
    return float(np.sum(grid.weights * _eval_a(a, grid.x, grid.xi) * q))


def sphere_area(n: int) -> float:
    return 2.0 if n == 1 else PERIOD


def qer_rhs_angular_average(spec, a=None, resolution: int = 64, b0sq: float = B0SQ) -> float:
    """qer_rhs divided by the volume of the unit sphere in the fibre.

    This is what the single-mode reference averages to when the direction
    of k is uniform on the sphere.
    """
    return qer_rhs(spec, a, resolution, b0sq) / sphere_area(spec.n)


def _slice_nodes(spec, khat, resolution):
    """Nodes and weights of Sigma cap {xi = khat}, weight = d(length) / |nu_x|."""
    n = spec.n
    if spec.kind in ("vertical", "tilted"):
        shift = float(khat @ spec.avec) if spec.kind == "tilted" else 0.0
        if n == 1:
            x = np.array([[spec.c + shift]])
            w = np.ones(1)
        else:
            other = 1 - spec.axis
            t = np.arange(resolution) * PERIOD / resolution
            x = np.zeros((resolution, 2))
            x[:, other] = t
            x[:, spec.axis] = spec.c + shift
            w = np.full(resolution, PERIOD / resolution)
    elif spec.kind == "tubegraph":
        if n == 1:
            from ..hypersurface import _roots_1d
            x = np.asarray(_roots_1d(spec.g))[:, None]
            w = np.ones(len(x))
        else:
            x1, x2, dt = _zero_set_graph(spec.g, resolution)
            x = np.stack([x1, x2], -1)
            g = spec.g.grad(x)
            w = dt * np.linalg.norm(g, axis=-1) / np.abs(g[:, 0])
    else:
        raise ChartError(f"unknown hypersurface kind {spec.kind}")
    if len(x) == 0:
        raise ValueError("the slice misses Sigma cap S*M")
    xi = np.broadcast_to(khat, x.shape).copy()
    p = TubePoint(x, xi)
    nx = normal(spec, p)[:, :n]
    return p, w / np.linalg.norm(nx, axis=-1)


def qer_rhs_defect(spec, a, u, resolution: int = 256, b0sq: float = B0SQ) -> float:
    """Reference for a single lattice mode: integral of a q over Sigma cap {xi = k/|k|}."""
    if len(u.cs) != 1:
        raise ValueError("defect reference needs a single lattice mode")
    khat = u.ks[0] / np.linalg.norm(u.ks[0])
    p, w = _slice_nodes(spec, khat, resolution)
    return float(np.sum(w * _eval_a(a, p.x, p.xi) * density_q(spec, p, b0sq)))


def calibrate_b0sq(resolution: int = 64) -> float:
    """Constant making the vertical-slice density integral equal -15 times the integral of xi_n^2."""
    from ..hypersurface import Vertical
    spec = Vertical(axis=1, n=2)
    grid = intersect_sphere_bundle(spec, resolution)
    ref = -15.0 * np.sum(grid.weights * grid.xi[:, 1] ** 2)
    return float(ref / qer_rhs(spec, None, b0sq=1.0, grid=grid))


@dataclass
class GeneralPosition:
    ok: bool
    value: float
    measure: float


def general_position_check(spec, a=None, resolution: int = 64, b0sq: float = B0SQ) -> GeneralPosition:
    grid = intersect_sphere_bundle(spec, resolution)
    value = qer_rhs(spec, a, b0sq=b0sq, grid=grid)
    measure = grid.total_measure()
    return GeneralPosition(bool(abs(value) > 1e-6 * measure), value, measure)
