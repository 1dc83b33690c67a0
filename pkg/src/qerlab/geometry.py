"""Flat Grauert tube over the circle and the 2-torus.

Coordinates on the tube chart are ``(x, xi)`` with ``x`` periodic of period
2*pi and ``|xi| < tau``.  Tangent vectors are stored as arrays of length
``2n`` in block form ``(x-part; xi-part)``.  Every function here broadcasts
over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PERIOD",
    "TAU_DEFAULT",
    "ManifoldModel",
    "TubePoint",
    "kahler_potential",
    "grad_rho",
    "apply_J",
    "complexify",
    "hamilton_field",
    "wrap",
]

PERIOD = 2.0 * np.pi
TAU_DEFAULT = 2.0


@dataclass(frozen=True)
class ManifoldModel:
    """Flat circle (n=1) or flat square torus (n=2) with a tube radius."""

    n: int = 2
    tau: float = TAU_DEFAULT

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.n}")
        if not self.tau > 1.0:
            raise ValueError(f"tube radius must exceed 1, got {self.tau}")

    @property
    def period(self) -> float:
        return PERIOD

    def metric(self, x=None) -> np.ndarray:
        return np.eye(self.n)

    def contains(self, p: "TubePoint") -> np.ndarray:
        return np.linalg.norm(p.xi, axis=-1) < self.tau


@dataclass(frozen=True)
class TubePoint:
    """A point (or a batch of points) of the tube chart.

    ``x`` and ``xi`` have shape ``(..., n)``; scalars are promoted to n=1.
    """

    x: np.ndarray = field()
    xi: np.ndarray = field()

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if x.shape != xi.shape:
            raise ValueError(f"x and xi shapes differ: {x.shape} vs {xi.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def n(self) -> int:
        return self.x.shape[-1]

    @property
    def z(self) -> np.ndarray:
        return complexify(self)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.xi], axis=-1)


def wrap(x):
    """Reduce angles to [-pi, pi)."""
    return (np.asarray(x) + np.pi) % PERIOD - np.pi


def _xi(p):
    return p.xi if isinstance(p, TubePoint) else np.asarray(p, dtype=float)


def kahler_potential(p) -> np.ndarray:
    """rho = |xi|^2 / 2.  Accepts a TubePoint or a raw xi array."""
    xi = _xi(p)
    return 0.5 * np.sum(xi * xi, axis=-1)


def grad_rho(p) -> np.ndarray:
    """Gradient of rho in block form: zero x-part, xi-part equal to xi."""
    xi = _xi(p)
    return np.concatenate([np.zeros_like(xi), xi], axis=-1)


def apply_J(v) -> np.ndarray:
    """Almost complex structure: J d/dx_j = d/dxi_j, J d/dxi_j = -d/dx_j."""
    v = np.asarray(v)
    n = v.shape[-1] // 2
    a, b = v[..., :n], v[..., n:]
    return np.concatenate([-b, a], axis=-1)


def hamilton_field(grad_f) -> np.ndarray:
    """H_f = J grad f, i.e. d_x f . d_xi - d_xi f . d_x."""
    return apply_J(grad_f)


def complexify(p) -> np.ndarray:
    """z = x - i xi componentwise."""
    return p.x - 1j * p.xi
