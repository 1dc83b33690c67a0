"""Composite Gauss-Legendre and trapezoid rules shared by the grid builders."""
from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from .geometry import PERIOD

__all__ = ["panel_edges", "gauss_panels", "periodic_nodes", "xi_quadrature", "shell_band_edges"]


def panel_edges(lo: float, hi: float, width: float, breaks=()) -> np.ndarray:
    """Edges covering [lo, hi] with panels no wider than ``width``; ``breaks`` are forced edges."""
    pts = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    edges = [lo]
    for a, b in zip(pts[:-1], pts[1:]):
        m = max(1, int(np.ceil((b - a) / width - 1e-12)))
        edges.extend(np.linspace(a, b, m + 1)[1:])
    return np.asarray(edges)


def gauss_panels(edges, order: int = 8):
    """Nodes and weights of the composite Gauss-Legendre rule on the given edges."""
    t, w = leggauss(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * t + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def periodic_nodes(count: int, offset: float = 0.0):
    """Trapezoid rule on one period: exact for trig polynomials of degree < count."""
    nodes = offset + np.arange(count) * PERIOD / count
    return nodes, np.full(count, PERIOD / count)


def shell_band_edges(lo: float, hi: float, h: float | None, coarse: float = 0.25, breaks=()):
    """Radial edges, refined to width ~sqrt(h)/2 inside the band 1 +- 10 sqrt(h)."""
    if h is None:
        return panel_edges(lo, hi, coarse, breaks)
    fine = min(coarse, 0.5 * np.sqrt(h))
    band = 10.0 * np.sqrt(h)
    a, b = max(lo, 1.0 - band), min(hi, 1.0 + band)
    parts = []
    if a > lo:
        parts.append(panel_edges(lo, a, coarse, breaks))
    if b > a:
        parts.append(panel_edges(a, b, fine, breaks))
    if hi > b:
        parts.append(panel_edges(b, hi, coarse, breaks))
    return np.unique(np.concatenate(parts))


def xi_quadrature(n: int, tau: float, h: float | None = None, breaks=(), order: int = 8, nangle=None):
    """Quadrature over the momentum ball |xi| < tau.

    ``breaks`` are radii forced to be panel edges (e.g. 1 +- eps) so that
    indicator functions of shells are integrated exactly.  Returns
    ``(nodes, weights, radius)`` with nodes of shape (N, n).
    """
    edges = shell_band_edges(0.0, tau, h, breaks=breaks)
    r, wr = gauss_panels(edges, order)
    if n == 1:
        xi = np.concatenate([-r[::-1], r])
        w = np.concatenate([wr[::-1], wr])
        return xi[:, None], w, np.abs(xi)
    if nangle is None:
        nangle = 64 if h is None else max(64, int(np.ceil(4 * PERIOD / np.sqrt(h))))
    psi, wpsi = periodic_nodes(nangle)
    R, P = np.meshgrid(r, psi, indexing="ij")
    W = (wr * r)[:, None] * wpsi[None, :]
    xi = np.stack([R * np.cos(P), R * np.sin(P)], axis=-1).reshape(-1, 2)
    return xi, W.ravel(), R.ravel()
