"""Fourier-multiplier quantization on graph charts and the multiplier residual.

A symbol is a finite sum of separable terms b(alpha) m(alpha*), with
alpha = (x', xi) the chart position and alpha* the dual variables.  Each
term is quantized as b * m(hD), applied with FFTs: the x' directions are
periodic and the xi box [-tau, tau]^n is treated as periodic, which is
harmless because the restricted transform is Gaussian-small at its edges.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..fbi import bump, eval_T
from ..geometry import PERIOD, TAU_DEFAULT, TubePoint
from ..hypersurface import ChartError
from ..spectral import ModeSum

__all__ = ["QSymbol", "ChartSamples", "chart_samples", "apply_Q", "multiplier_residual"]


@dataclass
class QSymbol:
    """Sum of terms b(xp, xi) * m(xps, xis); callables take stacked coordinate arrays."""

    terms: list = field(default_factory=list)

    @classmethod
    def identity(cls) -> "QSymbol":
        return cls([(lambda xp, xi: 1.0, lambda xps, xis: 1.0)])

    @classmethod
    def fiber_cutoff(cls, radius: float = 3.0, flat: float = 0.7, b=None) -> "QSymbol":
        """b(alpha) times a radial cutoff equal to 1 for |alpha*| <= flat * radius."""
        b = b or (lambda xp, xi: 1.0 + 0.5 * np.cos(xp).sum(-1))
        return cls([(b, lambda xps, xis: bump(np.sqrt(np.sum(xps**2, -1) + np.sum(xis**2, -1)) / radius, flat))])

    @classmethod
    def generic(cls) -> "QSymbol":
        """Smooth, fibre-compact, not constant on the fibre range of the flow-out set."""
        def m1(xps, xis):
            r = np.sqrt(np.sum(xps**2, -1) + np.sum(xis**2, -1))
            return bump(r / 3.0) * (1.0 + 0.2 * xps.sum(-1))

        def m2(xps, xis):
            return bump(np.sqrt(np.sum(xis**2, -1)) / 2.0) * np.cos(0.5 * xps.sum(-1))

        return cls([
            (lambda xp, xi: 1.0 + 0.5 * np.cos(xp).sum(-1), m1),
            (lambda xp, xi: 0.3 * xi[..., 0], m2),
        ])

    def __call__(self, xp, xi, xps, xis):
        return sum(np.asarray(b(xp, xi)) * np.asarray(m(xps, xis)) for b, m in self.terms)


def _chart(spec):
    if spec.kind not in ("vertical", "tilted"):
        raise ChartError(f"multiplier quantization needs a flat graph chart, got {spec.kind}")
    others = [j for j in range(spec.n) if j != spec.axis]
    dH = spec.avec if spec.kind == "tilted" else np.zeros(spec.n)
    return others, dH


@dataclass(eq=False)
class ChartSamples:
    """T_Sigma u on the grid (x', xi) with dual grids for the FFT."""

    spec: object
    h: float
    xp: np.ndarray      # (..., n-1)
    xi: np.ndarray      # (..., n)
    xps: np.ndarray
    xis: np.ndarray
    values: np.ndarray


def chart_samples(u: ModeSum, spec, tau: float = TAU_DEFAULT, dxi: float | None = None) -> ChartSamples:
    others, dH = _chart(spec)
    h, n = u.h, u.n
    dxi = dxi or min(0.05, np.sqrt(h) / 5)
    nxi = int(np.ceil(2 * tau / dxi))
    xi1 = -tau + (2 * tau / nxi) * np.arange(nxi)
    step_xi = 2 * tau / nxi
    nx = 2 * int(np.abs(u.ks[:, others]).max() if others else 0) + 8
    x1 = np.arange(nx) * PERIOD / nx
    axes = [x1] * len(others) + [xi1] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    xp = np.stack(mesh[: len(others)], -1) if others else np.zeros(mesh[0].shape + (0,))
    xi = np.stack(mesh[len(others):], -1)
    x = np.zeros(xi.shape[:-1] + (n,))
    for i, j in enumerate(others):
        x[..., j] = xp[..., i]
    x[..., spec.axis] = xi @ dH + spec.c
    values = eval_T(u, TubePoint(x, xi))
    fx = np.fft.fftfreq(nx, d=1.0 / nx) * h
    fxi = 2 * np.pi * np.fft.fftfreq(nxi, d=step_xi) * h
    dual = np.meshgrid(*([fx] * len(others) + [fxi] * n), indexing="ij")
    xps = np.stack(dual[: len(others)], -1) if others else np.zeros(dual[0].shape + (0,))
    xis = np.stack(dual[len(others):], -1)
    return ChartSamples(spec, h, xp, xi, xps, xis, values)


def apply_Q(sym: QSymbol, s: ChartSamples) -> np.ndarray:
    F = np.fft.fftn(s.values)
    out = np.zeros_like(s.values)
    for b, m in sym.terms:
        mult = np.broadcast_to(np.asarray(m(s.xps, s.xis)), F.shape)
        out += np.asarray(b(s.xp, s.xi)) * np.fft.ifftn(mult * F)
    return out


def q_sigma(sym: QSymbol, s: ChartSamples) -> np.ndarray:
    """Symbol evaluated on the graph covector (x'*, xi*) = (xi' + xi_n dH/dx', xi_n dH/dxi)."""
    others, dH = _chart(s.spec)
    xps0 = s.xi[..., others]
    xis0 = s.xi[..., s.spec.axis][..., None] * dH
    return np.broadcast_to(sym(s.xp, s.xi, xps0, xis0), s.values.shape)


def multiplier_residual(u: ModeSum, spec, sym: QSymbol, tau: float = TAU_DEFAULT, dxi: float | None = None) -> float:
    """||Q(h) T_Sigma u - q_Sigma T_Sigma u|| / ||T_Sigma u|| on the chart grid."""
    s = chart_samples(u, spec, tau, dxi)
    diff = apply_Q(sym, s) - q_sigma(sym, s) * s.values
    return float(np.linalg.norm(diff) / np.linalg.norm(s.values))
