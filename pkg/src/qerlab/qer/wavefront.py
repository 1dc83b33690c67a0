"""Flow-out set on a hypersurface and wavefront containment sweeps.

Surface charts are of the form x_axis = H(x', xi) (vertical and tilted
members).  In such a chart the projection of W to Sigma is

    x'* = xi' + xi_n dH/dx',   xi* = xi_n dH/dxi,      |xi| = 1,

and the Hamilton flow of F = x_axis - H for time t in [-1, 1] adds
t (dH/dx', dH/dxi) to the covector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import linregress

from ..fbi import Axis, PhaseSpaceField, separable_FT, wf_containment
from ..geometry import PERIOD, TAU_DEFAULT
from ..hypersurface import ChartError
from ..spectral import ModeSum

__all__ = [
    "FlowOutSet", "flow_out_set", "ambient_factors", "surface_factors", "wf_diagnostic",
    "SweepSettings", "ContainmentFit", "wf_sigma_containment", "containment_sweep",
]


def _chart(spec):
    if spec.kind not in ("vertical", "tilted"):
        raise ChartError(f"no graph chart x_axis = H(x', xi) for {spec.kind}")
    n = spec.n
    others = [j for j in range(n) if j != spec.axis]
    dH_dxi = spec.avec if spec.kind == "tilted" else np.zeros(n)
    return others, dH_dxi


@dataclass(eq=False)
class FlowOutSet:
    """Samples of W_Sigma in the coordinates (xi, x'*, xi*) of a graph chart.

    Base positions x' are unconstrained on these flat members and omitted.
    """

    spec: object
    names: tuple
    points: np.ndarray
    flow_time: np.ndarray
    base: np.ndarray

    def __post_init__(self):
        self._tree = cKDTree(self.points)

    def _stack(self, pts):
        return np.stack([np.asarray(pts[k], dtype=float) for k in self.names], -1)

    def distance(self, pts) -> np.ndarray:
        d, _ = self._tree.query(self._stack(pts))
        return d

    def base_distance(self, pts) -> np.ndarray:
        xi = np.stack([pts[f"xi{j + 1}"] for j in range(self.spec.n)], -1)
        return np.abs(np.linalg.norm(xi, axis=-1) - 1.0)


def flow_out_set(spec, resolution: int = 256, n_time: int = 65) -> FlowOutSet:
    others, dH = _chart(spec)
    n = spec.n
    if n == 1:
        xi = np.array([[-1.0], [1.0]])
    else:
        psi = np.arange(resolution) * PERIOD / resolution
        xi = np.stack([np.cos(psi), np.sin(psi)], -1)
    t = np.linspace(-1.0, 1.0, n_time)
    XI = np.repeat(xi, len(t), axis=0)
    T = np.tile(t, len(xi))
    xs = XI[:, others]
    xis = (XI[:, spec.axis] + T)[:, None] * dH[None, :]
    names = tuple(f"xi{j + 1}" for j in range(n)) + tuple(f"x{j + 1}*" for j in others) \
        + tuple(f"xi{j + 1}*" for j in range(n))
    pts = np.concatenate([XI, xs, xis], -1)
    base = pts[T == 0.0] if np.any(T == 0.0) else pts[:0]
    return FlowOutSet(spec, names, pts, T, base)


# --------------------------------------------------------------------------
# rank-one factor fields of single modes
# --------------------------------------------------------------------------

def _xi_axis(name, tau, step):
    count = int(np.ceil(2 * tau / step)) + 1
    return Axis.interval(name, -tau, tau, count)


def _x_axis(name, step):
    return Axis.periodic_cell(name, int(np.ceil(PERIOD / step)))


def _check_single(u: ModeSum):
    if len(u.cs) != 1:
        raise ValueError("wavefront factorization needs a single lattice mode")
    return u.ks[0].astype(float), complex(u.cs[0]), u.h


def ambient_factors(u: ModeSum, tau: float, step: float):
    """Factors of Tu over (x_1 .. x_n, xi_1 .. xi_n)."""
    k, c, h = _check_single(u)
    out = []
    for j in range(u.n):
        ax = _x_axis(f"x{j + 1}", step)
        out.append(PhaseSpaceField((ax,), np.exp(1j * k[j] * ax.coords), h, u.n, {}))
    for j in range(u.n):
        ax = _xi_axis(f"xi{j + 1}", tau, step)
        vals = np.exp(-((ax.coords - h * k[j]) ** 2) / (2 * h)) + 0j
        out.append(PhaseSpaceField((ax,), vals, h, u.n, {}))
    out[0] = PhaseSpaceField(out[0].axes, c * out[0].values, h, u.n, {})
    return out


def surface_factors(u: ModeSum, spec, tau: float, step: float):
    """Factors of the restricted transform in the chart (x', xi) of a vertical/tilted member."""
    k, c, h = _check_single(u)
    others, dH = _chart(spec)
    c = c * np.exp(1j * k[spec.axis] * spec.c)
    out = []
    for j in others:
        ax = _x_axis(f"x{j + 1}", step)
        out.append(PhaseSpaceField((ax,), np.exp(1j * k[j] * ax.coords), h, u.n, {}))
    for j in range(u.n):
        ax = _xi_axis(f"xi{j + 1}", tau, step)
        s = ax.coords
        vals = np.exp(1j * k[spec.axis] * dH[j] * s - (s - h * k[j]) ** 2 / (2 * h))
        out.append(PhaseSpaceField((ax,), vals, h, u.n, {}))
    out[0] = PhaseSpaceField(out[0].axes, c * out[0].values, h, u.n, {})
    return out


@dataclass
class SweepSettings:
    width_c: float = 2.5        # window half-width = width_c sqrt(h)
    spacing_c: float = 0.5      # centre/frequency spacing = spacing_c sqrt(h)
    freq_max: float = 2.0
    x_centers: int = 1           # plane-wave factors are translation invariant


def wf_diagnostic(factors, tau: float, h: float, settings: SweepSettings = SweepSettings()):
    """Separable windowed FT over centre/frequency grids of spacing ~ sqrt(h)."""
    sh = np.sqrt(h)
    width = settings.width_c * sh
    d = settings.spacing_c * sh
    freqs_grid = np.arange(-settings.freq_max, settings.freq_max + d / 2, d)
    centers, widths, freqs = {}, {}, {}
    for f in factors:
        ax = f.axes[0]
        if ax.periodic:
            centers[ax.name] = np.arange(settings.x_centers) * PERIOD / settings.x_centers
        else:
            lim = tau - width
            centers[ax.name] = np.arange(-lim, lim + d / 2, d)
        widths[ax.name] = width
        freqs[ax.name] = freqs_grid
    return separable_FT(factors, centers, widths, freqs)


def wf_sigma_containment(u: ModeSum, spec, tau: float = TAU_DEFAULT, threshold: float = 0.1,
                         settings: SweepSettings = SweepSettings(), resolution: int = 512):
    """Distance of super-threshold surface-FT samples to W_Sigma, plus base distance to S*M."""
    h = u.h
    step = 0.25 * np.pi * h / settings.freq_max
    diag = wf_diagnostic(surface_factors(u, spec, tau, step), tau, h, settings)
    return wf_containment(diag, flow_out_set(spec, resolution), threshold=threshold)


@dataclass
class ContainmentFit:
    hs: list
    radii: list
    exponent: float
    constant: float
    stderr: float


def containment_sweep(ks, spec=None, tau: float = TAU_DEFAULT, threshold: float = 0.1,
                      settings: SweepSettings = SweepSettings()) -> ContainmentFit:
    """Max containment distance for single modes k (h = 1/|k|) and its power law in h.

    ``spec=None`` measures distance to W in the full tube, otherwise to
    W_Sigma on the given member.
    """
    hs, radii = [], []
    for k in ks:
        k = np.asarray(k)
        h = 1.0 / np.linalg.norm(k)
        u = ModeSum.single(k, 1.0, h).normalized()
        if spec is None:
            step = 0.25 * np.pi * h / settings.freq_max
            diag = wf_diagnostic(ambient_factors(u, tau, step), tau, h, settings)
            stats = wf_containment(diag, "W", n=u.n, threshold=threshold)
        else:
            stats = wf_sigma_containment(u, spec, tau, threshold, settings)
        hs.append(float(h))
        radii.append(float(stats.max_distance))
    fit = linregress(np.log(hs), np.log(radii))
    return ContainmentFit(hs, radii, float(fit.slope), float(np.exp(fit.intercept)), float(fit.stderr))
