"""Heat-kernel FBI transform on the flat tube and wavefront diagnostics.

The bare transform is ``Tu(x, xi) = exp(-1/(2h)) exp(-rho/h) u^C(x, xi)``.
For a lattice mode with ``|k| h = 1`` completing the square gives
``|Tu| = exp(-|xi - h k|^2 / (2h))``, so every evaluation here stays O(1)
once the exponents are combined before exponentiation.

The L2-normalized transform of the heat-kernel construction carries an extra
factor ``h^(-n/4)`` (see :func:`heat_constant`).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .geometry import PERIOD, TAU_DEFAULT, TubePoint, wrap
from .quadrature import xi_quadrature
from .spectral import ModeSum, _exponents, jet

__all__ = [
    "eval_T",
    "log_eval_T",
    "eval_T_heat",
    "heat_constant",
    "calibrate_heat_constant",
    "ambient_norm",
    "energy_mass_off_shell",
    "log_energy_mass_off_shell",
    "anti_wick_average",
    "holomorphy_residual",
    "symbol_P_rho",
    "Axis",
    "PhaseSpaceField",
    "sample_T",
    "mode_factor_fields",
    "bump",
    "semiclassical_FT",
    "WFDiagnostic",
    "SeparableDiagnostic",
    "separable_FT",
    "distance_to_W",
    "distance_to_crude",
    "ContainmentStats",
    "wf_containment",
]

LOGGER = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# pointwise transform
# --------------------------------------------------------------------------

def log_eval_T(u: ModeSum, p: TubePoint) -> np.ndarray:
    """Complex log of the bare transform."""
    E = _exponents(u, p.x, p.xi, weighted=True) - 0.5 / u.h
    shift = E.real.max(axis=-1, keepdims=True)
    s = np.exp(E - shift) @ u.cs
    with np.errstate(divide="ignore"):
        return shift[..., 0] + np.log(s)


def eval_T(u: ModeSum, p: TubePoint) -> np.ndarray:
    """Bare transform exp(-1/2h) exp(-rho/h) u^C at tube points."""
    E = _exponents(u, p.x, p.xi, weighted=True) - 0.5 / u.h
    return np.exp(E) @ u.cs


def heat_constant(n: int, h: float) -> float:
    """Ratio between the heat-kernel transform and the bare transform."""
    return h ** (-n / 4.0)


def _heat_nodes_needed(k: float, xi: float, h: float) -> int:
    return int(abs(k) + abs(xi) / h + 10.0 / np.sqrt(h)) + 16


def eval_T_heat(u: ModeSum, p: TubePoint, n_quad: int | None = None) -> np.ndarray:
    """Heat-kernel transform by direct quadrature of the periodized kernel.

    Computes ``h^(-n/4) * int K(z - y) exp(-rho(z)/h) u(y) dy`` with
    ``K(d) = (2 pi h)^(-n/2) sum_images exp(-d^2 / 2h)`` (nearest image plus
    one shell on each side) using the trapezoid rule in ``y``.  The kernel
    factorizes over coordinates, so each lattice term is a product of 1-D
    integrals.
    """
    if u.antiholomorphic:
        raise ValueError("the heat-kernel transform is defined for genuine eigenfunctions only")
    h = u.h
    x = np.atleast_2d(p.x)
    xi = np.atleast_2d(p.xi)
    out = np.zeros(x.shape[0], dtype=complex)
    images = PERIOD * np.arange(-1, 2)
    for i in range(x.shape[0]):
        total = 0j
        for k, c in zip(u.ks, u.cs):
            prod = c
            for j in range(u.n):
                need = _heat_nodes_needed(k[j], xi[i, j], h)
                N = need if n_quad is None else n_quad
                if N < need:
                    raise ValueError(f"heat quadrature underresolved: {N} < {need} nodes")
                t = -np.pi + np.arange(N) * PERIOD / N
                s = t[:, None] + images[None, :]
                ker = np.exp(-(s * s) / (2 * h) - 1j * xi[i, j] * s / h).sum(axis=1)
                integrand = ker * np.exp(1j * k[j] * (x[i, j] + t))
                prod = prod * integrand.sum() * (PERIOD / N) / np.sqrt(2 * np.pi * h)
            total += prod
        out[i] = total
    return heat_constant(u.n, h) * out.reshape(p.x.shape[:-1])


def calibrate_heat_constant(u: ModeSum, p: TubePoint) -> complex:
    """Measured ratio eval_T_heat / eval_T at one point (expected h^(-n/4))."""
    return complex(np.ravel(eval_T_heat(u, p) / eval_T(u, p))[0])


# --------------------------------------------------------------------------
# ambient phase-space integrals
# --------------------------------------------------------------------------

def _log_x_density(u: ModeSum, xi: np.ndarray) -> np.ndarray:
    """log of int_{T^n} |Tu(x, xi)|^2 dx (bare transform).

    Distinct lattice exponentials are orthogonal on the period cell, so the
    x-integral is exactly (2 pi)^n sum_k |c_k|^2 |T_k(xi)|^2; this is what
    the trapezoid rule returns on any grid finer than Nyquist.
    """
    E = _exponents(u, np.zeros_like(xi), xi, weighted=True) - 0.5 / u.h
    with np.errstate(divide="ignore"):
        logc2 = 2.0 * np.log(np.abs(u.cs))
    return u.n * np.log(PERIOD) + logsumexp(2.0 * E.real + logc2, axis=-1)


def ambient_norm(u: ModeSum, tau: float = TAU_DEFAULT, normalized: bool = True) -> float:
    """L2 norm of Tu over the tube B*_tau (with the h^(-n/4) factor if normalized)."""
    if not np.any(u.cs):
        return 0.0
    xi, w, _ = xi_quadrature(u.n, tau, u.h)
    logd = _log_x_density(u, xi)
    val = np.exp(logsumexp(logd, b=w))
    if normalized:
        val *= heat_constant(u.n, u.h) ** 2
    return float(np.sqrt(val))


def log_energy_mass_off_shell(u: ModeSum, eps: float, tau: float = TAU_DEFAULT) -> float:
    """log of the fraction of |Tu|^2 mass in {||xi| - 1| > eps}."""
    if not 0 < eps < tau - 1:
        raise ValueError(f"eps must lie in (0, tau-1), got {eps}")
    xi, w, r = xi_quadrature(u.n, tau, u.h, breaks=(1 - eps, 1 + eps))
    logd = _log_x_density(u, xi)
    off = np.abs(r - 1.0) > eps
    if not off.any():
        return -np.inf
    return float(logsumexp(logd[off], b=w[off]) - logsumexp(logd, b=w))


def energy_mass_off_shell(u: ModeSum, eps: float, tau: float = TAU_DEFAULT) -> float:
    return float(np.exp(log_energy_mass_off_shell(u, eps, tau)))


def anti_wick_average(u: ModeSum, a, tau: float = TAU_DEFAULT) -> float:
    """int a(xi) |Tu|^2 / int |Tu|^2 for a symbol depending on xi only."""
    xi, w, _ = xi_quadrature(u.n, tau, u.h)
    d = np.exp(_log_x_density(u, xi))
    return float(np.sum(w * d * a(xi)) / np.sum(w * d))


def holomorphy_residual(u: ModeSum, p: TubePoint) -> np.ndarray:
    """Annihilation residual of e^{rho/h} Tu, relative to |u^C(p)|.

    Two parts, maximum returned: the flat Laplacian ``h^2 |Delta u^C|`` (the
    conjugated operator P_rho kills Tu) and the Cauchy-Riemann part
    ``h |(d_x - i d_xi) u^C|`` for z = x - i xi.  Harmonicity alone cannot
    separate holomorphic from antiholomorphic exponentials; the CR part can.
    """
    J = jet(u, p)
    n = u.n
    mag = np.abs(J.value)
    lap = u.h**2 * np.abs(J.laplacian())
    dbar = J.grad[..., :n] - 1j * J.grad[..., n:]
    cr = u.h * np.linalg.norm(dbar, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        res = np.maximum(lap, cr) / mag
    return np.where(np.maximum(lap, cr) == 0, 0.0, res)


def symbol_P_rho(xi, xstar, xistar) -> np.ndarray:
    """Principal symbol |(x*, xi*)|^2 + 2i <grad rho, (x*, xi*)> - |grad rho|^2 of the conjugated Laplacian."""
    xi, xstar, xistar = (np.asarray(v, dtype=float) for v in (xi, xstar, xistar))
    # grad rho = (0; xi), so only the xi* block pairs with it
    return (np.sum(xstar**2, -1) + np.sum(xistar**2, -1) + 2j * np.sum(xi * xistar, -1)
            - np.sum(xi**2, -1))


# --------------------------------------------------------------------------
# sampled fields
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Axis:
    """A uniform grid axis; ``name`` is e.g. 'x1' or 'xi2'."""

    name: str
    start: float
    step: float
    count: int
    periodic: bool = False

    @property
    def coords(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)

    @classmethod
    def periodic_cell(cls, name, count):
        return cls(name, 0.0, PERIOD / count, count, True)

    @classmethod
    def interval(cls, name, lo, hi, count):
        step = (hi - lo) / (count - 1)
        return cls(name, lo, step, count, False)

    def spec(self) -> dict:
        return {"name": self.name, "start": self.start, "step": self.step,
                "count": self.count, "periodic": self.periodic}


@dataclass(eq=False)
class PhaseSpaceField:
    """Complex samples on a tensor grid of chart coordinates."""

    axes: tuple
    values: np.ndarray
    h: float
    n: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axes = tuple(self.axes)
        self.values = np.asarray(self.values, dtype=complex)
        shape = tuple(a.count for a in self.axes)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match axes {shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field samples must be finite")

    def header(self) -> dict:
        return {"n": self.n, "h": self.h, "axes": [a.spec() for a in self.axes], "meta": self.meta}

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# " + json.dumps(self.header()) + "\n")
            fh.write("re,im\n")
            for v in self.values.ravel(order="C"):
                fh.write(f"{v.real:.17e},{v.imag:.17e}\n")

    def to_binary(self, path) -> None:
        head = json.dumps(self.header()).encode()
        pairs = np.stack([self.values.real.ravel(), self.values.imag.ravel()], axis=-1)
        with open(path, "wb") as fh:
            fh.write(b"PSF1")
            fh.write(np.uint32(len(head)).tobytes())
            fh.write(head)
            fh.write(pairs.astype("<f8").tobytes())

    @classmethod
    def _from_header(cls, head, pairs):
        axes = tuple(Axis(**a) for a in head["axes"])
        vals = (pairs[:, 0] + 1j * pairs[:, 1]).reshape([a.count for a in axes])
        return cls(axes, vals, head["h"], head["n"], head.get("meta", {}))

    @classmethod
    def from_binary(cls, path) -> "PhaseSpaceField":
        with open(path, "rb") as fh:
            if fh.read(4) != b"PSF1":
                raise ValueError("not a phase-space field dump")
            size = int(np.frombuffer(fh.read(4), dtype=np.uint32)[0])
            head = json.loads(fh.read(size))
            pairs = np.frombuffer(fh.read(), dtype="<f8").reshape(-1, 2)
        return cls._from_header(head, pairs)

    @classmethod
    def from_csv(cls, path) -> "PhaseSpaceField":
        with open(path, encoding="utf-8") as fh:
            head = json.loads(fh.readline()[2:])
            fh.readline()
            pairs = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls._from_header(head, pairs)


def sample_T(u: ModeSum, axes, normalized: bool = False) -> PhaseSpaceField:
    """Sample the bare transform of a circle ModeSum on an (x, xi) grid."""
    if u.n != 1:
        raise ValueError("grid sampling of non-separable fields is implemented for n=1")
    ax_x, ax_xi = axes
    if ax_x.step >= np.pi * u.h:
        raise ValueError("x spacing must be below pi*h (Nyquist)")
    X, XI = np.meshgrid(ax_x.coords, ax_xi.coords, indexing="ij")
    vals = eval_T(u, TubePoint(X[..., None], XI[..., None]))
    if normalized:
        vals = vals * heat_constant(1, u.h)
    return PhaseSpaceField((ax_x, ax_xi), vals, u.h, 1, {"kind": "Tu"})


def mode_factor_fields(u: ModeSum, axes_by_coord: dict, fixed: dict | None = None):
    """Rank-one factorization of the transform of a single lattice mode.

    For ``u = c exp(i<k,x>)`` with ``|k| h = 1``,
    ``Tu = c prod_j exp(i k_j x_j) exp(-(xi_j - h k_j)^2 / 2h)``.  Returns one
    1-D :class:`PhaseSpaceField` per axis in ``axes_by_coord`` (keys 'x1',
    'xi2', ...).  Coordinates listed in ``fixed`` (e.g. ``{'x1': 0.0}`` for a
    vertical slice) are evaluated and folded into the constant.
    """
    if len(u.cs) != 1:
        raise ValueError("factorization needs a single lattice mode")
    k, h = u.ks[0], u.h
    const = complex(u.cs[0])
    for name, val in (fixed or {}).items():
        j = int(name.lstrip("xi")) - 1
        if name.startswith("xi"):
            const *= np.exp(-((val - h * k[j]) ** 2) / (2 * h))
        else:
            const *= np.exp(1j * k[j] * val)
    fields = []
    for i, (name, ax) in enumerate(axes_by_coord.items()):
        j = int(name.lstrip("xi")) - 1
        s = ax.coords
        if name.startswith("xi"):
            vals = np.exp(-((s - h * k[j]) ** 2) / (2 * h)).astype(complex)
        else:
            if ax.step >= np.pi * h:
                raise ValueError("x spacing must be below pi*h (Nyquist)")
            vals = np.exp(1j * k[j] * s)
        if i == 0:
            vals = vals * const
        fields.append(PhaseSpaceField((ax,), vals, h, u.n, {"factor": name}))
    return fields


# --------------------------------------------------------------------------
# windowed semiclassical Fourier transform
# --------------------------------------------------------------------------

def bump(t, flat: float = 0.0) -> np.ndarray:
    """Smooth compactly supported window on (-1, 1), equal to 1 on |t| <= flat."""
    t = np.abs(np.asarray(t, dtype=float))
    s = np.clip((t - flat) / (1.0 - flat), 0.0, 1.0)
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def _axis_kernel(ax: Axis, centers, width, freqs, h, flat):
    s = ax.coords
    centers = np.asarray(centers, dtype=float)
    d = s[None, :] - centers[:, None]
    if ax.periodic:
        # measure positions from the window centre so the phase is continuous across the seam
        d = wrap(d)
    w = np.ones_like(d) if width is None else bump(d / width, flat)
    loc = centers[:, None] + d
    phase = np.exp(-1j * freqs[None, :, None] * loc[:, None, :] / h)
    return w[:, None, :] * phase * ax.step


@dataclass(eq=False)
class WFDiagnostic:
    """Magnitudes |F(centers; freqs)| of a windowed semiclassical FT.

    ``amp`` has shape (Nc_0, Nf_0, Nc_1, Nf_1, ...) following ``names``.
    """

    names: tuple
    centers: tuple
    freqs: tuple
    widths: tuple
    amp: np.ndarray
    h: float

    @property
    def peak(self) -> float:
        return float(self.amp.max()) if self.amp.size else 0.0

    def argmax(self) -> dict:
        idx = np.unravel_index(np.argmax(self.amp), self.amp.shape)
        out = {}
        for a, name in enumerate(self.names):
            out[name] = self.centers[a][idx[2 * a]]
            out[name + "*"] = self.freqs[a][idx[2 * a + 1]]
        return out

    def relative(self) -> np.ndarray:
        pk = self.peak
        return self.amp / pk if pk > 0 else np.zeros_like(self.amp)

    def points(self, threshold: float = 0.1) -> dict:
        """Coordinates of samples with magnitude >= threshold * peak."""
        if not 0 < threshold < 1:
            raise ValueError("threshold must lie in (0, 1)")
        rel = self.relative()
        idx = np.nonzero((rel >= threshold) & (rel > 0))
        out = {"rel": rel[idx]}
        for a, name in enumerate(self.names):
            out[name] = np.asarray(self.centers[a])[idx[2 * a]]
            out[name + "*"] = np.asarray(self.freqs[a])[idx[2 * a + 1]]
        return out


def semiclassical_FT(field: PhaseSpaceField, centers, widths, freqs, flat: float = 0.0) -> WFDiagnostic:
    """Windowed transform int exp(-i<s, s*>/h) w(s - c) f(s) ds on a frequency grid.

    One entry of ``centers``/``widths``/``freqs`` per field axis.  A width of
    ``None`` means no window along that axis (only sensible for a periodic
    axis, where the cell is compact).  The window is a product of
    :func:`bump` profiles with support half-width ``width``.
    """
    h = field.h
    d = len(field.axes)
    kernels = []
    for a, ax in enumerate(field.axes):
        f = np.asarray(freqs[a], dtype=float)
        if len(f) > 1:
            fmax = np.abs(f).max()
            if fmax * ax.step / h >= np.pi:
                raise ValueError(f"axis {ax.name}: sample spacing aliases frequency {fmax}")
        kernels.append(_axis_kernel(ax, np.atleast_1d(centers[a]), widths[a], f, h, flat))
    # contract axes one at a time; the result gains (Nc, Nf) at the end each time
    T = field.values
    for a in range(d):
        K = kernels[a]
        T = np.tensordot(T, K, axes=([0], [2]))
    return WFDiagnostic(
        names=tuple(ax.name for ax in field.axes),
        centers=tuple(np.atleast_1d(np.asarray(c, dtype=float)) for c in centers),
        freqs=tuple(np.asarray(f, dtype=float) for f in freqs),
        widths=tuple(widths),
        amp=np.abs(T),
        h=h,
    )


@dataclass(eq=False)
class SeparableDiagnostic:
    """Product of per-factor diagnostics (tensor-product fields)."""

    factors: list
    h: float

    @property
    def names(self):
        return tuple(n for f in self.factors for n in f.names)

    @property
    def peak(self) -> float:
        return float(np.prod([f.peak for f in self.factors]))

    def argmax(self) -> dict:
        out = {}
        for f in self.factors:
            out.update(f.argmax())
        return out

    def points(self, threshold: float = 0.1, chunk: int = 2_000_000) -> dict:
        """Super-threshold samples of the product magnitude.

        Each factor is bounded by its own peak, so a product point can only
        pass if every factor passes on its own; candidates are pruned with
        that bound before forming products.
        """
        if self.peak == 0:
            return {"rel": np.zeros(0), **{n: np.zeros(0) for n in self.names}, **{n + "*": np.zeros(0) for n in self.names}}
        per = [f.points(threshold) for f in self.factors]
        rel = per[0]["rel"]
        cols = {k: v for k, v in per[0].items() if k != "rel"}
        for p in per[1:]:
            r2 = p["rel"]
            i, j = np.nonzero(np.multiply.outer(rel, r2) >= threshold)
            if i.size > chunk:
                raise MemoryError(f"{i.size} super-threshold samples; coarsen the grids")
            rel = rel[i] * r2[j]
            cols = {k: v[i] for k, v in cols.items()}
            cols.update({k: v[j] for k, v in p.items() if k != "rel"})
        cols["rel"] = rel
        return cols


def separable_FT(factors, centers: dict, widths: dict, freqs: dict, flat: float = 0.0) -> SeparableDiagnostic:
    """Windowed FT of a product of 1-D factor fields (keys are axis names)."""
    diags = []
    for fld in factors:
        names = [a.name for a in fld.axes]
        diags.append(semiclassical_FT(fld, [centers[n] for n in names], [widths[n] for n in names],
                                      [freqs[n] for n in names], flat))
    return SeparableDiagnostic(diags, factors[0].h)


# --------------------------------------------------------------------------
# distances to model sets
# --------------------------------------------------------------------------

def _blocks(pts: dict, n: int):
    xi0 = np.stack([pts[f"xi{j}"] for j in range(1, n + 1)], axis=-1)
    xs = np.stack([pts[f"x{j}*"] for j in range(1, n + 1)], axis=-1)
    xis = np.stack([pts[f"xi{j}*"] for j in range(1, n + 1)], axis=-1)
    return xi0, xs, xis


def distance_to_W(pts: dict, n: int) -> np.ndarray:
    """Distance of (xi, x*, xi*) samples to W = {|xi|=1, x*=xi, xi*=0}.

    Minimizing |xi0-w|^2 + |x*-w|^2 over unit w gives w parallel to xi0+x*.
    """
    xi0, xs, xis = _blocks(pts, n)
    d2 = (np.sum(xis**2, -1) + np.sum(xi0**2, -1) + np.sum(xs**2, -1) + 2.0
          - 2.0 * np.linalg.norm(xi0 + xs, axis=-1))
    return np.sqrt(np.clip(d2, 0.0, None))


def distance_to_crude(pts: dict, n: int) -> np.ndarray:
    """Distance to the larger set {|xi|=1, xi*=0, |x*|=1}."""
    xi0, xs, xis = _blocks(pts, n)
    d2 = (np.sum(xis**2, -1) + (np.linalg.norm(xi0, axis=-1) - 1) ** 2
          + (np.linalg.norm(xs, axis=-1) - 1) ** 2)
    return np.sqrt(d2)


@dataclass
class ContainmentStats:
    count: int
    max_distance: float
    mean_distance: float
    max_base_distance: float
    occupancy: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"count": self.count, "max_distance": self.max_distance,
                "mean_distance": self.mean_distance, "max_base_distance": self.max_base_distance,
                "occupancy": self.occupancy}


def wf_containment(diag, model="W", n: int | None = None, threshold: float = 0.1) -> ContainmentStats:
    """Distance statistics of super-threshold samples to a model set.

    ``model`` is ``'W'``, ``'crude'`` or any object with a ``distance(pts)``
    method (e.g. a flow-out set on a hypersurface).
    """
    pts = diag.points(threshold)
    if pts["rel"].size == 0:
        return ContainmentStats(0, 0.0, 0.0, 0.0)
    if model in ("W", "crude"):
        if n is None:
            n = sum(1 for name in diag.names if name.startswith("xi"))
        dist = (distance_to_W if model == "W" else distance_to_crude)(pts, n)
        xi0 = _blocks(pts, n)[0]
        base = np.abs(np.linalg.norm(xi0, axis=-1) - 1.0)
        occupancy = {}
        if n == 1:
            xs = pts["x1*"]
            for sx in (-1, 1):
                for sxs in (-1, 1):
                    near = (np.abs(xi0[:, 0] - sx) < 0.5) & (np.abs(xs - sxs) < 0.5)
                    occupancy[f"xi={sx:+d},x*={sxs:+d}"] = int(near.sum())
    else:
        dist = model.distance(pts)
        base = model.base_distance(pts)
        occupancy = {}
    return ContainmentStats(int(dist.size), float(dist.max()), float(dist.mean()),
                            float(base.max()), occupancy)
