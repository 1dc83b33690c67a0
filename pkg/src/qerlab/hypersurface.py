"""Catalog hypersurfaces of the flat tube and quadrature on them.

Three families, each with a closed-form defining function F on the chart:

* :class:`Vertical`  F = x_j - c
* :class:`Tilted`    F = x_j - <a, xi> - c
* :class:`TubeGraph` F = |xi|^2 - 1 - delta * g(x)

The outward normal is grad F / |grad F| (times the orientation sign), the
companion tangent field is X = J nu, and the angles (theta, phi) measure
grad rho against nu and X.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .geometry import PERIOD, TAU_DEFAULT, TubePoint, apply_J, grad_rho
from .quadrature import periodic_nodes, xi_quadrature
from .spectral import Jet, ModeSum, jet

__all__ = [
    "ChartError",
    "TrigPolynomial",
    "Vertical",
    "Tilted",
    "TubeGraph",
    "normal",
    "j_normal",
    "angles",
    "mean_curvature",
    "admissible_check",
    "f_value",
    "SurfaceGrid",
    "EnergyCurveGrid",
    "surface_grid",
    "surface_grid_blocks",
    "hypersurface_from_dict",
    "intersect_sphere_bundle",
    "condition_a_check",
    "local_condition_check",
    "tangential_laplacian",
    "sample_nodes",
]

LOGGER = logging.getLogger(__name__)

TANGENCY_TOL = 1e-8


class ChartError(ValueError):
    """Raised when a hypersurface has no usable chart for the requested operation."""


# --------------------------------------------------------------------------
# catalog
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrigPolynomial:
    """Real trigonometric polynomial g(x) = Re sum_k a_k exp(i<k, x>)."""

    terms: tuple  # ((k tuple, complex a), ...)

    @classmethod
    def cos(cls, axis: int = 0, n: int = 2, freq: int = 1):
        k = [0] * n
        k[axis] = freq
        return cls(((tuple(k), 1.0 + 0j),))

    def _parts(self, x):
        x = np.asarray(x, dtype=float)
        ks = np.array([k for k, _ in self.terms], dtype=float)
        a = np.array([c for _, c in self.terms], dtype=complex)
        e = np.exp(1j * np.tensordot(x, ks.T, axes=([-1], [0]))) * a
        return ks, e

    def value(self, x):
        _, e = self._parts(x)
        return e.sum(-1).real

    def grad(self, x):
        ks, e = self._parts(x)
        return (1j * e @ ks).real

    def hess(self, x):
        ks, e = self._parts(x)
        return -np.einsum("...m,mi,mj->...ij", e, ks, ks).real

    def max_freq(self) -> int:
        return int(max(max(abs(c) for c in k) for k, _ in self.terms))


def _block(n, dx, dxi):
    return np.concatenate([dx, dxi], axis=-1)


@dataclass(frozen=True)
class Vertical:
    """Sigma = {x_axis = c}."""

    axis: int = 0
    c: float = 0.0
    n: int = 2
    orientation: int = 1
    kind = "vertical"

    def F(self, x, xi):
        return self.orientation * (np.asarray(x)[..., self.axis] - self.c)

    def grad(self, x, xi):
        x = np.asarray(x, dtype=float)
        g = np.zeros(x.shape[:-1] + (2 * self.n,))
        g[..., self.axis] = self.orientation
        return g

    def hess(self, x, xi):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (2 * self.n, 2 * self.n))

    def params(self) -> dict:
        return {"kind": self.kind, "axis": self.axis, "c": self.c, "n": self.n, "orientation": self.orientation}


@dataclass(frozen=True)
class Tilted:
    """Sigma = {x_axis = <a, xi> + c}."""

    a: tuple = (0.3, 0.0)
    c: float = 0.0
    axis: int = 1
    n: int = 2
    orientation: int = 1
    kind = "tilted"

    @property
    def avec(self):
        return np.asarray(self.a, dtype=float)

    def F(self, x, xi):
        return self.orientation * (np.asarray(x)[..., self.axis] - np.asarray(xi) @ self.avec - self.c)

    def grad(self, x, xi):
        x = np.asarray(x, dtype=float)
        g = np.zeros(x.shape[:-1] + (2 * self.n,))
        g[..., self.axis] = 1.0
        g[..., self.n:] = -self.avec
        return self.orientation * g

    def hess(self, x, xi):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (2 * self.n, 2 * self.n))

    def params(self) -> dict:
        return {"kind": self.kind, "a": list(self.a), "c": self.c, "axis": self.axis,
                "n": self.n, "orientation": self.orientation}


@dataclass(frozen=True)
class TubeGraph:
    """Sigma = {|xi|^2 = 1 + delta g(x)}, a graph over M in the radial variable."""

    g: TrigPolynomial = field(default_factory=TrigPolynomial.cos)
    delta: float = 0.5
    n: int = 2
    orientation: int = 1
    kind = "tubegraph"

    def __post_init__(self):
        if not abs(self.delta) < 1:
            raise ValueError("|delta| must be < 1")

    def radius(self, x):
        return np.sqrt(1.0 + self.delta * self.g.value(x))

    def F(self, x, xi):
        xi = np.asarray(xi)
        return self.orientation * (np.sum(xi * xi, -1) - 1.0 - self.delta * self.g.value(x))

    def grad(self, x, xi):
        return self.orientation * _block(self.n, -self.delta * self.g.grad(x), 2.0 * np.asarray(xi, dtype=float))

    def hess(self, x, xi):
        x = np.asarray(x, dtype=float)
        n = self.n
        H = np.zeros(x.shape[:-1] + (2 * n, 2 * n))
        H[..., :n, :n] = -self.delta * self.g.hess(x)
        H[..., n:, n:] = 2.0 * np.eye(n)
        return self.orientation * H

    def params(self) -> dict:
        return {"kind": self.kind, "delta": self.delta, "n": self.n, "orientation": self.orientation,
                "g": [[list(k), [c.real, c.imag]] for k, c in self.g.terms]}


# --------------------------------------------------------------------------
# pointwise geometry
# --------------------------------------------------------------------------

def normal(spec, p: TubePoint) -> np.ndarray:
    g = spec.grad(p.x, p.xi)
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    if np.any(norm < 1e-12):
        raise ValueError("grad F vanishes on the hypersurface")
    return g / norm


def j_normal(spec, p: TubePoint) -> np.ndarray:
    return apply_J(normal(spec, p))


def angles(spec, p: TubePoint):
    """(theta, phi) with cos theta = <grad rho, nu>/|grad rho|, cos phi = <grad rho, J nu>/|grad rho|."""
    gr = grad_rho(p)
    m = np.linalg.norm(gr, axis=-1)
    if np.any(m == 0):
        raise ValueError("angles are undefined on the zero section")
    nu = normal(spec, p)
    X = apply_J(nu)
    ct = np.clip(np.sum(gr * nu, -1) / m, -1, 1)
    cp = np.clip(np.sum(gr * X, -1) / m, -1, 1)
    return np.arccos(ct), np.arccos(cp)


def mean_curvature(spec, p: TubePoint) -> np.ndarray:
    """H = div(grad F / |grad F|)."""
    g = spec.grad(p.x, p.xi)
    Hs = spec.hess(p.x, p.xi)
    m = np.linalg.norm(g, axis=-1)
    lap = np.trace(Hs, axis1=-2, axis2=-1)
    quad = np.einsum("...i,...ij,...j->...", g, Hs, g)
    return lap / m - quad / m**3


def admissible_check(theta, phi):
    """Membership of (theta, phi) in the diamond with corners (pi/2, 0), (0, pi/2), (pi/2, pi), (pi, pi/2)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    tol = 1e-12
    lower = np.where(theta <= np.pi / 2, np.pi / 2 - theta, theta - np.pi / 2)
    upper = np.where(theta <= np.pi / 2, np.pi / 2 + theta, 3 * np.pi / 2 - theta)
    return (phi >= lower - tol) & (phi <= upper + tol)


def f_value(theta, phi):
    """Potential term cos^2 theta - 2 + cos^2 phi + sin theta of the Cauchy operator."""
    return np.cos(theta) ** 2 - 2.0 + np.cos(phi) ** 2 + np.sin(theta)


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------

def _csv_dump(path, cols: dict):
    names = list(cols)
    data = np.column_stack([np.asarray(cols[k], dtype=float) for k in names])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17e}" for v in row) + "\n")


@dataclass(eq=False)
class SurfaceGrid:
    """Quadrature nodes on Sigma with d sigma weights and frame data."""

    spec: object
    x: np.ndarray
    xi: np.ndarray
    weights: np.ndarray
    nu: np.ndarray = None
    X: np.ndarray = None
    theta: np.ndarray = None
    phi: np.ndarray = None
    H: np.ndarray = None
    grad_norm: np.ndarray = None

    def __post_init__(self):
        p = self.point
        self.nu = normal(self.spec, p)
        self.X = apply_J(self.nu)
        self.grad_norm = np.linalg.norm(self.spec.grad(self.x, self.xi), axis=-1)
        self.H = mean_curvature(self.spec, p)
        with np.errstate(invalid="ignore", divide="ignore"):
            gr = grad_rho(p)
            m = np.linalg.norm(gr, axis=-1)
            self.theta = np.arccos(np.clip(np.sum(gr * self.nu, -1) / m, -1, 1))
            self.phi = np.arccos(np.clip(np.sum(gr * self.X, -1) / m, -1, 1))

    @property
    def point(self) -> TubePoint:
        return TubePoint(self.x, self.xi)

    @property
    def size(self) -> int:
        return len(self.weights)

    def area(self) -> float:
        return float(self.weights.sum())

    def residual(self) -> float:
        return float(np.abs(self.spec.F(self.x, self.xi)).max())

    def columns(self) -> dict:
        n = self.x.shape[1]
        cols = {}
        for j in range(n):
            cols[f"x{j + 1}"] = self.x[:, j]
        for j in range(n):
            cols[f"xi{j + 1}"] = self.xi[:, j]
        cols["weight"] = self.weights
        for j in range(2 * n):
            cols[f"nu{j + 1}"] = self.nu[:, j]
        for j in range(2 * n):
            cols[f"X{j + 1}"] = self.X[:, j]
        cols["theta"] = self.theta
        cols["phi"] = self.phi
        return cols

    def to_csv(self, path) -> None:
        _csv_dump(path, self.columns())


@dataclass(eq=False)
class EnergyCurveGrid(SurfaceGrid):
    """Nodes on Sigma cap S*M with weights of the induced Liouville measure."""

    def total_measure(self) -> float:
        return float(self.weights.sum())

    def residual(self) -> float:
        return float(max(np.abs(self.spec.F(self.x, self.xi)).max(),
                         np.abs(np.linalg.norm(self.xi, axis=-1) - 1).max()))


def _default_nx(h, bandwidth):
    base = 16 if h is None else int(np.ceil(2.0 / h)) + 2
    if bandwidth is not None:
        base = 2 * int(bandwidth) + 2
    return max(base, 4)


def _angles_for(h, nangle):
    # trapezoid in the angle is spectrally accurate once the step is below ~sqrt(h)/2
    if nangle:
        return nangle
    return 64 if h is None else max(64, int(np.ceil(4 * PERIOD / np.sqrt(h))))


def surface_grid_blocks(spec, tau: float = TAU_DEFAULT, h: float | None = None, nx: int | None = None,
                        nangle: int | None = None, order: int = 8, x_bandwidth: int | None = None,
                        max_nodes: int = 250_000):
    """Yield the quadrature of :func:`surface_grid` as a sequence of smaller grids.

    Blocks split the periodic x directions, so memory stays bounded for
    fine grids; summing any integral over the blocks equals the full rule.
    """
    n = spec.n
    if spec.kind in ("vertical", "tilted"):
        xi, wxi, _ = xi_quadrature(n, tau, h, order=order, nangle=_angles_for(h, nangle))
        others = [j for j in range(n) if j != spec.axis]
        if others:
            N = nx or _default_nx(h, x_bandwidth)
            xo, wo = periodic_nodes(N)
        else:
            xo, wo = np.zeros(1), np.ones(1)
        per = max(1, max_nodes // len(wxi))
        scale = np.sqrt(1.0 + spec.avec @ spec.avec) if spec.kind == "tilted" else 1.0
        for s0 in range(0, len(xo), per):
            xb, wb = xo[s0:s0 + per], wo[s0:s0 + per]
            XI = np.tile(xi, (len(xb), 1))
            W = np.outer(wb, wxi).ravel() * scale
            x = np.zeros((len(W), n))
            if others:
                x[:, others[0]] = np.repeat(xb, len(wxi))
            if spec.kind == "vertical":
                x[:, spec.axis] = spec.c
            else:
                x[:, spec.axis] = XI @ spec.avec + spec.c
            yield SurfaceGrid(spec, x, XI, W)
        return
    if spec.kind == "tubegraph":
        bw = x_bandwidth
        if bw is None and h is not None:
            bw = int(np.ceil(2.0 / h))
        N = nx or max(_default_nx(h, bw), int(np.ceil(8 * PERIOD * abs(spec.delta) / np.sqrt(h or 1.0))))
        xs, wx = periodic_nodes(N)
        if n == 1:
            x = np.concatenate([xs, xs])[:, None]
            r = spec.radius(x)
            omega = np.concatenate([np.ones(N), -np.ones(N)])[:, None]
            dr = spec.delta * spec.g.grad(x) / (2 * r[:, None])
            W = np.concatenate([wx, wx]) * np.sqrt(1 + np.sum(dr**2, -1))
            blocks = [(x, r[:, None] * omega, W)]
        else:
            psi, wpsi = periodic_nodes(_angles_for(h, nangle))
            per = max(1, max_nodes // (N * len(psi)))
            blocks = []

            def make(rows):
                X1, X2, P = np.meshgrid(xs[rows], xs, psi, indexing="ij")
                x = np.stack([X1.ravel(), X2.ravel()], axis=-1)
                r = spec.radius(x)
                dr = spec.delta * spec.g.grad(x) / (2 * r[:, None])
                omega = np.stack([np.cos(P.ravel()), np.sin(P.ravel())], axis=-1)
                W = (wx[rows][:, None, None] * wx[None, :, None] * wpsi[None, None, :]).ravel()
                return x, r[:, None] * omega, W * r * np.sqrt(1 + np.sum(dr**2, -1))

            blocks = (make(slice(s0, s0 + per)) for s0 in range(0, N, per))
        for x, xi, W in blocks:
            if np.any(np.linalg.norm(xi, axis=-1) >= tau):
                raise ChartError("tube graph leaves the tube of radius tau")
            yield SurfaceGrid(spec, x, xi, W)
        return
    raise ChartError(f"unknown hypersurface kind {spec.kind}")


def surface_grid(spec, tau: float = TAU_DEFAULT, h: float | None = None, nx: int | None = None,
                 nangle: int | None = None, order: int = 8, x_bandwidth: int | None = None) -> SurfaceGrid:
    """Tensor quadrature on Sigma inside the tube.

    ``h`` refines radial panels near the unit shell and angular resolution to
    the sqrt(h) scale.  ``x_bandwidth`` bounds the x-frequencies of the
    integrand (e.g. 2 max|k| for |Tu|^2); periodic directions then use
    ``2*x_bandwidth + 2`` trapezoid nodes, exact for such integrands.
    """
    parts = list(surface_grid_blocks(spec, tau, h, nx, nangle, order, x_bandwidth, max_nodes=2**62))
    if len(parts) == 1:
        return parts[0]
    return SurfaceGrid(spec, np.concatenate([p.x for p in parts]), np.concatenate([p.xi for p in parts]),
                       np.concatenate([p.weights for p in parts]))


def _zero_set_graph(g: TrigPolynomial, nx: int, nscan: int = 4096):
    """Zero set of g on T^2 as graphs x1 = s_i(x2); returns (x1 roots, x2 nodes)."""
    x2, w2 = periodic_nodes(nx)
    scan = np.arange(nscan) * PERIOD / nscan
    roots, nodes, counts = [], [], []
    for t in x2:
        f = lambda s: float(g.value(np.array([s, t])))
        vals = g.value(np.stack([scan, np.full_like(scan, t)], -1))
        nxt = np.roll(vals, -1)
        idx = np.nonzero(np.sign(vals) != np.sign(nxt))[0]
        found = []
        for i in idx:
            a, b = scan[i], scan[i] + PERIOD / nscan
            if vals[i] == 0:
                found.append(a)
                continue
            found.append(brentq(f, a, b, xtol=1e-15, rtol=1e-15))
        counts.append(len(found))
        roots.extend(found)
        nodes.extend([t] * len(found))
    if len(set(counts)) > 1:
        raise ChartError("zero set of g is not a graph over x2 on this grid")
    return np.array(roots), np.array(nodes), w2[0]


def intersect_sphere_bundle(spec, resolution: int = 64) -> EnergyCurveGrid:
    """Sigma cap S*M with weights (Riemannian measure) / |P_{TS*M} nu|.

    On S*M the unit normal of the shell is (0; xi), so the projected normal
    has length sin(theta).
    """
    n = spec.n
    if spec.kind == "tubegraph" and spec.delta == 0:
        raise ChartError("delta = 0 gives Sigma = S*M (degenerate intersection)")
    if n == 1:
        if spec.kind == "vertical":
            xi = np.array([[1.0], [-1.0]])
            x = np.full((2, 1), spec.c)
        elif spec.kind == "tilted":
            xi = np.array([[1.0], [-1.0]])
            x = xi * spec.avec[0] + spec.c
        else:
            x0, _, _ = _roots_1d(spec.g)
            x = np.repeat(x0, 2)[:, None]
            xi = np.tile([1.0, -1.0], len(x0))[:, None]
        dl = np.ones(len(x))
    else:
        psi, wpsi = periodic_nodes(resolution)
        omega = np.stack([np.cos(psi), np.sin(psi)], axis=-1)
        if spec.kind in ("vertical", "tilted"):
            other = 1 - spec.axis
            xo, wo = periodic_nodes(resolution)
            XO = np.repeat(xo, resolution)
            xi = np.tile(omega, (resolution, 1))
            x = np.zeros((len(XO), 2))
            x[:, other] = XO
            dl = np.outer(wo, wpsi).ravel()
            if spec.kind == "vertical":
                x[:, spec.axis] = spec.c
            else:
                x[:, spec.axis] = xi @ spec.avec + spec.c
                operp = np.stack([-xi[:, 1], xi[:, 0]], -1)
                dl = dl * np.sqrt(1 + (operp @ spec.avec) ** 2)
        else:
            r1, r2, dx2 = _zero_set_graph(spec.g, resolution)
            xz = np.stack([r1, r2], -1)
            gg = spec.g.grad(xz)
            if np.any(np.abs(gg[:, 0]) < 1e-10):
                raise ChartError("zero set of g has a vertical tangent")
            arc = np.linalg.norm(gg, axis=-1) / np.abs(gg[:, 0]) * dx2
            x = np.repeat(xz, resolution, axis=0)
            xi = np.tile(omega, (len(xz), 1))
            dl = np.outer(arc, wpsi).ravel()
    grid = EnergyCurveGrid(spec, x, xi, dl)
    s = np.sin(grid.theta)
    if np.any(s < TANGENCY_TOL):
        raise ChartError("Sigma is tangent to S*M somewhere on the intersection")
    grid.weights = dl / s
    return grid


def _roots_1d(g: TrigPolynomial, nscan: int = 4096):
    scan = np.arange(nscan) * PERIOD / nscan
    vals = g.value(scan[:, None])
    nxt = np.roll(vals, -1)
    idx = np.nonzero(np.sign(vals) != np.sign(nxt))[0]
    f = lambda s: float(g.value(np.array([s])))
    roots = np.array([brentq(f, scan[i], scan[i] + PERIOD / nscan, xtol=1e-15) for i in idx])
    return roots, None, None


def condition_a_check(spec, tol: float = 1e-6, resolution: int = 64):
    """Sigma never meets S*M orthogonally: min |cos theta| over the intersection exceeds tol."""
    grid = intersect_sphere_bundle(spec, resolution)
    if grid.size == 0:
        raise ChartError("empty intersection")
    margin = float(np.abs(np.cos(grid.theta)).min())
    return margin > tol, margin


def local_condition_check(spec, delta: float, resolution: int = 64) -> bool:
    """(theta, phi) stays more than delta away from both corners (pi/2, 0) and (pi/2, pi)."""
    grid = intersect_sphere_bundle(spec, resolution)
    d0 = np.hypot(grid.theta - np.pi / 2, grid.phi)
    d1 = np.hypot(grid.theta - np.pi / 2, grid.phi - np.pi)
    return bool(min(d0.min(), d1.min()) > delta)


def tangential_laplacian(spec, p: TubePoint, f) -> np.ndarray:
    """Intrinsic Laplacian on Sigma: Delta f - Hess f(nu, nu) - H d_nu f.

    ``f`` is a :class:`Jet` at ``p``, a ModeSum (its weighted continuation
    exp(-rho/h) u^C is used) or a callable returning a Jet.
    """
    if isinstance(f, ModeSum):
        J = jet(f, p, weighted=True)
    elif isinstance(f, Jet):
        J = f
    elif callable(f):
        J = f(p)
    else:
        raise TypeError(f"unsupported field type {type(f).__name__}")
    nu = normal(spec, p)
    H = mean_curvature(spec, p)
    val = J.laplacian() - J.second(nu, nu) - H * J.directional(nu)
    return np.exp(J.log_scale) * val


def sample_nodes(spec, rng: np.random.Generator, count: int, tau: float = TAU_DEFAULT,
                 rmin: float = 0.2, rmax: float | None = None) -> TubePoint:
    """Random points on Sigma inside the tube (momentum radius in [rmin, rmax] where free)."""
    n = spec.n
    rmax = rmax if rmax is not None else 0.9 * tau
    x = rng.uniform(0, PERIOD, size=(count, n))
    if spec.kind == "tubegraph":
        r = spec.radius(x)
        v = rng.standard_normal((count, n))
        xi = r[:, None] * v / np.linalg.norm(v, axis=-1, keepdims=True)
        return TubePoint(x, xi)
    v = rng.standard_normal((count, n))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    xi = v * rng.uniform(rmin, rmax, size=(count, 1))
    if spec.kind == "vertical":
        x[:, spec.axis] = spec.c
    else:
        x[:, spec.axis] = xi @ spec.avec + spec.c
    return TubePoint(x, xi)


_CATALOG = {"vertical": Vertical, "tilted": Tilted, "tubegraph": TubeGraph}


def hypersurface_from_dict(d: dict):
    """Build a catalog member from its ``params()`` form; unknown keys are rejected."""
    d = dict(d)
    if "kind" not in d:
        raise ValueError("hypersurface: missing field 'kind'")
    kind = d.pop("kind")
    if kind not in _CATALOG:
        raise ValueError(f"hypersurface: unknown kind {kind!r} (choose from {sorted(_CATALOG)})")
    cls = _CATALOG[kind]
    allowed = set(cls.__dataclass_fields__)
    extra = set(d) - allowed
    if extra:
        raise ValueError(f"hypersurface: unknown field(s) {sorted(extra)} for kind {kind!r}")
    if kind == "tilted" and "a" in d:
        d["a"] = tuple(float(v) for v in d["a"])
    if kind == "tubegraph" and "g" in d:
        d["g"] = TrigPolynomial(tuple((tuple(int(v) for v in k), complex(c[0], c[1])) for k, c in d["g"]))
    return cls(**d)
