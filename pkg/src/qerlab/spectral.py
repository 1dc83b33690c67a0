"""Lattice-mode eigenfunctions on the flat circle/torus.

A :class:`ModeSum` is ``u(x) = sum_k c_k exp(i<k, x>)`` with every ``|k| = 1/h``.
Its holomorphic continuation to the tube is

    u^C(x, xi) = sum_k c_k exp(i<k, x - i xi>) = sum_k c_k exp(i<k,x> + <k,xi>),

which grows like ``exp(|xi|/h)``.  All evaluation routes go through the
per-term complex exponents so magnitudes can be shifted before
exponentiating (log-space bookkeeping).
"""
from __future__ import annotations

import itertools
import math
import logging
from dataclasses import dataclass

import numpy as np

from .geometry import PERIOD, TubePoint

__all__ = [
    "ModeSum",
    "Jet",
    "EnsembleSpec",
    "eval_u",
    "eval_u_complex",
    "log_eval_u_complex",
    "jet",
    "eval_derivative",
    "shell_points",
    "make_shell_ensemble",
    "parseval_norm",
]

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ModeSum:
    """Finite lattice sum in a single eigenspace.

    ``antiholomorphic=True`` builds the probe ``sum c exp(i<k, x + i xi>)``,
    used only as a negative control for holomorphy checks.
    """

    h: float
    ks: np.ndarray
    cs: np.ndarray
    antiholomorphic: bool = False
    check_shell: bool = True

    def __post_init__(self):
        ks = np.atleast_2d(np.asarray(self.ks, dtype=int))
        cs = np.atleast_1d(np.asarray(self.cs, dtype=complex))
        if ks.shape[0] != cs.shape[0]:
            raise ValueError("need one coefficient per lattice vector")
        if ks.shape[1] not in (1, 2):
            raise ValueError("lattice vectors must have 1 or 2 components")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.check_shell:
            norms = np.linalg.norm(ks, axis=1) * self.h
            if not np.allclose(norms, 1.0, rtol=0, atol=1e-12):
                raise ValueError(f"|k| h must equal 1 for every term, got {norms}")
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "cs", cs)

    @classmethod
    def single(cls, k, c=1.0, h=None, **kw) -> "ModeSum":
        k = np.atleast_1d(np.asarray(k, dtype=int))
        if h is None:
            h = 1.0 / np.linalg.norm(k)
        return cls(h, k[None, :], np.array([c], dtype=complex), **kw)

    @property
    def n(self) -> int:
        return self.ks.shape[1]

    @property
    def sign(self) -> int:
        return -1 if self.antiholomorphic else 1

    def normalized(self) -> "ModeSum":
        norm = np.sqrt(PERIOD**self.n * np.sum(np.abs(self.cs) ** 2))
        if norm == 0:
            raise ValueError("cannot normalize the zero function")
        return ModeSum(self.h, self.ks, self.cs / norm, self.antiholomorphic, self.check_shell)

    def conjugate_probe(self) -> "ModeSum":
        return ModeSum(self.h, self.ks, self.cs, not self.antiholomorphic, self.check_shell)

    def l2_norm(self) -> float:
        return float(np.sqrt(PERIOD**self.n * np.sum(np.abs(self.cs) ** 2)))


def _coords(p, n):
    if isinstance(p, TubePoint):
        return p.x, p.xi
    x = np.asarray(p, dtype=float)
    return x, np.zeros_like(x)


def eval_u(u: ModeSum, x) -> np.ndarray:
    """u(x) on M; ``x`` has shape (..., n)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phase = np.tensordot(x, u.ks.T, axes=([-1], [0]))
    return np.exp(1j * phase) @ u.cs


def _exponents(u: ModeSum, x, xi, weighted: bool):
    """Per-term exponents E with term_k = c_k exp(E_k); shape (..., m)."""
    kx = np.tensordot(x, u.ks.T, axes=([-1], [0]))
    kxi = np.tensordot(xi, u.ks.T, axes=([-1], [0]))
    E = 1j * kx + u.sign * kxi
    if weighted:
        E = E - (0.5 / u.h) * np.sum(xi * xi, axis=-1)[..., None]
    return E


def log_eval_u_complex(u: ModeSum, p, weighted: bool = False) -> np.ndarray:
    """Complex logarithm of u^C (or of exp(-rho/h) u^C): log|.| + i arg."""
    x, xi = p.x, p.xi
    E = _exponents(u, x, xi, weighted)
    shift = E.real.max(axis=-1, keepdims=True)
    s = np.exp(E - shift) @ u.cs
    with np.errstate(divide="ignore"):
        return shift[..., 0] + np.log(s)


def eval_u_complex(u: ModeSum, p) -> np.ndarray:
    """Holomorphic continuation u^C at tube points (may overflow for huge |k||xi|)."""
    return np.exp(log_eval_u_complex(u, p))


@dataclass
class Jet:
    """Second-order jet of a ModeSum-generated function at a batch of points.

    The true value is ``exp(log_scale) * value`` (same for grad, hess); all
    entries of one point share the scale so ratios never overflow.
    Derivatives are ordered as ``(x_1..x_n, xi_1..xi_n)``.
    """

    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    log_scale: np.ndarray

    def directional(self, v) -> np.ndarray:
        return np.einsum("...i,...i->...", self.grad, v)

    def second(self, v, w) -> np.ndarray:
        return np.einsum("...ij,...i,...j->...", self.hess, v, w)

    def laplacian(self) -> np.ndarray:
        return np.trace(self.hess, axis1=-2, axis2=-1)


def jet(u: ModeSum, p: TubePoint, weighted: bool = False, shift=None) -> Jet:
    """Exact value, gradient and Hessian of u^C or exp(-rho/h) u^C.

    ``shift`` overrides the per-point log scale (e.g. ``1/(2h)`` for weighted
    quantities, whose exponent never exceeds that value).
    """
    x, xi = p.x, p.xi
    n = u.n
    E = _exponents(u, x, xi, weighted)
    if shift is None:
        scale = E.real.max(axis=-1)
    else:
        scale = np.broadcast_to(np.asarray(shift, dtype=float), E.shape[:-1])
    terms = np.exp(E - scale[..., None]) * u.cs
    # per-term gradient of the exponent: (i k ; s k - weighted xi/h)
    k = u.ks.astype(float)
    gx = np.broadcast_to(1j * k, E.shape + (n,))
    gxi = np.broadcast_to(u.sign * k + 0j, E.shape + (n,))
    if weighted:
        gxi = gxi - (xi / u.h)[..., None, :]
    g = np.concatenate([gx, gxi], axis=-1)
    value = terms.sum(axis=-1)
    grad = np.einsum("...m,...mi->...i", terms, g)
    hess = np.einsum("...m,...mi,...mj->...ij", terms, g, g)
    if weighted:
        idx = np.arange(n, 2 * n)
        hess[..., idx, idx] -= value[..., None] / u.h
    return Jet(value, grad, hess, np.asarray(scale, dtype=float))


def eval_derivative(u: ModeSum, p: TubePoint, alpha, weighted: bool = False):
    """Partial derivative of u^C (or of exp(-rho/h)u^C) for |alpha| <= 2.

    ``alpha`` is a multi-index of length 2n over (x, xi).
    """
    alpha = np.asarray(alpha, dtype=int)
    if alpha.shape != (2 * u.n,) or np.any(alpha < 0):
        raise ValueError(f"multi-index must have {2 * u.n} non-negative entries")
    order = int(alpha.sum())
    if order > 2:
        raise ValueError(f"unsupported derivative order {order}")
    J = jet(u, p, weighted)
    scale = np.exp(J.log_scale)
    if order == 0:
        return scale * J.value
    idx = np.repeat(np.arange(2 * u.n), alpha)
    if order == 1:
        return scale * J.grad[..., idx[0]]
    return scale * J.hess[..., idx[0], idx[1]]


def parseval_norm(u: ModeSum, npts: int | None = None) -> float:
    """L2(M) norm by the trapezoid rule on a grid finer than Nyquist."""
    kmax = int(np.abs(u.ks).max()) if u.ks.size else 0
    npts = npts or 2 * kmax + 4
    g = np.arange(npts) * PERIOD / npts
    mesh = np.stack(np.meshgrid(*([g] * u.n), indexing="ij"), axis=-1)
    vals = eval_u(u, mesh)
    return float(np.sqrt(np.sum(np.abs(vals) ** 2) * (PERIOD / npts) ** u.n))


def shell_points(r2: int, n: int) -> np.ndarray:
    """All integer vectors with |k|^2 = r2, sorted lexicographically."""
    r = math.isqrt(int(r2))
    rng = range(-r, r + 1)
    pts = [k for k in itertools.product(rng, repeat=n) if sum(c * c for c in k) == r2]
    return np.array(sorted(pts), dtype=int).reshape(-1, n)


@dataclass(frozen=True)
class EnsembleSpec:
    """Random normalized mode sums on one lattice shell (QE surrogate)."""

    r2: int
    draws: int
    seed: int = 0
    n: int = 2
    min_points: int = 8


def make_shell_ensemble(spec: EnsembleSpec) -> list[ModeSum]:
    """Coefficients uniform on the complex unit sphere, one Philox stream per draw."""
    ks = shell_points(spec.r2, spec.n)
    need = 2 if spec.n == 1 else spec.min_points
    if len(ks) < need:
        raise ValueError(f"shell |k|^2={spec.r2} has only {len(ks)} lattice points (need {need})")
    h = 1.0 / np.sqrt(spec.r2)
    children = np.random.SeedSequence(spec.seed).spawn(spec.draws)
    out = []
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        c = rng.standard_normal(len(ks)) + 1j * rng.standard_normal(len(ks))
        out.append(ModeSum(h, ks, c).normalized())
    LOGGER.debug("ensemble r2=%d: %d points, %d draws", spec.r2, len(ks), spec.draws)
    return out
