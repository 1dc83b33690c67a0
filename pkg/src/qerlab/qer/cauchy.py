"""Cauchy-data functional of e^{-rho/h} u^C on a hypersurface, and restriction norms.

Every quantity of size e^{1/h} is returned as a complex mantissa together
with ``log_scale``; the true value is ``exp(log_scale) * mantissa``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..geometry import TAU_DEFAULT, TubePoint
from ..hypersurface import SurfaceGrid, surface_grid_blocks
from ..fbi import log_eval_T
from ..spectral import ModeSum, _exponents, jet, log_eval_u_complex

__all__ = [
    "CauchyData", "x_bandwidth", "grid_for", "cauchy_lhs",
    "log_restriction_norm", "restriction_norm", "log_weighted_norm", "weighted_norm",
    "ModeForms", "mode_forms",
]

CHUNK = 20_000


def x_bandwidth(u: ModeSum, extra: int = 0) -> int:
    """Largest x-frequency of |u|^2-type products, plus ``extra`` for the test function."""
    d = np.abs(u.ks[:, None, :] - u.ks[None, :, :]).max()
    return int(d) + int(extra)


def grid_for(u: ModeSum, spec, tau: float = TAU_DEFAULT, extra_bandwidth: int = 0, **kw):
    """Quadrature blocks on Sigma resolving |T u|^2 and its derivatives exactly in x."""
    return surface_grid_blocks(spec, tau=tau, h=u.h, x_bandwidth=x_bandwidth(u, extra_bandwidth), **kw)


@dataclass
class _Piece:
    weights: np.ndarray
    p: TubePoint
    nu: np.ndarray
    H: np.ndarray


def _chunks(grid):
    """Iterate a SurfaceGrid (or an iterable of them) in bounded pieces."""
    blocks = [grid] if isinstance(grid, SurfaceGrid) else grid
    for g in blocks:
        for s in range(0, g.size, CHUNK):
            sl = slice(s, s + CHUNK)
            yield _Piece(g.weights[sl], TubePoint(g.x[sl], g.xi[sl]), g.nu[sl], g.H[sl])


def _norm_log(n: int, h: float, normalized: bool) -> float:
    # |h^{-n/4}|^2 from the heat normalization
    return -0.5 * n * np.log(h) if normalized else 0.0


@dataclass
class CauchyData:
    term1: complex
    term2: complex
    log_scale: float
    h: float

    @property
    def total(self) -> complex:
        return self.term1 + self.term2

    @property
    def scaled(self) -> complex:
        """(term1 + term2) e^{-1/h}, i.e. the mantissa when log_scale carries only 1/h."""
        return self.total * np.exp(self.log_scale - 1.0 / self.h)

    def log_abs(self, which: str) -> float:
        v = {"term1": self.term1, "term2": self.term2, "total": self.total}[which]
        return float(np.log(abs(v)) + self.log_scale) if v != 0 else -np.inf


def cauchy_lhs(u: ModeSum, spec, a, grid=None, tau: float = TAU_DEFAULT, normalized: bool = True,
               a_bandwidth: int = 0) -> CauchyData:
    """Tangential and Neumann pairings of w = e^{-rho/h} u^C over Sigma.

    term1 = <a (h^2 Lap_Sigma + 2h grad rho + h Lap rho) w, w>,
    term2 = <a h d_nu w, h d_nu w>.

    ``a(x, xi)`` is evaluated at the grid nodes; ``normalized`` multiplies
    both terms by h^{-n/2} (the squared heat normalization).
    """
    h, n = u.h, u.n
    if grid is None:
        grid = grid_for(u, spec, tau, a_bandwidth)
    lap_rho = float(n)  # trace of the identity Hessian of |xi|^2/2 on a flat chart
    assert lap_rho == n
    t1 = t2 = 0.0 + 0.0j
    for pc in _chunks(grid):
        p = pc.p
        av = np.broadcast_to(np.asarray(a(p.x, p.xi), dtype=complex), (len(p.x),))
        if not np.any(av):
            continue
        J = jet(u, p, weighted=True, shift=0.5 / h)
        nu, H, wts = pc.nu, pc.H, pc.weights
        dnu = J.directional(nu)
        lap_s = J.laplacian() - J.second(nu, nu) - H * dnu
        grho = np.concatenate([np.zeros_like(p.xi), p.xi], axis=-1)
        op = h * h * lap_s + 2 * h * J.directional(grho) + h * lap_rho * J.value
        t1 += np.sum(wts * av * op * np.conj(J.value))
        t2 += np.sum(wts * av * np.abs(h * dnu) ** 2)
    return CauchyData(complex(t1), complex(t2), 1.0 / h + _norm_log(n, h, normalized), h)


def _log_integral(grid, log_density) -> float:
    parts = [logsumexp(2 * log_density(pc.p).real, b=pc.weights) for pc in _chunks(grid)]
    return float(logsumexp(parts))


def log_restriction_norm(u: ModeSum, spec, grid=None, tau: float = TAU_DEFAULT, normalized: bool = True) -> float:
    """log ||T_Sigma u||_{L^2(Sigma, d sigma)}, from the transform itself."""
    if grid is None:
        grid = grid_for(u, spec, tau)
    acc = _log_integral(grid, lambda p: log_eval_T(u, p))
    return 0.5 * (acc + _norm_log(u.n, u.h, normalized))


def restriction_norm(u: ModeSum, spec, grid=None, tau: float = TAU_DEFAULT, normalized: bool = True) -> float:
    return float(np.exp(log_restriction_norm(u, spec, grid, tau, normalized)))


def log_weighted_norm(u: ModeSum, spec, grid=None, tau: float = TAU_DEFAULT) -> float:
    """log of the integral of e^{-2 rho/h} |u^C|^2 over Sigma, from u^C directly."""
    if grid is None:
        grid = grid_for(u, spec, tau)
    h = u.h
    return _log_integral(grid, lambda p: log_eval_u_complex(u, p) - 0.5 * np.sum(p.xi**2, -1) / h)


def weighted_norm(u: ModeSum, spec, grid=None, tau: float = TAU_DEFAULT) -> float:
    return float(np.exp(log_weighted_norm(u, spec, grid, tau)))


# --------------------------------------------------------------------------
# sesquilinear forms over a fixed set of lattice modes
# --------------------------------------------------------------------------

@dataclass
class ModeForms:
    """Hermitian-form matrices so that quantities for u = sum c_j e_j are c^H M c.

    ``gram`` gives ||T_Sigma u||^2 (bare transform); ``term1``/``term2``
    give the Cauchy pairings relative to e^{1/h}.  ``norm_log`` is the log of
    the squared heat normalization (0 for the bare transform).
    """

    ks: np.ndarray
    h: float
    gram: np.ndarray
    term1: np.ndarray | None
    term2: np.ndarray | None
    norm_log: float

    def quadratic(self, M, cs) -> complex:
        cs = np.asarray(cs, dtype=complex)
        return complex(np.conj(cs) @ M @ cs)

    def norm(self, cs) -> float:
        return float(np.sqrt(self.quadratic(self.gram, cs).real * np.exp(self.norm_log)))

    def cauchy(self, cs) -> CauchyData:
        return CauchyData(self.quadratic(self.term1, cs), self.quadratic(self.term2, cs),
                          1.0 / self.h + self.norm_log, self.h)


def mode_forms(ks, h: float, spec, a=None, grid=None, tau: float = TAU_DEFAULT,
               normalized: bool = True, a_bandwidth: int = 0) -> ModeForms:
    """Accumulate the Gram matrix (and Cauchy matrices when ``a`` is given) chunk by chunk."""
    ks = np.atleast_2d(np.asarray(ks))
    m, n = ks.shape
    basis = ModeSum(h, ks, np.ones(m, dtype=complex), check_shell=True)
    if grid is None:
        grid = grid_for(basis, spec, tau, a_bandwidth)
    modes = [ModeSum(h, ks[j:j + 1], np.ones(1, dtype=complex)) for j in range(m)]
    G = np.zeros((m, m), dtype=complex)
    M1 = np.zeros((m, m), dtype=complex) if a is not None else None
    M2 = np.zeros((m, m), dtype=complex) if a is not None else None
    for pc in _chunks(grid):
        p, wts = pc.p, pc.weights
        if a is None:
            # values only: exponents of each mode relative to e^{1/2h}
            V = np.exp(_exponents(basis, p.x, p.xi, weighted=True) - 0.5 / h)
            G += np.conj(V).T @ (wts[:, None] * V)
            continue
        jets = [jet(e, p, weighted=True, shift=0.5 / h) for e in modes]
        V = np.stack([J.value for J in jets], -1)
        G += np.conj(V).T @ (wts[:, None] * V)
        av = np.broadcast_to(np.asarray(a(p.x, p.xi), dtype=complex), (len(wts),))
        nu, H = pc.nu, pc.H
        grho = np.concatenate([np.zeros_like(p.xi), p.xi], axis=-1)
        ops, dns = [], []
        for J in jets:
            dnu = J.directional(nu)
            lap_s = J.laplacian() - J.second(nu, nu) - H * dnu
            ops.append(h * h * lap_s + 2 * h * J.directional(grho) + h * n * J.value)
            dns.append(h * dnu)
        O = np.stack(ops, -1)
        D = np.stack(dns, -1)
        aw = (wts * av)[:, None]
        M1 += np.conj(V).T @ (aw * O)
        M2 += np.conj(D).T @ (aw * D)
    return ModeForms(ks, h, G, M1, M2, _norm_log(n, h, normalized))
