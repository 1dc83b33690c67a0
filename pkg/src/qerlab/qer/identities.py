"""Pointwise identities on a hypersurface, checked with exact jets.

Conventions: z = x - i xi and J d/dx = d/dxi.  With these, the holomorphic
continuation obeys ``X u^C = -i d_nu u^C`` for X = J nu, and the transform
satisfies

    -h d_nu (Tu) = (-i h X + d_nu rho - i X rho) Tu.

``literal=True`` switches every check to the sign pattern as usually
displayed (``+ihX``, ``X u = +i d_nu u``, ``sin theta``) so the difference
can be observed numerically.
"""
from __future__ import annotations

import numpy as np

from ..geometry import TubePoint, grad_rho
from ..hypersurface import normal
from ..geometry import apply_J
from ..spectral import ModeSum, jet

__all__ = ["r_identity_residual", "cr_residual", "y_decomposition_residual", "y_commutator_closed_form"]


def _frame(spec, p):
    nu = normal(spec, p)
    X = apply_J(nu)
    gr = grad_rho(p)
    return nu, X, gr


def r_identity_residual(u: ModeSum, spec, p: TubePoint, literal: bool = False) -> np.ndarray:
    """|-h d_nu Tu - R Tu| / |Tu| at nodes of Sigma."""
    h = u.h
    nu, X, gr = _frame(spec, p)
    J = jet(u, p, weighted=True)
    lhs = -h * J.directional(nu)
    sgn = 1.0 if literal else -1.0
    rhs = sgn * 1j * h * J.directional(X) + (np.sum(gr * nu, -1) - 1j * np.sum(gr * X, -1)) * J.value
    return np.abs(lhs - rhs) / np.abs(J.value)


def cr_residual(u: ModeSum, spec, p: TubePoint, literal: bool = False) -> np.ndarray:
    """|X u^C + i d_nu u^C| relative to h^-1 |u^C| (the size of one derivative)."""
    nu, X, _ = _frame(spec, p)
    J = jet(u, p)
    sgn = -1.0 if literal else 1.0
    res = J.directional(X) + sgn * 1j * J.directional(nu)
    return u.h * np.abs(res) / np.abs(J.value)


def y_commutator_closed_form(spec, p: TubePoint, h: float, literal: bool = False) -> np.ndarray:
    """Y(e^{-rho/h}) / e^{-rho/h} for Y = -<grad rho, nu> i X + (grad rho)^T."""
    nu, X, gr = _frame(spec, p)
    m = np.linalg.norm(gr, axis=-1)
    cos_t = np.sum(gr * nu, -1) / m
    cos_p = np.sum(gr * X, -1) / m
    sin_t = np.sqrt(np.clip(1 - cos_t**2, 0, None))
    tang = sin_t if literal else sin_t**2
    return (1j / h) * m**2 * cos_t * cos_p - (1.0 / h) * m**2 * tang


def y_decomposition_residual(u: ModeSum, spec, p: TubePoint, h: float | None = None,
                             literal: bool = False) -> np.ndarray:
    """Check [Y, e^{-rho/h}] u^C = Y(e^{-rho/h}) u^C against the closed form.

    Both sides are formed from exact jets of u^C and of e^{-rho/h} u^C taken
    on a common log scale; the residual is relative to |w| (1 + |grad rho|^2)/h.
    """
    h = u.h if h is None else h
    uh = u if h == u.h else ModeSum(h, u.ks, u.cs, u.antiholomorphic, check_shell=False)
    nu, X, gr = _frame(spec, p)
    rho = 0.5 * np.sum(p.xi**2, -1)
    Ju = jet(uh, p)
    Jw = jet(uh, p, weighted=True, shift=Ju.log_scale - rho / h)
    gn = np.sum(gr * nu, -1)
    gt = gr - gn[..., None] * nu

    def Y(J):
        return -gn * 1j * J.directional(X) + J.directional(gt)

    commutator = Y(Jw) - Y(Ju)
    expected = y_commutator_closed_form(spec, p, h, literal) * Jw.value
    scale = np.abs(Jw.value) * (1 + np.sum(gr**2, -1)) / h
    return np.abs(commutator - expected) / scale
