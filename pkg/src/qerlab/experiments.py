"""Experiment drivers: one function per experiment kind.

Each driver returns an :class:`Outcome` holding named checks (value, bound,
pass flag), plot-ready tables and, for h-sweeps, a :class:`QERReport`.  The
CLI only dispatches and writes artifacts; the test suite calls the same
drivers.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import fbi
from .fbi import Axis
from .geometry import PERIOD, TAU_DEFAULT, TubePoint
from .hypersurface import (SurfaceGrid, TrigPolynomial, TubeGraph, Tilted, Vertical, admissible_check, condition_a_check,
                           f_value, intersect_sphere_bundle, local_condition_check, sample_nodes)
from .qer import (QSymbol, containment_sweep, cr_residual, density_q, ellipticity_scan,
                  log_restriction_norm, log_weighted_norm, mode_forms, multiplier_residual, qer_rhs,
                  qer_rhs_angular_average, r_identity_residual, scaling_experiment, y_decomposition_residual)
from .qer.scaling import fit_loglog
from .spectral import EnsembleSpec, ModeSum, make_shell_ensemble, shell_points

__all__ = ["Check", "Outcome", "KINDS", "run_kind"]


@dataclass
class Check:
    value: object
    bound: str
    ok: bool


@dataclass
class Outcome:
    kind: str
    checks: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    report: object = None
    fields: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks.values())

    def check(self, name, value, ok, bound=""):
        self.checks[name] = Check(value, bound, bool(ok))

    def failed(self) -> list:
        return [k for k, c in self.checks.items() if not c.ok]


def _const(h):
    return lambda x, xi: np.ones(len(x))


# --------------------------------------------------------------------------
# circle example
# --------------------------------------------------------------------------

def circle_example(h_list=(1 / 10, 1 / 40), resolution: int = 200, tau: float = 3.0, **_) -> Outcome:
    """Closed form of Tu for e^{-ikx} and the location/shape of its semiclassical FT."""
    out = Outcome("circle-example")
    rows_tu, rows_ft = [], []
    for h in h_list:
        k = int(round(1 / h))
        u = ModeSum.single((-k,), 1.0, 1.0 / k)
        x = np.arange(resolution) * PERIOD / resolution
        xi = np.linspace(-TAU_DEFAULT, TAU_DEFAULT, resolution)
        X, XI = np.meshgrid(x, xi, indexing="ij")
        got = fbi.eval_T(u, TubePoint(X[..., None], XI[..., None]))
        ref = np.exp(-k * (XI + 1) ** 2 / 2) * np.exp(-1j * k * X)
        rel = float(np.max(np.abs(got - ref) / np.abs(ref)))
        out.check(f"closed_form_k{k}", rel, rel < 1e-12, "< 1e-12")
        for i in range(0, resolution, max(1, resolution // 20)):
            rows_tu.append({"k": k, "x": X[i, i], "xi": XI[i, i], "re": got[i, i].real, "im": got[i, i].imag})

        # windowed FT: whole period in x, flat-top window covering the Gaussian in xi
        sh = np.sqrt(h)
        xs_grid = np.linspace(-2.0, 2.0, 401)
        xis_grid = np.linspace(-4 * sh, 4 * sh, 201)
        nx = int(np.ceil(PERIOD * 2.0 / (0.5 * np.pi * h)))
        nxi = int(np.ceil(2 * tau * 4 * sh / (0.5 * np.pi * h))) + 1
        axes = (Axis.periodic_cell("x1", nx), Axis.interval("xi1", -tau, tau, nxi))
        for label, uu, target in (("mode", u, -1.0), ("conjugate", ModeSum.single((k,), 1.0, 1.0 / k), 1.0)):
            field_ = fbi.sample_T(uu, axes)
            diag = fbi.semiclassical_FT(field_, [[0.0], [0.0]], [None, tau], [xs_grid, xis_grid], flat=0.8)
            am = diag.argmax()
            dx, dxi = xs_grid[1] - xs_grid[0], xis_grid[1] - xis_grid[0]
            ok = abs(am["x1*"] - target) <= dx + 1e-12 and abs(am["xi1*"]) <= dxi + 1e-12
            out.check(f"peak_{label}_k{k}", [float(am["x1*"]), float(am["xi1*"])], ok,
                      f"within one cell of ({target:+.0f}, 0)")
            if label == "mode":
                out.fields[f"tu_k{k}"] = field_
                amp = diag.amp[0, :, 0, :]
                i_pk = int(np.argmax(amp.max(axis=1)))
                prof = amp[i_pk] / amp[i_pk].max()
                gauss = np.exp(-xis_grid**2 / (2 * h))
                err = float(np.linalg.norm(prof - gauss) / np.linalg.norm(gauss))
                out.check(f"profile_k{k}", err, err < 0.02, "< 0.02 relative L2")
                for s, p_, g_ in zip(xis_grid[::10], prof[::10], gauss[::10]):
                    rows_ft.append({"k": k, "xi_star": s, "profile": p_, "gaussian": g_})
    out.tables["tu"] = rows_tu
    out.tables["ft_profile"] = rows_ft
    return out


# --------------------------------------------------------------------------
# exact identities
# --------------------------------------------------------------------------

_SHELLS = {2: [25, 100, 169, 625, 1600], 1: [4, 25, 100, 400, 1600]}


def _catalog(n):
    if n == 1:
        return [Vertical(axis=0, n=1), Tilted(a=(0.4,), axis=0, n=1), TubeGraph(TrigPolynomial.cos(axis=0, n=1), 0.5, n=1)]
    return [Vertical(axis=0), Vertical(axis=1, c=1.0), Tilted(), Tilted(a=(0.2, -0.5), axis=0), TubeGraph()]


def _random_modesum(rng, n):
    r2 = int(rng.choice(_SHELLS[n]))
    ks = shell_points(r2, n)
    m = int(rng.integers(1, len(ks) + 1))
    sel = ks[rng.choice(len(ks), size=m, replace=False)]
    cs = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return ModeSum(1.0 / np.sqrt(r2), sel, cs).normalized()


def identities(count: int = 1000, seed: int = 0, tau: float = TAU_DEFAULT, **_) -> Outcome:
    """R, CR, Y and weighted-norm identities on random (ModeSum, Sigma, node, h) tuples."""
    out = Outcome("identities")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    worst = {"R": 0.0, "CR": 0.0, "Y": 0.0, "weighted": 0.0}
    literal = {"R": 0.0, "CR": 0.0, "Y": 0.0}
    for _ in range(count):
        n = 2 if rng.uniform() < 0.8 else 1
        u = _random_modesum(rng, n)
        cat = _catalog(n)
        spec = cat[int(rng.integers(len(cat)))]
        p = sample_nodes(spec, rng, 4, tau)
        worst["R"] = max(worst["R"], float(r_identity_residual(u, spec, p).max()))
        worst["CR"] = max(worst["CR"], float(cr_residual(u, spec, p).max()))
        worst["Y"] = max(worst["Y"], float(y_decomposition_residual(u, spec, p).max()))
        literal["R"] = max(literal["R"], float(r_identity_residual(u, spec, p, literal=True).max()))
        literal["CR"] = max(literal["CR"], float(cr_residual(u, spec, p, literal=True).max()))
        literal["Y"] = max(literal["Y"], float(y_decomposition_residual(u, spec, p, literal=True).max()))
        grid = SurfaceGrid(spec, p.x, p.xi, rng.uniform(0.5, 1.5, len(p.x)))
        lw = log_weighted_norm(u, spec, [grid])
        lr = log_restriction_norm(u, spec, [grid], normalized=False)
        worst["weighted"] = max(worst["weighted"], abs(np.expm1(lw - (2 * lr + 1.0 / u.h))))
    for name, v in worst.items():
        out.check(name, v, v < 1e-11, "< 1e-11 relative")
    out.info["displayed_sign_forms"] = literal
    out.info["tuples"] = count
    return out


# --------------------------------------------------------------------------
# f-function geometry
# --------------------------------------------------------------------------

def f_analysis(resolution: int = 2000, **_) -> Outcome:
    """Sign of the potential term on the admissible diamond.

    The grid set {f >= 0} must sit within one cell of the corners
    (pi/2, 0), (pi/2, pi), the corners must be exact zeros, the grid maximum
    next to each corner must approach 0, and a continuous maximization away
    from one-cell balls around the corners must stay negative.
    """
    from scipy.optimize import minimize

    out = Outcome("f-analysis")
    th = np.linspace(0, np.pi, resolution)
    cell = th[1] - th[0]
    T, P = np.meshgrid(th, th, indexing="ij")
    F = f_value(T, P)
    adm = admissible_check(T, P)
    corners = np.array([[np.pi / 2, 0.0], [np.pi / 2, np.pi]])
    dist = np.min(np.hypot(T[..., None] - corners[:, 0], P[..., None] - corners[:, 1]), axis=-1)
    nonneg = adm & (F >= 0)
    far = float(dist[nonneg].max()) if nonneg.any() else 0.0
    out.check("nonneg_set_near_corners", far, far <= np.sqrt(2) * cell, f"<= one cell ({cell:.2e})")
    for i, (t0, p0) in enumerate(corners):
        near = adm & (np.hypot(T - t0, P - p0) <= np.sqrt(2) * cell)
        top = float(F[near].max())
        out.check(f"grid_max_at_corner_{i}", top, -2 * cell <= top <= 0, "in [-2 cell, 0]")
    f0 = float(f_value(np.pi / 2, 0.0))
    f1 = float(f_value(np.pi / 2, np.pi))
    out.check("f_corner_0", f0, f0 == 0.0, "== 0")
    out.check("f_corner_pi", f1, f1 == 0.0, "== 0")

    # continuous maximization on the diamond minus one-cell balls
    r = np.sqrt(2) * cell
    cons = [{"type": "ineq", "fun": lambda v: v[1] - abs(v[0] - np.pi / 2)},
            {"type": "ineq", "fun": lambda v: np.pi - abs(v[0] - np.pi / 2) - v[1]},
            {"type": "ineq", "fun": lambda v: np.min(np.hypot(v[0] - corners[:, 0], v[1] - corners[:, 1])) - r}]
    best = -np.inf
    free = adm & (dist > r)
    starts = np.stack([T[free], P[free]], -1)[np.argsort(F[free])[-8:]]
    for x0 in starts:
        res = minimize(lambda v: -f_value(v[0], v[1]), x0, method="SLSQP", constraints=cons,
                       bounds=[(0, np.pi), (0, np.pi)])
        if all(c["fun"](res.x) >= -1e-12 for c in cons):
            best = max(best, -float(res.fun))
    out.check("continuous_max_off_corners", best, best < 0, "< 0")
    out.info["grid_max_off_corners"] = float(F[free].max())
    out.info["nonneg_grid_points"] = int(nonneg.sum())
    return out


# --------------------------------------------------------------------------
# holomorphy
# --------------------------------------------------------------------------

def holomorphy(count: int = 200, seed: int = 0, tau: float = TAU_DEFAULT, **_) -> Outcome:
    out = Outcome("holomorphy")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    worst, control = 0.0, np.inf
    for _ in range(count):
        n = 2 if rng.uniform() < 0.8 else 1
        u = _random_modesum(rng, n)
        x = rng.uniform(0, PERIOD, (16, n))
        v = rng.standard_normal((16, n))
        xi = v / np.linalg.norm(v, axis=-1, keepdims=True) * rng.uniform(0, 0.95 * tau, (16, 1))
        p = TubePoint(x, xi)
        worst = max(worst, float(fbi.holomorphy_residual(u, p).max()))
        control = min(control, float(fbi.holomorphy_residual(u.conjugate_probe(), p).min()))
    out.check("residual", worst, worst < 1e-12, "< 1e-12")
    out.check("negative_control", control, control > 1e-2, "> 1e-2")
    # the symbol of the conjugated operator vanishes on W
    psi = np.linspace(0, PERIOD, 64, endpoint=False)
    xi = np.stack([np.cos(psi), np.sin(psi)], -1)
    s = float(np.abs(fbi.symbol_P_rho(xi, xi, np.zeros_like(xi))).max())
    out.check("symbol_on_W", s, s < 1e-14, "< 1e-14")
    return out


# --------------------------------------------------------------------------
# wavefront containment
# --------------------------------------------------------------------------

def wavefront(h_list=(1 / 10, 1 / 20, 1 / 40, 1 / 80), tau: float = TAU_DEFAULT, hypersurface=None, **_) -> Outcome:
    """Containment radius of super-threshold FT mass, in the tube and on a vertical slice."""
    out = Outcome("wavefront")
    ks = [tuple(int(round(v / (5 * h))) for v in (3, 4)) for h in h_list]
    spec = hypersurface or Vertical()
    for label, sp in (("W", None), ("W_sigma", spec)):
        fit = containment_sweep(ks, sp, tau)
        out.check(f"exponent_{label}", fit.exponent, 0.4 <= fit.exponent <= 0.6, "in [0.4, 0.6]")
        out.info[f"constant_{label}"] = fit.constant
        for h, r in zip(fit.hs, fit.radii):
            out.tables.setdefault("containment", []).append({"set": label, "h": h, "radius": r,
                                                             "radius_over_sqrt_h": r / np.sqrt(h)})
    return out


# --------------------------------------------------------------------------
# energy localization
# --------------------------------------------------------------------------

def localization(h_list=(1 / 10, 1 / 20, 1 / 40, 1 / 80), eps: float = 0.25, tau: float = TAU_DEFAULT,
                 seed: int = 0, **_) -> Outcome:
    out = Outcome("localization")
    inv = np.array([1 / h for h in h_list])
    logm = np.array([fbi.log_energy_mass_off_shell(ModeSum.single((-int(round(k)),), 1.0, 1 / round(k)), eps, tau)
                     for k in inv])
    fit = stats.linregress(inv, logm)
    out.check("slope_negative", float(fit.slope), fit.slope < 0, "< 0")
    out.check("r_squared", float(fit.rvalue**2), fit.rvalue**2 > 0.99, "> 0.99")
    out.tables["off_shell"] = [{"h": 1 / k, "inv_h": k, "log_mass": m} for k, m in zip(inv, logm)]
    # a torus ensemble member obeys the same law
    tor = [fbi.log_energy_mass_off_shell(make_shell_ensemble(EnsembleSpec(int(round(k)) ** 2, 1, seed))[0], eps, tau)
           for k in inv]
    out.info["torus_slope"] = float(stats.linregress(inv, tor).slope)
    return out


# --------------------------------------------------------------------------
# general position
# --------------------------------------------------------------------------

def general_position(resolution: int = 64, tilts=(0.0, 0.02, 0.05, 0.1, 0.2), **_) -> Outcome:
    out = Outcome("general-position")
    spec = Vertical(axis=0)
    grid = intersect_sphere_bundle(spec, resolution)
    q = density_q(spec, grid.point)
    ref = -15.0 * grid.xi[:, 0] ** 2
    w = grid.weights
    err = float(np.sqrt(np.sum(w * (q - ref) ** 2) / np.sum(w * ref**2)))
    total = qer_rhs(spec, grid=grid)
    out.check("integral_negative", total, total < 0, "< 0")
    out.check("q_matches_minus15_xi1sq", err, err < 0.05, "< 0.05 relative L2")
    out.info["integral_reference"] = -15 * np.pi * PERIOD
    vals = []
    for t in tilts:
        v = qer_rhs(Tilted(a=(t, 0.0), axis=1) if t else Vertical(axis=1), resolution=resolution)
        vals.append(v)
        out.tables.setdefault("tilt_sweep", []).append({"tilt": t, "integral": v})
    out.check("tilt_sweep_negative", max(vals), max(vals) < 0, "all < 0")
    return out


# --------------------------------------------------------------------------
# QER convergence
# --------------------------------------------------------------------------

def qer_convergence(h_list=(1 / 5, 1 / 10, 1 / 20, 1 / 40, 1 / 80), draws: int = 64, seed: int = 0,
                    tau: float = TAU_DEFAULT, hypersurface=None, **_) -> Outcome:
    """Scaled Cauchy functional against the single-mode and Liouville references."""
    out = Outcome("qer-convergence")
    spec = hypersurface or Vertical(axis=0)
    a = _const(None)

    def family(h):
        m = int(round(1 / h))
        return [ModeSum.single((m, 0), 1.0, 1.0 / m).normalized()]

    rep = scaling_experiment(family, spec, h_list, a=a, reference="defect", tau=tau)
    gaps = rep.gaps()
    out.report = rep
    mono = bool(np.all(np.diff(gaps) < 0))
    out.check("gap_monotone", gaps.tolist(), mono, "strictly decreasing")
    out.check("final_gap", float(gaps[-1]), gaps[-1] < 0.10, "< 0.10")

    ens = make_shell_ensemble(EnsembleSpec(25, draws, seed))
    forms = mode_forms(ens[0].ks, ens[0].h, spec, a=a, tau=tau)
    lhs = float(np.mean([forms.cauchy(u.cs).scaled.real for u in ens]))
    rhs = qer_rhs(spec, a, resolution=256)
    rel = abs(lhs / rhs - 1)
    out.check("ensemble_vs_liouville", rel, rel < 0.15, "< 0.15 relative")
    out.info["ensemble_lhs"] = lhs
    out.info["liouville_rhs"] = rhs
    out.info["liouville_angular_average"] = qer_rhs_angular_average(spec, a, resolution=256)
    return out


# --------------------------------------------------------------------------
# bound scaling
# --------------------------------------------------------------------------

def bounds_scaling(h_list=(1 / 10, 1 / 20, 1 / 40, 1 / 80), draws: int = 8, seed: int = 0,
                   tau: float = TAU_DEFAULT, **_) -> Outcome:
    out = Outcome("bounds-scaling")
    tg = TubeGraph()
    ok_a, margin = condition_a_check(tg)
    out.check("condition_a_margin", margin, ok_a and margin >= 0.97, ">= 0.97")

    def ens_family(h):
        return make_shell_ensemble(EnsembleSpec(int(round(1 / h)) ** 2, draws, seed))

    rep = scaling_experiment(ens_family, tg, h_list, tau=tau)
    out.report = rep
    fit = rep.fits["norm"]
    norms = rep.column("norm_min")
    allnorms = np.concatenate([rep.column("norm"), norms])
    out.check("tubegraph_slope", fit.slope, -0.1 <= fit.slope <= 0.1, "in [-0.1, 0.1]")
    out.check("tubegraph_lower", float(norms.min() / np.median(allnorms)), norms.min() > 0.1 * np.median(allnorms),
              "> 0.1 median")
    out.info["tubegraph_fit_accepted"] = fit.accepted

    # vertical slice, modes whose direction approaches the conormal dx_1
    def conormal_family(h):
        m = int(round(np.sqrt(1 / h**2 - 1)))
        return [ModeSum.single((m, 1), 1.0, h).normalized()]

    hv = [1 / np.hypot(int(round(1 / h)), 1) for h in h_list]
    vrep = scaling_experiment(conormal_family, Vertical(axis=0), hv, tau=tau)
    vfit = vrep.fits["norm"]
    out.check("vertical_slope", vfit.slope, -0.55 <= vfit.slope <= -0.25, "in [-0.55, -0.25]")
    out.info["vertical_norms"] = vrep.column("norm").tolist()
    out.tables["vertical"] = [{"h": r.h, "norm": r.norm} for r in vrep.rows]
    return out


# --------------------------------------------------------------------------
# multiplier
# --------------------------------------------------------------------------

def multiplier(h_list=(1 / 5, 1 / 10, 1 / 20, 1 / 40, 1 / 80), tau: float = TAU_DEFAULT, hypersurface=None,
               **_) -> Outcome:
    out = Outcome("multiplier")
    spec = hypersurface or Vertical(axis=0)
    res = {"identity": [], "cutoff": [], "generic": []}
    syms = {"identity": QSymbol.identity(), "cutoff": QSymbol.fiber_cutoff(), "generic": QSymbol.generic()}
    for h in h_list:
        m = int(round(1 / h))
        k = (3 * m // 5, 4 * m // 5)
        if np.hypot(*k) != m:
            raise ValueError(f"h = {h} does not give a (3,4) lattice mode")
        u = ModeSum.single(k, 1.0, 1.0 / m)
        for name, sym in syms.items():
            r = multiplier_residual(u, spec, sym, tau)
            res[name].append(r)
            out.tables.setdefault("residuals", []).append({"h": 1.0 / m, "symbol": name, "residual": r})
    g = np.array(res["generic"])
    out.check("generic_decreasing", g.tolist(), bool(np.all(np.diff(g) < 0)), "strictly decreasing")
    out.check("generic_final", float(g[-1]), g[-1] < 0.1, "< 0.1")
    out.info["identity_max"] = max(res["identity"])
    out.info["cutoff"] = res["cutoff"]
    out.info["generic_fit"] = fit_loglog(list(h_list), g).__dict__
    return out


# --------------------------------------------------------------------------
# ellipticity
# --------------------------------------------------------------------------

def ellipticity(resolution: int = 64, seed: int = 0, hypersurface=None, **_) -> Outcome:
    out = Outcome("ellipticity-scan")
    spec = hypersurface or TubeGraph()
    ok = local_condition_check(spec, 0.1, resolution)
    out.check("local_condition", ok, ok, "passes at delta = 0.1")
    scan = ellipticity_scan(spec, resolution=resolution, seed=seed)
    out.check("max_sigma_negative", scan.max_sigma, scan.max_sigma < 0, "< 0")
    need = 0.5 * abs(scan.max_f_term)
    out.check("margin", scan.margin, scan.margin >= need, f">= {need:.6g}")
    margins = []
    for r in (8, 16, 32, 64):
        margins.append(ellipticity_scan(Vertical(axis=0), resolution=r, seed=seed).margin)
    out.check("vertical_margin_vanishes", margins, margins[-1] <= 1e-3 and margins[-1] <= margins[0],
              "non-increasing to <= 1e-3")
    out.info["scan"] = scan.as_dict()
    return out


KINDS = {
    "circle-example": circle_example,
    "identities": identities,
    "f-analysis": f_analysis,
    "holomorphy": holomorphy,
    "wavefront": wavefront,
    "localization": localization,
    "general-position": general_position,
    "qer-convergence": qer_convergence,
    "bounds-scaling": bounds_scaling,
    "multiplier": multiplier,
    "ellipticity-scan": ellipticity,
}


def run_kind(kind: str, **kw) -> Outcome:
    if kind not in KINDS:
        raise KeyError(kind)
    t0 = time.perf_counter()
    out = KINDS[kind](**{k: v for k, v in kw.items() if v is not None})
    out.seconds = time.perf_counter() - t0
    return out
