"""h-sweeps of the Cauchy functional and restriction norms, with log-log fits."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from ..geometry import TAU_DEFAULT
from .cauchy import mode_forms
from .density import qer_rhs, qer_rhs_defect

__all__ = ["Fit", "fit_loglog", "QERRow", "QERReport", "scaling_experiment", "emit_report", "CSV_COLUMNS"]

CSV_COLUMNS = ("h", "term1_log", "term2_log", "scaled_lhs", "rhs", "norm", "weighted_norm",
               "norm_slope", "norm_slope_lo", "norm_slope_hi", "gap_slope")

# fits on nearly flat data are judged against this floor instead of their own range
RANGE_FLOOR = 0.1


@dataclass
class Fit:
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    r2: float
    residual: float
    data_range: float
    accepted: bool


def fit_loglog(x, y, level: float = 0.95) -> Fit:
    """Least squares of log y on log x; accepted if the residual norm is < 10% of the range."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("fit needs at least 3 points")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise ValueError("degenerate fit: all abscissae equal")
    r = stats.linregress(lx, ly)
    resid = ly - (r.intercept + r.slope * lx)
    t = stats.t.ppf(0.5 + level / 2, len(x) - 2)
    rng = float(np.ptp(ly))
    res = float(np.linalg.norm(resid))
    return Fit(float(r.slope), float(r.intercept), float(r.stderr), float(r.slope - t * r.stderr),
               float(r.slope + t * r.stderr), float(r.rvalue**2), res, rng,
               bool(res < 0.1 * max(rng, RANGE_FLOOR)))


@dataclass
class QERRow:
    h: float
    term1_log: float
    term2_log: float
    scaled_lhs: float
    rhs: float
    norm: float
    weighted_norm: float     # log of the weighted integral
    norm_min: float = float("nan")
    draws: int = 1


@dataclass
class QERReport:
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def sort(self) -> None:
        self.rows.sort(key=lambda r: -r.h)

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def gaps(self) -> np.ndarray:
        return np.abs(self.column("scaled_lhs") / self.column("rhs") - 1.0)

    def summary(self) -> dict:
        return {"meta": self.meta, "fits": {k: asdict(v) for k, v in self.fits.items()},
                "flags": self.flags, "rows": [asdict(r) for r in self.rows]}


def _log_abs(v: complex, log_scale: float) -> float:
    return float(np.log(abs(v)) + log_scale) if v != 0 else float("-inf")


def scaling_experiment(family, spec, hs, a=None, reference: str = "defect", tau: float = TAU_DEFAULT,
                       rhs_resolution: int = 256) -> QERReport:
    """Sweep h; ``family(h)`` returns a list of ModeSums sharing one set of lattice modes.

    Rows hold ensemble means of the scaled Cauchy sum and of the normalized
    restriction norm.  ``reference`` selects the right-hand side: 'defect'
    (single lattice mode, invariant torus {xi = k/|k|}) or 'liouville'
    (integral over Sigma cap S*M).  ``a=None`` skips the Cauchy functional.
    """
    hs = sorted((float(h) for h in hs), reverse=True)
    if len(hs) != len(set(hs)):
        raise ValueError("h values must be distinct")
    report = QERReport(meta={"spec": {"kind": spec.kind, **spec.params()}, "reference": reference,
                             "hs": hs, "tau": tau})
    for h in hs:
        us = family(h)
        ks = us[0].ks
        if any(u.ks.shape != ks.shape or np.any(u.ks != ks) for u in us):
            raise ValueError("ensemble members must share their lattice modes")
        forms = mode_forms(ks, h, spec, a=a, tau=tau)
        norms = np.array([forms.norm(u.cs) for u in us])
        wlog = [2 * np.log(n) - forms.norm_log + 1.0 / h for n in norms]
        t1 = t2 = scaled = 0.0
        if a is not None:
            cds = [forms.cauchy(u.cs) for u in us]
            t1 = float(np.mean([_log_abs(c.term1, c.log_scale) for c in cds]))
            t2 = float(np.mean([_log_abs(c.term2, c.log_scale) for c in cds]))
            scaled = float(np.mean([c.scaled.real for c in cds]))
        if a is None:
            rhs = float("nan")
        elif reference == "defect":
            rhs = float(np.mean([qer_rhs_defect(spec, a, u, rhs_resolution) for u in us]))
        elif reference == "liouville":
            rhs = qer_rhs(spec, a, resolution=rhs_resolution)
        else:
            raise ValueError(f"unknown reference {reference!r}")
        report.rows.append(QERRow(h, t1, t2, scaled, rhs, float(np.mean(norms)), float(np.mean(wlog)),
                                  float(norms.min()), len(us)))
    report.sort()
    if len(report.rows) >= 3:
        report.fits["norm"] = fit_loglog(report.column("h"), report.column("norm"))
        if a is not None and np.all(report.gaps() > 0):
            report.fits["gap"] = fit_loglog(report.column("h"), report.gaps())
    report.flags["fit_points_ok"] = len(report.rows) >= 4
    return report


def _fmt(v) -> str:
    return f"{float(v):.17e}"


def emit_report(report: QERReport, path) -> tuple[Path, Path]:
    """Write ``<path>.csv`` (one row per h) and ``<path>.json`` (summary, sorted keys)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = path.with_suffix(".csv"), path.with_suffix(".json")
    nf = report.fits.get("norm")
    gf = report.fits.get("gap")
    extra = {
        "norm_slope": nf.slope if nf else float("nan"),
        "norm_slope_lo": nf.ci_low if nf else float("nan"),
        "norm_slope_hi": nf.ci_high if nf else float("nan"),
        "gap_slope": gf.slope if gf else float("nan"),
    }
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in report.rows:
            vals = [getattr(r, c) if hasattr(r, c) else extra[c] for c in CSV_COLUMNS]
            fh.write(",".join(_fmt(v) for v in vals) + "\n")
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(report.summary()), fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return csv_path, json_path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj
