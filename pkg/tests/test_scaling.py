import csv
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qerlab.hypersurface import Vertical
from qerlab.qer.scaling import CSV_COLUMNS, QERReport, QERRow, emit_report, fit_loglog, scaling_experiment
from qerlab.spectral import ModeSum

DATA = Path(__file__).parent / "data"


@given(st.floats(-2, 2), st.floats(0.1, 10))
def test_fit_recovers_power_law(p, c):
    x = np.array([0.2, 0.1, 0.05, 0.025])
    f = fit_loglog(x, c * x ** p)
    assert np.isclose(f.slope, p, atol=1e-9)
    assert np.isclose(np.exp(f.intercept), c, rtol=1e-9)
    assert f.accepted


def test_fit_rejects_noise_and_degenerate_input():
    x = np.array([0.2, 0.1, 0.05, 0.025, 0.0125])
    y = x ** -0.5 * np.array([1, 3, 0.4, 2.5, 0.3])
    assert not fit_loglog(x, y).accepted
    with pytest.raises(ValueError):
        fit_loglog([0.1, 0.1, 0.1], [1, 2, 3])
    with pytest.raises(ValueError):
        fit_loglog([0.1, 0.2], [1, 2])


def test_fit_interval_contains_slope():
    x = np.array([0.2, 0.1, 0.05, 0.025])
    f = fit_loglog(x, x ** 0.5 * np.array([1.0, 1.02, 0.99, 1.01]))
    assert f.ci_low < f.slope < f.ci_high


def _four_row_report():
    rows = [QERRow(1 / m, 0.5 * m, 0.25 * m, 0.5 - 0.5 / m, -30 * np.pi, 2 ** -0.5, 1.0 * m, 2 ** -0.5, 1)
            for m in (5, 10, 20, 40)]
    rep = QERReport(rows=rows, meta={"spec": {"kind": "vertical"}, "hs": [r.h for r in rows]})
    rep.fits["norm"] = fit_loglog(rep.column("h"), np.array([1.0, 0.9, 0.8, 0.7]))
    rep.fits["gap"] = fit_loglog(rep.column("h"), rep.gaps())
    rep.flags["fit_points_ok"] = True
    return rep


def test_golden_four_rows(tmp_path):
    csv_path, json_path = emit_report(_four_row_report(), tmp_path / "sweep")
    assert csv_path.read_bytes() == (DATA / "golden_sweep.csv").read_bytes()
    assert json_path.read_bytes() == (DATA / "golden_sweep.json").read_bytes()
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4
    assert float(rows[1]["h"]) == 0.1
    summary = json.loads(json_path.read_text())
    assert summary["fits"]["norm"]["accepted"] is True
    assert len(summary["rows"]) == 4


def test_empty_report_is_header_only(tmp_path):
    csv_path, json_path = emit_report(QERReport(), tmp_path / "empty")
    assert csv_path.read_text() == ",".join(CSV_COLUMNS) + "\n"
    assert json.loads(json_path.read_text())["rows"] == []


def test_emission_is_byte_deterministic(tmp_path):
    a = emit_report(_four_row_report(), tmp_path / "a")
    b = emit_report(_four_row_report(), tmp_path / "b")
    for p, q in zip(a, b):
        assert p.read_bytes() == q.read_bytes()
    assert b"\r" not in a[0].read_bytes()


def test_sweep_rows_sorted_and_reference():
    fam = lambda h: [ModeSum.single((round(1 / h), 0), 1.0, h).normalized()]
    rep = scaling_experiment(fam, Vertical(), [0.1, 0.2, 0.05], a=lambda x, xi: np.ones(len(x)))
    assert list(rep.column("h")) == [0.2, 0.1, 0.05]
    np.testing.assert_allclose(rep.column("rhs"), -30 * np.pi, rtol=1e-10)
    with pytest.raises(ValueError):
        scaling_experiment(fam, Vertical(), [0.1, 0.1, 0.05])
