"""
tests/test_report.py
Tests for report assembly, JSON round trip, CSV export and the markdown digest in report.py.
"""

import csv
import json
import sys
import pathlib
from datetime import datetime, timezone

import numpy as np
import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent.parent))

from design import Verdict, certify, optimal_design, vandermonde
from l1solver import SolverSettings
from problem import ProblemFile
from report import (
    ReportFileError,
    build_markdown,
    build_report,
    dumps_report,
    load_report,
    write_csv,
    write_report,
)


def _solve(data: dict, **kwargs):
    problem = ProblemFile.model_validate(data)
    candidates = problem.candidate_set()
    basis = problem.poly_basis()
    v = vandermonde(basis, candidates)
    design, solution = optimal_design(basis, candidates, SolverSettings())
    certificate = certify(design, v, v.external_values(), solution)
    return problem, v, build_report(problem, v, design, solution, certificate, **kwargs)


CHEBYSHEV = {"domain": {"type": "chebyshev-extreme", "degree": 2}, "degree": 2, "external_point": [2.0]}
TRIANGLE_EDGE = {
    "domain": {"type": "points", "coords": [[0, 0], [0, 1], [1, 0]]},
    "degree": 1,
    "dim": 2,
    "external_point": [0.5, 0.5],
}


def test_report_contents():
    """The report carries weights, support, K and the certificate."""
    problem, _, report = _solve(CHEBYSHEV, timestamp=False)
    assert report.generated_at is None
    assert report.problem_digest == problem.digest()
    assert report.mode == "real"
    assert report.christoffel_value == pytest.approx(49.0)
    np.testing.assert_allclose(report.weights, [1 / 7, 3 / 7, 3 / 7])
    assert [entry.index for entry in report.support] == [0, 1, 2]
    assert report.support[1].coords == [0.0]
    assert report.certificate.verdict is Verdict.CERTIFIED
    assert report.caveats == []


def test_report_timestamp():
    """generated_at is set unless timestamps are off."""
    when = datetime(2026, 3, 1, 12, 0, tzinfo=timezone.utc)
    _, _, report = _solve(CHEBYSHEV, generated_at=when)
    assert report.generated_at == "2026-03-01T12:00:00+00:00"


def test_round_trip_is_lossless(tmp_path):
    """Weights read back bit-identical."""
    _, _, report = _solve({
        "domain": {"type": "grid", "interval": [-1, 1], "count": 9},
        "degree": 3,
        "external_point": [1.3],
    }, timestamp=False)
    path = write_report(report, tmp_path / "out" / "report.json")
    loaded = load_report(path)
    assert loaded == report
    assert loaded.weights == report.weights
    assert dumps_report(loaded) == path.read_text(encoding="utf-8")


def test_degenerate_report_writes_null_certificate_numbers(tmp_path):
    """Uncomputable certificate values are written as null."""
    _, _, report = _solve(TRIANGLE_EDGE, timestamp=False)
    assert report.degenerate
    assert report.certificate.verdict is Verdict.NOT_APPLICABLE
    assert report.certificate.gap is None
    data = json.loads(write_report(report, tmp_path / "r.json").read_text(encoding="utf-8"))
    assert data["certificate"]["gap"] is None


def test_complex_values_serialised_as_objects():
    """Complex values are written as {re, im} objects."""
    _, _, report = _solve(dict(CHEBYSHEV, domain={"type": "chebyshev-extreme", "degree": 1},
                               degree=1, external_point=[{"re": 0.0, "im": 1.0}]), timestamp=False)
    data = json.loads(dumps_report(report))
    assert report.mode == "interpolation"
    assert data["external_point"] == [{"re": 0.0, "im": 1.0}]
    assert set(data["primal_c"][0]) == {"re", "im"}


def test_load_report_errors(tmp_path):
    """Missing files, broken JSON and bad fields raise ReportFileError."""
    with pytest.raises(ReportFileError):
        load_report(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ReportFileError) as e:
        load_report(bad)
    assert "line 1" in str(e.value)
    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(json.dumps({"schema_version": 1}), encoding="utf-8")
    with pytest.raises(ReportFileError) as e:
        load_report(incomplete)
    assert "problem_digest" in str(e.value)


def test_csv_export(tmp_path):
    """The CSV has a header and one row per candidate."""
    _, v, report = _solve({
        "domain": {"type": "grid", "interval": [-1, 1], "count": 33},
        "degree": 2,
        "external_point": [2.0],
    }, timestamp=False)
    path = write_csv(report, v.candidates.points, tmp_path / "weights.csv")
    with path.open(newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["x1", "weight", "in_support"]
    assert len(rows) == 34
    flagged = [float(r[0]) for r in rows[1:] if r[2] == "1"]
    assert flagged == [-1.0, 0.0, 1.0]
    assert report.caveats


def test_markdown_digest():
    """The markdown digest has support, certificate and caveat sections."""
    _, _, report = _solve(CHEBYSHEV, timestamp=False)
    md = build_markdown(report)
    assert md.startswith("# Optimal prediction design at z0 = (2)")
    assert "## Support" in md
    assert "verdict: **certified**" in md
    assert "| 1 | (0) | 0.428571428571 |" in md
