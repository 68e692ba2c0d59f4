"""
tests/test_problem.py
Tests for problem-file parsing, validation diagnostics and derived objects in problem.py.
"""

import json
import sys
import pathlib

import numpy as np
import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent.parent))

from polybasis import BasisKind, dimension
from problem import (
    ComplexNumber,
    ProblemFile,
    ProblemFileError,
    decode_scalars,
    encode_scalars,
    load_problem,
    parse_problem,
)

CHEBYSHEV = {
    "schema_version": 1,
    "domain": {"type": "chebyshev-extreme", "degree": 2},
    "degree": 2,
    "external_point": [2.0],
}


def test_parse_minimal_problem():
    """A minimal problem parses with defaults."""
    problem = parse_problem(json.dumps(CHEBYSHEV))
    assert problem.dim == 1
    assert problem.basis is None
    assert problem.poly_basis().kind is BasisKind.CHEBYSHEV
    candidates = problem.candidate_set()
    assert candidates.size == 3
    np.testing.assert_array_equal(candidates.external_point, [2.0])


def test_bivariate_default_basis_is_total_degree_monomial():
    """Bivariate problems default to total-degree monomials."""
    problem = ProblemFile.model_validate({
        "domain": {"type": "points", "coords": [[0, 0], [0, 1], [1, 0]]},
        "degree": 1,
        "dim": 2,
        "external_point": [1, 1],
    })
    assert problem.poly_basis().kind is BasisKind.TOTAL_DEGREE_MONOMIAL
    assert problem.candidate_set().points.shape == (3, 2)


def test_explicit_basis():
    """An explicit basis overrides the default."""
    data = dict(CHEBYSHEV, basis="monomial")
    assert parse_problem(json.dumps(data)).poly_basis().kind is BasisKind.MONOMIAL


def test_complex_external_point():
    """A {re, im} external point parses to a complex value."""
    data = dict(CHEBYSHEV, external_point=[{"re": 0.0, "im": 1.0}])
    problem = parse_problem(json.dumps(data))
    assert isinstance(problem.external_point[0], ComplexNumber)
    assert problem.candidate_set().is_complex
    np.testing.assert_array_equal(problem.external_point_array(), [1j])


def test_malformed_json_reports_line_and_column():
    """Broken JSON reports line and column."""
    with pytest.raises(ProblemFileError) as e:
        parse_problem('{\n  "degree": 2,\n  "domain": \n}', "bad.json")
    assert "bad.json: line 4" in str(e.value)


def test_dim_mismatch_names_field():
    """A wrong external point length names the field."""
    data = dict(CHEBYSHEV, external_point=[2.0, 1.0])
    with pytest.raises(ProblemFileError) as e:
        parse_problem(json.dumps(data))
    assert "external_point" in str(e.value)


def test_unknown_domain_type_names_field():
    """An unknown domain type names the field and lists the valid types."""
    data = dict(CHEBYSHEV, domain={"type": "disk", "degree": 2})
    with pytest.raises(ProblemFileError) as e:
        parse_problem(json.dumps(data))
    assert "field 'domain" in str(e.value)
    assert "expected one of: chebyshev-extreme, grid, points" in str(e.value)


def test_missing_degree_names_field():
    """A missing degree names the field."""
    data = {k: v for k, v in CHEBYSHEV.items() if k != "degree"}
    with pytest.raises(ProblemFileError) as e:
        parse_problem(json.dumps(data))
    assert "field 'degree'" in str(e.value)


def test_extra_field_rejected():
    """Unknown top-level fields are rejected."""
    with pytest.raises(ProblemFileError):
        parse_problem(json.dumps(dict(CHEBYSHEV, weights=[1, 2, 3])))


def test_wrong_schema_version_rejected():
    """Only schema version 1 is accepted."""
    with pytest.raises(ProblemFileError) as e:
        parse_problem(json.dumps(dict(CHEBYSHEV, schema_version=2)))
    assert "schema_version" in str(e.value)


def test_digest_is_stable_and_content_sensitive():
    """The digest ignores formatting and tracks content."""
    a = parse_problem(json.dumps(CHEBYSHEV))
    b = parse_problem(json.dumps(CHEBYSHEV, indent=4))
    c = parse_problem(json.dumps(dict(CHEBYSHEV, external_point=[2.5])))
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    assert len(a.digest()) == 64


def test_load_problem_from_file(tmp_path):
    """load_problem reads a file from disk."""
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(CHEBYSHEV), encoding="utf-8")
    assert load_problem(path).degree == 2


def test_load_problem_missing_file(tmp_path):
    """A missing file raises ProblemFileError."""
    with pytest.raises(ProblemFileError) as e:
        load_problem(tmp_path / "nope.json")
    assert "not found" in str(e.value)


def test_scalar_encoding():
    """Real and complex scalars encode and decode."""
    assert encode_scalars(np.array([1.0, 2.0])) == [1.0, 2.0]
    encoded = encode_scalars(np.array([1.0, 2j]))
    assert encoded[1] == ComplexNumber(re=0.0, im=2.0)
    np.testing.assert_array_equal(decode_scalars(encoded), [1.0, 2j])
    assert not np.iscomplexobj(decode_scalars([1.0, 3.0]))


def test_bundled_problem_files_load():
    """Every file in problems/ loads and is large enough for its basis."""
    problems = sorted((pathlib.Path(__file__).parent.parent / "problems").glob("*.json"))
    assert problems
    for path in problems:
        problem = load_problem(path)
        assert problem.candidate_set().size >= dimension(problem.poly_basis())
