"""
tests/test_l1solver.py
Tests for the dense simplex and the basis-pursuit programs in l1solver.py.
"""

import sys
import pathlib

import numpy as np
import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent.parent))

from l1solver import (
    InfeasibleProgramError,
    IterationLimitError,
    LinearProgram,
    LPStatus,
    RankDeficiencyError,
    SolverSettings,
    UnboundedProgramError,
    simplex_solve,
    solve_l1_dual,
    solve_l1_primal,
)
from polybasis import default_basis


# simplex

def test_simplex_small_program():
    """Two-variable program: optimum, value and dual."""
    lp = LinearProgram([[1.0, 2.0]], [4.0], [1.0, 1.0])
    result = simplex_solve(lp, SolverSettings())
    np.testing.assert_allclose(result.x, [0.0, 2.0])
    assert result.value == pytest.approx(2.0)
    np.testing.assert_allclose(result.duals, [0.5])


def test_simplex_negative_rhs_duals_keep_original_sign():
    """Rows flipped for a negative rhs report duals for the original rows."""
    lp = LinearProgram([[-1.0, -2.0]], [-4.0], [1.0, 1.0])
    result = simplex_solve(lp, SolverSettings())
    assert result.value == pytest.approx(2.0)
    assert float(result.duals @ lp.rhs) == pytest.approx(2.0)


def test_simplex_infeasible():
    """Phase 1 detects infeasibility."""
    lp = LinearProgram([[1.0, 1.0]], [-1.0], [1.0, 1.0])
    with pytest.raises(InfeasibleProgramError) as e:
        simplex_solve(lp, SolverSettings())
    assert e.value.status == LPStatus.INFEASIBLE.value


def test_simplex_unbounded():
    """Phase 2 detects an unbounded ray."""
    lp = LinearProgram([[1.0, -1.0]], [0.0], [-1.0, 0.0])
    with pytest.raises(UnboundedProgramError):
        simplex_solve(lp, SolverSettings())


def test_simplex_iteration_limit():
    """A zero pivot budget raises IterationLimitError."""
    lp = LinearProgram([[1.0, 2.0]], [4.0], [1.0, 1.0])
    with pytest.raises(IterationLimitError):
        simplex_solve(lp, SolverSettings(max_iterations=0))


def test_simplex_redundant_row():
    """A redundant equality keeps its artificial basic at zero."""
    lp = LinearProgram([[1.0, 1.0], [2.0, 2.0]], [1.0, 2.0], [1.0, 3.0])
    result = simplex_solve(lp, SolverSettings())
    np.testing.assert_allclose(result.x, [1.0, 0.0])


def test_linear_program_shape_check():
    """Mismatched shapes are rejected."""
    with pytest.raises(ValueError):
        LinearProgram([[1.0, 2.0]], [1.0, 2.0], [1.0, 1.0])


def test_settings_from_env(monkeypatch):
    """Solver settings come from OPTIPRED_* variables."""
    monkeypatch.setenv("OPTIPRED_MAX_ITER", "12")
    monkeypatch.setenv("OPTIPRED_PIVOT_TOL", "1e-7")
    settings = SolverSettings.from_env()
    assert settings.max_iterations == 12
    assert settings.pivot_tol == 1e-7
    assert settings.ratio_tol == 1e-10


# basis pursuit

def _two_node_system():
    v = default_basis(1).evaluate([-1.0, 1.0])
    return v.T, np.array([1.0, 2.0])


def test_primal_two_nodes():
    """Primal on two nodes: c = Lagrange values, z = coefficients of x."""
    vt, p = _two_node_system()
    solution = solve_l1_primal(vt, p, SolverSettings())
    np.testing.assert_allclose(solution.c, [-0.5, 1.5])
    assert solution.value == pytest.approx(2.0)
    # dual polynomial Q(x) = x
    np.testing.assert_allclose(solution.z, [0.0, 1.0], atol=1e-12)
    assert solution.extra["dual_value"] == pytest.approx(2.0)


def test_dual_two_nodes():
    """Dual on two nodes gives the same pair."""
    vt, p = _two_node_system()
    solution = solve_l1_dual(vt, p, SolverSettings())
    assert solution.value == pytest.approx(2.0)
    np.testing.assert_allclose(solution.c, [-0.5, 1.5], atol=1e-12)
    np.testing.assert_allclose(solution.z, [0.0, 1.0], atol=1e-12)


def test_primal_support_is_sparse():
    """On a nine-point grid the primal keeps three nodes."""
    v = default_basis(2).evaluate(np.linspace(-1, 1, 9))
    p = default_basis(2).evaluate([2.0])[0]
    solution = solve_l1_primal(v.T, p, SolverSettings())
    assert solution.support.tolist() == [0, 4, 8]
    assert solution.l1_norm == pytest.approx(7.0)


def test_rank_deficient_rejected():
    """Rank-deficient systems raise RankDeficiencyError."""
    with pytest.raises(RankDeficiencyError):
        solve_l1_primal(np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 1.0]), SolverSettings())
    with pytest.raises(RankDeficiencyError):
        solve_l1_primal(np.ones((3, 2)), np.ones(3), SolverSettings())


def test_dual_rejects_complex_rhs():
    """The dual program needs a real right-hand side."""
    vt, _ = _two_node_system()
    with pytest.raises(ValueError):
        solve_l1_dual(vt, np.array([1.0, 1j]), SolverSettings())


def test_primal_complex_rhs_is_stacked():
    """A complex right-hand side is solved in stacked form."""
    v = default_basis(1).evaluate(np.linspace(-1, 1, 5))
    p = np.array([1.0, 0.5j])
    solution = solve_l1_primal(v.T, p, SolverSettings())
    assert solution.stacked
    np.testing.assert_allclose(v.T @ solution.c, p, atol=1e-12)
    assert solution.extra["stacked_l1"] == pytest.approx(1.5)
    assert solution.value <= solution.extra["stacked_l1"] + 1e-12


# strong duality on random instances

def _random_instances(count: int, seed: int = 20240601):
    rng = np.random.default_rng(seed)
    for k in range(count):
        if k % 4 == 3:
            degree = int(rng.integers(1, 7))
            n = degree + 1
            m = int(rng.integers(n, 31))
            x = np.sort(rng.uniform(-1, 1, m))
            z0 = float(rng.choice([-1.0, 1.0]) * rng.uniform(1.1, 3.0))
            basis = default_basis(degree)
            yield basis.evaluate(x), basis.evaluate([z0])[0]
        else:
            n = int(rng.integers(2, 11))
            m = int(rng.integers(n, 31))
            yield rng.standard_normal((m, n)), rng.standard_normal(n)


def test_strong_duality_random_instances():
    """Primal and dual values agree and signs match on 200 random instances."""
    settings = SolverSettings()
    for v, p in _random_instances(200):
        primal = solve_l1_primal(v.T, p, settings)
        dual = solve_l1_dual(v.T, p, settings)
        scale = max(1.0, primal.value)
        assert abs(primal.value - dual.value) <= 1e-8 * scale
        assert abs(primal.extra["dual_value"] - primal.value) <= 1e-8 * scale
        np.testing.assert_allclose(v.T @ primal.c, p, atol=1e-8 * scale)

        q = v @ primal.z
        assert np.max(np.abs(q)) <= 1.0 + 1e-8
        support = primal.support
        np.testing.assert_allclose(q[support], np.sign(primal.c[support]), atol=1e-8)
        assert support.size <= v.shape[1]


def test_high_degree_grids_primal_and_dual_agree():
    """Ill-scaled design programs from degree 6 up reach the same optimum from both sides."""
    settings = SolverSettings()
    for n in (6, 8, 10):
        basis = default_basis(n)
        for m in (21, 33, 65):
            v = basis.evaluate(np.linspace(-1.0, 1.0, m))
            for z0 in (2.0, -5.0):
                p = basis.evaluate([z0])[0]
                primal = solve_l1_primal(v.T, p, settings)
                dual = solve_l1_dual(v.T, p, settings)
                assert abs(primal.value - dual.value) <= 1e-7 * primal.value
                assert np.max(np.abs(v @ primal.z)) <= 1.0 + 1e-7 * max(1.0, np.max(np.abs(primal.z)))


def test_phase_one_roundoff_is_not_unbounded():
    """A bounded program whose phase 1 sees roundoff-level reduced costs still solves."""
    a = np.array([[1.0, 1.0, 0.0], [1.0, 1.0 + 1e-13, 1.0]]) * 7e5
    lp = LinearProgram(a, [7e5, 14e5], [1.0, 1.0, 1.0])
    result = simplex_solve(lp, SolverSettings())
    np.testing.assert_allclose(lp.constraints @ result.x, lp.rhs, rtol=1e-9)
