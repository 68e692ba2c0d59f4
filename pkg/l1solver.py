"""
l1solver.py
Dense two-phase revised simplex (Bland's rule) and the two basis-pursuit programs

  primal:  min ||c||_1          s.t.  V^t c = p
  dual:    max z^t p            s.t.  -1 <= (V z)_i <= 1

Both programs share their optimal value, and at an optimal pair the dual
polynomial P(x) = sum z_j P_j(x) takes the value sgn(c_i) at every node in the
support of c. The simplex returns vertex solutions, so c has at most N nonzero
entries.

Environment variables (read by SolverSettings.from_env):
  OPTIPRED_PIVOT_TOL          : smallest admissible pivot / reduced cost (default 1e-9)
  OPTIPRED_RATIO_TOL          : ratio-test tie window (default 1e-10)
  OPTIPRED_SUPPORT_THRESHOLD  : |c_i| above this times max(1, ||c||_inf) is support (default 1e-10)
  OPTIPRED_MAX_ITER           : pivot budget per phase (default 50000)
"""

import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from polybasis import numerical_rank

# a ray is reported unbounded only if it decreases the objective at least this fast
UNBOUNDED_RATE = 1e-6


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    DEGENERATE = "degenerate-warning"
    ITERATION_LIMIT = "iteration-limit"


class SolverError(RuntimeError):
    """Base class for linear programming failures."""

    status = "solver-error"


class InfeasibleProgramError(SolverError):
    status = LPStatus.INFEASIBLE.value


class UnboundedProgramError(SolverError):
    status = LPStatus.UNBOUNDED.value


class IterationLimitError(SolverError):
    status = LPStatus.ITERATION_LIMIT.value


class RankDeficiencyError(SolverError):
    status = "rank-deficient"


@dataclass(frozen=True)
class SolverSettings:
    pivot_tol: float = 1e-9
    ratio_tol: float = 1e-10
    support_threshold: float = 1e-10
    max_iterations: int = 50_000

    @classmethod
    def from_env(cls) -> "SolverSettings":
        return cls(
            pivot_tol=float(os.getenv("OPTIPRED_PIVOT_TOL", "1e-9")),
            ratio_tol=float(os.getenv("OPTIPRED_RATIO_TOL", "1e-10")),
            support_threshold=float(os.getenv("OPTIPRED_SUPPORT_THRESHOLD", "1e-10")),
            max_iterations=int(os.getenv("OPTIPRED_MAX_ITER", "50000")),
        )


@dataclass(frozen=True)
class LinearProgram:
    """min objective^t x  s.t.  constraints @ x = rhs,  x >= 0."""

    constraints: np.ndarray
    rhs: np.ndarray
    objective: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.constraints, dtype=float))
        b = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        if a.shape != (b.size, c.size):
            raise ValueError(
                f"constraint matrix shape {a.shape} does not match rhs ({b.size}) and objective ({c.size})"
            )
        object.__setattr__(self, "constraints", a)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "objective", c)


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    duals: np.ndarray
    value: float
    basis: tuple[int, ...]
    status: LPStatus
    iterations: int


@dataclass(frozen=True)
class L1Solution:
    """
    Optimal pair for the basis-pursuit programs.

    `c` is complex only in the complex-stacked mode (z0 complex, M > N), where
    `z` holds the stacked real multipliers [z_re, z_im] and carries no
    polynomial meaning.
    """

    c: np.ndarray
    z: np.ndarray
    value: float
    status: LPStatus
    support_threshold: float = 1e-10
    stacked: bool = False
    iterations: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.c)))

    @property
    def support(self) -> np.ndarray:
        scale = max(1.0, float(np.max(np.abs(self.c), initial=0.0)))
        return np.flatnonzero(np.abs(self.c) > self.support_threshold * scale)


# ------------------------------------------------------------------ #
# Dense revised simplex                                                #
# ------------------------------------------------------------------ #

def _basic_solution(full: np.ndarray, b: np.ndarray, cost: np.ndarray, basis: list[int]):
    """x_B = B^-1 b and y = B^-t c_B, both from the original columns."""
    basic = full[:, basis]
    return np.linalg.solve(basic, b), np.linalg.solve(basic.T, cost[basis])


def _entering_candidates(
    full: np.ndarray,
    cost: np.ndarray,
    y: np.ndarray,
    basis: list[int],
    n_enter: int,
    settings: SolverSettings,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Nonbasic columns below n_enter whose reduced cost is negative beyond
    roundoff, in index order, and those reduced costs relative to their scale.
    """
    columns = full[:, :n_enter]
    reduced = cost[:n_enter] - columns.T @ y
    # roundoff in c_j - A_j^t y is relative to |c_j| + |A_j|^t |y|
    scale = np.maximum(1.0, np.abs(cost[:n_enter]) + np.abs(columns).T @ np.abs(y))
    candidates = reduced < -settings.pivot_tol * scale
    candidates[[b for b in basis if b < n_enter]] = False
    cols = np.flatnonzero(candidates)
    return cols, reduced[cols] / scale[cols]


def _run_phase(
    full: np.ndarray,
    b: np.ndarray,
    cost: np.ndarray,
    basis: list[int],
    n_enter: int,
    settings: SolverSettings,
    bounded_below: bool = False,
) -> int:
    """
    Pivot until no reduced cost among the first `n_enter` columns is negative.

    Entering column: smallest index with negative reduced cost (Bland).
    Leaving row: minimum ratio, ties broken by the smallest basic variable index.
    With `bounded_below` (phase 1) a column without a positive direction entry
    is skipped instead of reported as unbounded; so is any such column whose
    relative reduced cost is above -UNBOUNDED_RATE.
    """
    for iteration in range(settings.max_iterations):
        x_basic, y = _basic_solution(full, b, cost, basis)
        x_basic = np.maximum(x_basic, 0.0)
        cols, relative = _entering_candidates(full, cost, y, basis, n_enter, settings)
        for col, rate in zip(cols, relative):
            direction = np.linalg.solve(full[:, basis], full[:, col])
            limit = settings.pivot_tol * max(1.0, float(np.max(np.abs(direction))))
            rows = np.flatnonzero(direction > limit)
            if rows.size == 0:
                if bounded_below or rate > -UNBOUNDED_RATE:
                    continue
                raise UnboundedProgramError(f"objective unbounded along column {col}")
            ratios = x_basic[rows] / direction[rows]
            ties = rows[ratios <= ratios.min() + settings.ratio_tol]
            row = min(ties, key=lambda r: basis[r])
            basis[row] = int(col)
            break
        else:
            return iteration
    raise IterationLimitError(f"no optimal basis after {settings.max_iterations} pivots")


def _drive_out_artificials(full: np.ndarray, basis: list[int], n: int, settings: SolverSettings) -> None:
    """Replace artificial basics (at level zero after phase 1) by original columns where possible."""
    for row in range(len(basis)):
        if basis[row] < n:
            continue
        entries = np.abs(np.linalg.solve(full[:, basis], full[:, :n])[row])
        entries[_basis_mask(basis, n)] = 0.0
        col = int(np.argmax(entries))
        if entries[col] <= settings.pivot_tol:
            # redundant equality: the artificial stays basic at zero and never moves
            continue
        basis[row] = col


def _basis_mask(basis: list[int], n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    for b in basis:
        if b < n:
            mask[b] = True
    return mask


def simplex_solve(lp: LinearProgram, settings: SolverSettings | None = None) -> SimplexResult:
    """
    Two-phase dense simplex for a standard-form program.

    Phase 1 minimises the sum of one artificial per row; artificials leave for
    good once they are nonbasic. Rank-deficient constraint matrices are handled
    by leaving the artificial of a redundant row basic at zero.

    Every pivot re-solves the basis against the original data, so roundoff does
    not accumulate across pivots and the returned primal x and constraint duals
    y satisfy B x_B = b and B^t y = c_B to working precision.

    Raises:
        InfeasibleProgramError, UnboundedProgramError, IterationLimitError
    """
    settings = settings or SolverSettings.from_env()
    a, b, cost = lp.constraints, lp.rhs, lp.objective
    m, n = a.shape

    signs = np.where(b < 0, -1.0, 1.0)
    a_std = a * signs[:, None]
    b_std = b * signs
    full = np.hstack([a_std, np.eye(m)])
    basis = list(range(n, n + m))

    phase_one_cost = np.concatenate([np.zeros(n), np.ones(m)])
    iterations = _run_phase(full, b_std, phase_one_cost, basis, n, settings, bounded_below=True)
    x_basic, _ = _basic_solution(full, b_std, phase_one_cost, basis)
    residual = float(sum(x for x, var in zip(x_basic, basis) if var >= n))
    if residual > settings.pivot_tol * max(1.0, float(np.max(np.abs(b_std), initial=0.0))):
        raise InfeasibleProgramError(f"phase 1 residual {residual:.3e} above tolerance")

    _drive_out_artificials(full, basis, n, settings)

    full_cost = np.concatenate([cost, np.zeros(m)])
    iterations += _run_phase(full, b_std, full_cost, basis, n, settings)

    x_basic, y_std = _basic_solution(full, b_std, full_cost, basis)

    x_all = np.zeros(n + m)
    x_all[basis] = x_basic
    x = np.maximum(x_all[:n], 0.0)

    reduced = cost - a_std.T @ y_std
    nonbasic = ~_basis_mask(basis, n)
    status = LPStatus.OPTIMAL
    if np.any(np.abs(reduced[nonbasic]) <= settings.pivot_tol):
        status = LPStatus.DEGENERATE

    return SimplexResult(
        x=x,
        duals=y_std * signs,
        value=float(cost @ x),
        basis=tuple(basis),
        status=status,
        iterations=iterations,
    )


# ------------------------------------------------------------------ #
# Basis pursuit                                                        #
# ------------------------------------------------------------------ #

def _check_full_row_rank(vt: np.ndarray) -> None:
    n_rows, n_cols = vt.shape
    if n_cols < n_rows:
        raise RankDeficiencyError(f"need at least {n_rows} candidate points, got {n_cols}")
    if numerical_rank(vt) < n_rows:
        raise RankDeficiencyError("V^t does not have full row rank")


def _primal_program(vt: np.ndarray, rhs: np.ndarray) -> LinearProgram:
    """c = c_plus - c_minus,  min 1^t (c_plus + c_minus)  s.t.  V^t (c_plus - c_minus) = rhs."""
    n_cols = vt.shape[1]
    return LinearProgram(np.hstack([vt, -vt]), rhs, np.ones(2 * n_cols))


def solve_l1_primal(vt, p, settings: SolverSettings | None = None) -> L1Solution:
    """
    min ||c||_1 subject to V^t c = p.

    The dual vector z is read from the equality multipliers, so |V z| <= 1 holds
    and (V z)_i = sgn(c_i) on the support.

    A complex right-hand side (z0 complex) is handled by stacking: c = a + i b
    with V^t a = Re p and V^t b = Im p, minimising ||a||_1 + ||b||_1. This bounds
    the complex l1 norm from above; no duality statement is attached to it.
    """
    settings = settings or SolverSettings.from_env()
    vt = np.asarray(vt, dtype=float)
    p = np.asarray(p)
    _check_full_row_rank(vt)
    n_rows, n_cols = vt.shape

    if np.iscomplexobj(p) and np.any(p.imag):
        zero = np.zeros_like(vt)
        stacked_vt = np.block([[vt, zero], [zero, vt]])
        result = simplex_solve(
            _primal_program(stacked_vt, np.concatenate([p.real, p.imag])), settings
        )
        ab = result.x[: 2 * n_cols] - result.x[2 * n_cols:]
        c = ab[:n_cols] + 1j * ab[n_cols:]
        return L1Solution(
            c=c,
            z=result.duals,
            value=float(np.sum(np.abs(c))),
            status=result.status,
            support_threshold=settings.support_threshold,
            stacked=True,
            iterations=result.iterations,
            extra={"stacked_l1": result.value},
        )

    p = np.real(p).astype(float)
    result = simplex_solve(_primal_program(vt, p), settings)
    c = result.x[:n_cols] - result.x[n_cols:]
    return L1Solution(
        c=c,
        z=result.duals,
        value=float(np.sum(np.abs(c))),
        status=result.status,
        support_threshold=settings.support_threshold,
        iterations=result.iterations,
        extra={"dual_value": float(result.duals @ p)},
    )


def solve_l1_dual(vt, p, settings: SolverSettings | None = None) -> L1Solution:
    """
    max z^t p subject to -1 <= (V z)_i <= 1.

    Standard form: z = z_plus - z_minus with slacks s, t >= 0,
        V z + s = 1,   -V z + t = 1.
    The coefficient vector is recovered from the multipliers of the two
    families: c = y_t - y_s.
    """
    settings = settings or SolverSettings.from_env()
    vt = np.asarray(vt, dtype=float)
    p = np.asarray(p)
    if np.iscomplexobj(p) and np.any(p.imag):
        raise ValueError("the dual program is only defined for a real right-hand side")
    p = np.real(p).astype(float)
    _check_full_row_rank(vt)
    n_rows, n_cols = vt.shape
    v = vt.T
    eye = np.eye(n_cols)
    zero = np.zeros((n_cols, n_cols))
    constraints = np.block([[v, -v, eye, zero], [-v, v, zero, eye]])
    objective = np.concatenate([-p, p, np.zeros(2 * n_cols)])
    result = simplex_solve(LinearProgram(constraints, np.ones(2 * n_cols), objective), settings)

    z = result.x[:n_rows] - result.x[n_rows: 2 * n_rows]
    c = result.duals[n_cols:] - result.duals[:n_cols]
    return L1Solution(
        c=c,
        z=z,
        value=float(z @ p),
        status=result.status,
        support_threshold=settings.support_threshold,
        iterations=result.iterations,
        extra={"primal_value": float(np.sum(np.abs(c)))},
    )
