"""
design.py
Optimal prediction designs on finite candidate sets.

Pipeline:
  1. vandermonde()         - V_ij = P_j(x_i) with a rank check
  2. optimal_design()      - l1 solve of V^t c = p, weights w = |c| / ||c||_1
  3. certify()             - stationarity R_k^t G^-1 p = +-sqrt(K) on the support,
                             |R_k^t G^-1 p| <= sqrt(K) off it, duality gap

K(w) = p^* G(w)^-1 p with G(w) = V^t W V is the reciprocal Christoffel
function at the external point. It is convex and homogeneous of order -1 in w,
and its minimum over the probability simplex equals ||c*||_1^2.

Certificate tolerance is read from OPTIPRED_TOL (default 1e-8).
"""

import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from polybasis import (
    PolyBasis,
    UnisolvenceError,
    as_point,
    as_points,
    default_basis,
    degree_for_count,
    eval_basis,
    lagrange_values,
    numerical_rank,
)
from l1solver import L1Solution, LPStatus, SolverSettings, solve_l1_primal

RELATIVE_PIVOT_FLOOR = 1e-12
SUPPORT_THRESHOLD = 1e-10   # relative to the largest weight

GRID_CAVEAT = (
    "optimal for the candidate grid; optimality over a continuous domain holds only "
    "if the grid contains the support of an optimal measure"
)
STACKED_CAVEAT = (
    "complex external point with more candidates than basis functions: weights come "
    "from the stacked real/imaginary l1 program, certification is replaced by the oracle cross-check"
)


class DegenerateDesignError(ValueError):
    """Gram matrix of the design is singular: some polynomial has zero variance."""


class NotApplicableError(ValueError):
    """Operation has no meaning for this kind of solution (complex-stacked mode)."""


def certificate_tolerance() -> float:
    return float(os.getenv("OPTIPRED_TOL", "1e-8"))


# ------------------------------------------------------------------ #
# Domain types                                                         #
# ------------------------------------------------------------------ #

@dataclass(frozen=True)
class CandidateSet:
    """Finite real candidate set X and the external point z0 (which may be complex)."""

    points: np.ndarray
    external_point: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points)
        dim = 1 if pts.ndim == 1 else pts.shape[1]
        pts = as_points(pts, dim)
        z0 = as_point(self.external_point, dim)
        if pts.shape[0] == 0:
            raise ValueError("candidate set is empty")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValueError("candidate points must be distinct")
        if not np.iscomplexobj(z0) and np.any(np.all(pts == z0, axis=1)):
            raise ValueError(f"external point {z0.tolist()} is one of the candidate points")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "external_point", z0)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.external_point))


@dataclass(frozen=True)
class VandermondeMatrix:
    entries: np.ndarray
    basis: PolyBasis
    candidates: CandidateSet
    rank: int

    def external_values(self) -> np.ndarray:
        """p = (P_1(z0), ..., P_N(z0))."""
        return eval_basis(self.basis, self.candidates.external_point)


@dataclass(frozen=True)
class DesignMeasure:
    weights: np.ndarray
    christoffel_value: float
    growth_value: float
    degenerate: bool = False
    threshold: float = SUPPORT_THRESHOLD

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("design weights must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise ValueError("design weights sum to zero")
        if abs(total - 1.0) > 1e-12:
            w = w / total
        object.__setattr__(self, "weights", w)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > self.threshold * self.weights.max())


class Verdict(str, Enum):
    CERTIFIED = "certified"
    FAILED = "failed"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class Certificate:
    duality_gap: float
    sign_residual: float
    off_support_excess: float
    stationarity: np.ndarray
    lower_bound_check: bool | None
    verdict: Verdict
    christoffel_value: float = float("nan")
    dual_bound: float = float("nan")
    message: str = ""
    caveats: list[str] = field(default_factory=list)


# ------------------------------------------------------------------ #
# Matrices and the Christoffel function                                #
# ------------------------------------------------------------------ #

def matrix_entries(v) -> np.ndarray:
    return v.entries if isinstance(v, VandermondeMatrix) else np.asarray(v)


def vandermonde(basis: PolyBasis, candidates: CandidateSet) -> VandermondeMatrix:
    if candidates.dim != basis.dim:
        raise ValueError(
            f"candidate points are {candidates.dim}-dimensional but the basis is {basis.dim}-dimensional"
        )
    entries = basis.evaluate(candidates.points)
    rank = numerical_rank(entries)
    if rank < basis.dimension():
        raise UnisolvenceError(
            f"candidate set not unisolvent for degree {basis.degree} "
            f"(rank {rank} < {basis.dimension()} with {candidates.size} points)"
        )
    return VandermondeMatrix(entries, basis, candidates, rank)


def gram(v, w) -> np.ndarray:
    """G = V^* W V. Zero weights drop their rows; weights need not be normalised."""
    entries = matrix_entries(v)
    w = np.asarray(w, dtype=float)
    return (entries.conj().T * w) @ entries


def _cholesky(g: np.ndarray) -> np.ndarray:
    try:
        lower = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateDesignError(
            "degenerate design: some polynomial has zero variance"
        ) from exc
    pivots = np.abs(np.diag(lower)) ** 2
    if pivots.min() <= RELATIVE_PIVOT_FLOOR * np.abs(np.diag(g)).max():
        raise DegenerateDesignError("degenerate design: some polynomial has zero variance")
    return lower


def _gram_solve(g: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, float]:
    """Return (G^-1 p, p^* G^-1 p) through the Cholesky factor."""
    lower = _cholesky(g)
    half = np.linalg.solve(lower, p)
    u = np.linalg.solve(lower.conj().T, half)
    return u, float(np.sum(np.abs(half) ** 2))


def christoffel(g, p) -> float:
    """K = p^* G^-1 p (conjugate pairing, so K >= 0 also for complex p)."""
    return _gram_solve(np.asarray(g), np.asarray(p))[1]


def stationarity_vector(v, w, p) -> np.ndarray:
    """The M values R_k^t G^-1 p."""
    u, _ = _gram_solve(gram(v, w), np.asarray(p))
    return matrix_entries(v) @ u


def christoffel_gradient(v, w, p) -> np.ndarray:
    """dK/dw_k = -|R_k^t G^-1 p|^2."""
    return -np.abs(stationarity_vector(v, w, p)) ** 2


# ------------------------------------------------------------------ #
# Closed forms                                                         #
# ------------------------------------------------------------------ #

def _lebesgue_design(values: np.ndarray) -> DesignMeasure:
    magnitudes = np.abs(values)
    lebesgue = float(magnitudes.sum())
    if lebesgue == 0.0:
        raise ValueError("all Lagrange values vanish at the external point")
    degenerate = bool(np.any(magnitudes <= SUPPORT_THRESHOLD * magnitudes.max()))
    return DesignMeasure(
        weights=magnitudes / lebesgue,
        christoffel_value=lebesgue ** 2,
        growth_value=lebesgue,
        degenerate=degenerate,
    )


def hoel_levine_design(nodes, z0, basis: PolyBasis | None = None) -> DesignMeasure:
    """
    Optimal weights on a unisolvent node set: w_i = |l_i(z0)| / sum_j |l_j(z0)|.

    K = (sum_i |l_i(z0)|)^2. A node whose Lagrange polynomial vanishes at z0
    gets weight zero and the design is flagged degenerate.
    """
    pts = np.asarray(nodes)
    dim = 1 if pts.ndim == 1 else pts.shape[1]
    if basis is None:
        basis = default_basis(degree_for_count(pts.shape[0], dim), dim)
    return _lebesgue_design(lagrange_values(basis, pts, z0))


# ------------------------------------------------------------------ #
# l1-based design                                                      #
# ------------------------------------------------------------------ #

def interpolation_solution(v: VandermondeMatrix, p, settings: SolverSettings | None = None) -> L1Solution:
    """Square case in closed form: c = l(z0) and Q takes conj(sgn c_i) at the nodes."""
    settings = settings or SolverSettings.from_env()
    p = np.asarray(p)
    c = np.linalg.solve(v.entries.T, p)
    magnitudes = np.abs(c)
    phases = np.divide(c, magnitudes, out=np.zeros_like(c), where=magnitudes > 0)
    z = np.linalg.solve(v.entries, phases.conj())
    return L1Solution(
        c=c,
        z=z,
        value=float(magnitudes.sum()),
        status=LPStatus.OPTIMAL,
        support_threshold=settings.support_threshold,
    )


def design_mode(v: VandermondeMatrix) -> str:
    if not v.candidates.is_complex:
        return "real"
    if v.candidates.size == v.basis.dimension():
        return "interpolation"
    return "complex-stacked"


def optimal_design(
    basis: PolyBasis,
    candidates: CandidateSet,
    settings: SolverSettings | None = None,
) -> tuple[DesignMeasure, L1Solution]:
    """
    Solve min ||c||_1 s.t. V^t c = p and return w = |c| / ||c||_1 with K = ||c||_1^2.

    Complex z0 is solved in closed form when the candidates are exactly N
    unisolvent points; otherwise the stacked program is used and K is
    evaluated from the Gram matrix of the resulting weights.
    """
    settings = settings or SolverSettings.from_env()
    v = vandermonde(basis, candidates)
    p = v.external_values()
    mode = design_mode(v)
    print(f"[design] M={candidates.size} N={basis.dimension()} mode={mode}", flush=True)

    if mode == "interpolation":
        solution = interpolation_solution(v, p, settings)
    else:
        solution = solve_l1_primal(v.entries.T, p, settings)

    norm = solution.l1_norm
    if norm == 0.0:
        raise ValueError("external values vanish identically; no design to compute")
    weights = np.abs(solution.c) / norm
    degenerate = solution.support.size < basis.dimension()

    if mode == "complex-stacked":
        try:
            k_value = christoffel(gram(v, weights), p)
        except DegenerateDesignError:
            # K(|c| / ||c||_1) <= ||c||_1^2 for any complex representation c
            k_value, degenerate = norm ** 2, True
        design = DesignMeasure(weights, k_value, float(np.sqrt(k_value)), degenerate)
    else:
        design = DesignMeasure(weights, norm ** 2, norm, degenerate)

    print(
        f"[design] ||c||_1 = {norm:.12g}, support size {design.support.size}, "
        f"K = {design.christoffel_value:.12g}{' (degenerate)' if degenerate else ''}",
        flush=True,
    )
    return design, solution


@dataclass(frozen=True)
class ExtremalPolynomial:
    coefficients: np.ndarray
    node_values: np.ndarray
    sup_norm: float
    value_at_z0: float
    sign_agreement: float


def extremal_polynomial(solution: L1Solution, v: VandermondeMatrix) -> ExtremalPolynomial:
    """
    Q_n from the dual vector: coefficients z in the working basis, normalised so
    that Q(z0) = |Q(z0)| > 0.

    sign_agreement is max over the support of |Q(x_i) - conj(sgn c_i)|, which is
    zero at an optimal pair.
    """
    if solution.stacked:
        raise NotApplicableError("no extremal polynomial in the complex-stacked mode")
    z = np.asarray(solution.z)
    p = v.external_values()
    at_z0 = complex(z @ p)
    if abs(at_z0) > 0:
        z = z * (abs(at_z0) / at_z0)
        if not np.iscomplexobj(solution.c):
            z = z.real
    node_values = v.entries @ z
    support = solution.support
    c = solution.c[support]
    expected = (c / np.abs(c)).conj()
    agreement = float(np.max(np.abs(node_values[support] - expected), initial=0.0))
    return ExtremalPolynomial(
        coefficients=z,
        node_values=node_values,
        sup_norm=float(np.max(np.abs(node_values))),
        value_at_z0=abs(at_z0),
        sign_agreement=agreement,
    )


# ------------------------------------------------------------------ #
# Certificates                                                         #
# ------------------------------------------------------------------ #

def reconstruct_coefficients(design: DesignMeasure, v, p) -> np.ndarray:
    """c = sqrt(K) W s with s_k = R_k^t G^-1 p / sqrt(K); always satisfies V^t c = p."""
    return design.weights * stationarity_vector(v, design.weights, p)


def certify(
    design: DesignMeasure,
    v,
    p,
    solution: L1Solution | None = None,
    tol: float | None = None,
) -> Certificate:
    """
    Check the optimality conditions of a design.

    On the support |R_k^t G^-1 p| must equal sqrt(K); off the support it must
    not exceed sqrt(K). The duality gap compares sqrt(K) with the best lower
    bound on min ||c||_1: the l1 value when a solution is supplied, otherwise
    K / max_k |R_k^t G^-1 p| (the polynomial with coefficients G^-1 p scaled to
    sup-norm one on X is dual feasible).

    A negative gap means the supplied solution is worse than the design and
    fails the certificate. lower_bound_check is ||c||_1 >= sqrt(K) for the
    supplied solution, and None when there is none to check.
    """
    tol = certificate_tolerance() if tol is None else tol
    p = np.asarray(p)
    caveats = []
    if isinstance(v, VandermondeMatrix) and v.candidates.size > v.basis.dimension():
        caveats.append(GRID_CAVEAT)

    weights = design.weights
    try:
        u, k_value = _gram_solve(gram(v, weights), p)
    except DegenerateDesignError as exc:
        return Certificate(
            duality_gap=float("nan"),
            sign_residual=float("nan"),
            off_support_excess=float("nan"),
            stationarity=np.full(weights.size, np.nan),
            lower_bound_check=None,
            verdict=Verdict.NOT_APPLICABLE,
            message=f"{exc}; the Gram matrix cannot be inverted, K is taken from the closed form",
            caveats=caveats,
        )

    stationarity = matrix_entries(v) @ u
    root_k = float(np.sqrt(k_value))
    normalised = np.abs(stationarity) / root_k
    support = design.support
    off_support = np.setdiff1d(np.arange(weights.size), support)
    sign_residual = float(np.max(np.abs(normalised[support] - 1.0), initial=0.0))
    off_excess = float(max(0.0, np.max(normalised[off_support], initial=0.0) - 1.0))

    dual_bound = k_value / float(np.max(np.abs(stationarity)))
    bound = solution.value if solution is not None and not solution.stacked else dual_bound
    gap = (root_k - bound) / root_k

    lower_bound_ok = None
    if solution is not None and not solution.stacked:
        lower_bound_ok = bool(solution.value >= root_k * (1.0 - tol))

    if solution is not None and solution.stacked:
        caveats.append(STACKED_CAVEAT)
        verdict = Verdict.NOT_APPLICABLE
        message = "complex-stacked mode: run verify --oracle for the cross-check"
    elif abs(gap) <= tol and sign_residual <= tol and off_excess <= tol:
        verdict = Verdict.CERTIFIED
        message = "stationarity holds on the support and the duality gap is closed"
    else:
        verdict = Verdict.FAILED
        message = (
            f"gap {gap:.3e}, sign residual {sign_residual:.3e}, "
            f"off-support excess {off_excess:.3e} (tolerance {tol:.1e})"
        )

    return Certificate(
        duality_gap=float(gap),
        sign_residual=sign_residual,
        off_support_excess=off_excess,
        stationarity=stationarity,
        lower_bound_check=lower_bound_ok,
        verdict=verdict,
        christoffel_value=k_value,
        dual_bound=dual_bound,
        message=message,
        caveats=caveats,
    )
