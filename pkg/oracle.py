"""
oracle.py
Brute-force cross-checks for the l1 design pipeline.

grid_min_christoffel enumerates every weight vector with entries in {0, 1/r, ..., 1}
and then refines the incumbent with pairwise mass moves of shrinking size. It
never touches the simplex solver, so agreement with optimal_design is an
independent confirmation of the l1 value.

Grid size is binomial(r + M - 1, M - 1); OPTIPRED_GRID_CAP (default 1e7) bounds it.
"""

import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np

from design import (
    VandermondeMatrix,
    matrix_entries,
    christoffel,
    christoffel_gradient,
    gram,
)
from polybasis import chebyshev_value

CHUNK_SIZE = 50_000
MAX_MOVES_PER_ROUND = 10_000
ZERO_WEIGHT = 1e-14   # refinement leaves rounding dust below this


class GridCapExceededError(ValueError):
    """The requested simplex grid has more points than OPTIPRED_GRID_CAP allows."""


def _grid_cap_from_env() -> int:
    return int(float(os.getenv("OPTIPRED_GRID_CAP", "1e7")))


@dataclass(frozen=True)
class GridSpec:
    resolution: int
    refinement_rounds: int = 0
    cap: int = field(default_factory=_grid_cap_from_env)

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError(f"grid resolution must be positive, got {self.resolution}")
        if self.refinement_rounds < 0:
            raise ValueError(f"refinement rounds must be nonnegative, got {self.refinement_rounds}")

    def grid_size(self, m: int) -> int:
        return math.comb(self.resolution + m - 1, m - 1)


@dataclass(frozen=True)
class OracleResult:
    weights: np.ndarray
    christoffel_value: float
    history: list[float]
    evaluations: int


# ------------------------------------------------------------------ #
# Batched evaluation                                                   #
# ------------------------------------------------------------------ #

class _BatchEvaluator:
    """K at many weight vectors at once; singular weight patterns evaluate to +inf."""

    def __init__(self, entries: np.ndarray, p: np.ndarray):
        self.entries = entries
        self.p = p
        self.n_basis = entries.shape[1]
        self.bits = (1 << np.arange(entries.shape[0], dtype=np.int64))
        self._rank_cache: dict[int, bool] = {}
        self.evaluations = 0

    def _full_rank(self, mask: int) -> bool:
        if mask not in self._rank_cache:
            rows = [i for i in range(self.entries.shape[0]) if mask >> i & 1]
            sub = self.entries[rows]
            self._rank_cache[mask] = (
                len(rows) >= self.n_basis and np.linalg.matrix_rank(sub) == self.n_basis
            )
        return self._rank_cache[mask]

    @staticmethod
    def _solve(grams: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        try:
            return np.linalg.solve(grams, rhs)[..., 0]
        except np.linalg.LinAlgError:
            pass
        # an exactly singular member poisons the batched call; solve one by one
        solved = np.full(rhs.shape[:2], np.nan, dtype=np.result_type(grams, rhs))
        for b in range(grams.shape[0]):
            try:
                solved[b] = np.linalg.solve(grams[b], rhs[b])[:, 0]
            except np.linalg.LinAlgError:
                continue
        return solved

    def __call__(self, weights: np.ndarray) -> np.ndarray:
        self.evaluations += weights.shape[0]
        masks = (weights > ZERO_WEIGHT).astype(np.int64) @ self.bits
        unique, inverse = np.unique(masks, return_inverse=True)
        valid = np.array([self._full_rank(int(m)) for m in unique])[inverse.ravel()]

        values = np.full(weights.shape[0], np.inf)
        if not valid.any():
            return values
        v = self.entries
        grams = np.einsum("bm,mi,mj->bij", weights[valid], v.conj(), v)
        rhs = np.broadcast_to(self.p, (grams.shape[0], self.n_basis))[..., None]
        solved = self._solve(grams, rhs)
        k_values = np.real(np.einsum("i,bi->b", self.p.conj(), solved))
        k_values[~np.isfinite(k_values) | (k_values <= 0)] = np.inf
        values[valid] = k_values
        return values


def _compositions(total: int, parts: int):
    """All weight-count vectors summing to `total`, in lexicographic order."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(total + parts - 2 - prev)
        yield row


def _refine(evaluate: _BatchEvaluator, weights: np.ndarray, best: float, step: float) -> tuple[np.ndarray, float]:
    """Move `step` of mass between pairs of candidates until no move improves K."""
    m = weights.size
    pairs = [(i, j) for i in range(m) for j in range(m) if i != j]
    for _ in range(MAX_MOVES_PER_ROUND):
        trials = np.repeat(weights[None, :], len(pairs), axis=0)
        for row, (i, j) in enumerate(pairs):
            amount = min(step, weights[i])
            trials[row, i] -= amount
            trials[row, j] += amount
        values = evaluate(trials)
        idx = int(np.argmin(values))
        if not values[idx] < best:
            break
        weights, best = trials[idx], float(values[idx])
    return weights, best


def grid_min_christoffel(v, p, spec: GridSpec) -> OracleResult:
    """
    Minimise K over the rational simplex grid of resolution r, then refine.

    Ties on the grid go to the lexicographically smallest weight vector.
    history[0] is the grid optimum and history[k] the incumbent after round k.

    Raises:
        GridCapExceededError: binomial(r + M - 1, M - 1) above spec.cap
    """
    entries = matrix_entries(v)
    p = np.asarray(p)
    m = entries.shape[0]
    size = spec.grid_size(m)
    if size > spec.cap:
        raise GridCapExceededError(
            f"simplex grid with r={spec.resolution} on {m} candidates has {size} points "
            f"(cap {spec.cap}); lower --resolution or raise OPTIPRED_GRID_CAP"
        )
    print(f"[oracle] enumerating {size} grid points (r={spec.resolution}, M={m})", flush=True)

    evaluate = _BatchEvaluator(entries, p)
    best, best_weights = np.inf, None
    compositions = _compositions(spec.resolution, m)
    while True:
        chunk = list(itertools.islice(compositions, CHUNK_SIZE))
        if not chunk:
            break
        weights = np.array(chunk, dtype=float) / spec.resolution
        values = evaluate(weights)
        idx = int(np.argmin(values))
        if values[idx] < best:
            best, best_weights = float(values[idx]), weights[idx]

    if best_weights is None:
        raise ValueError("no grid point gives a nonsingular Gram matrix")

    history = [best]
    step = 1.0 / (2 * spec.resolution)
    for _ in range(spec.refinement_rounds):
        best_weights, best = _refine(evaluate, best_weights, best, step)
        history.append(best)
        step /= 2

    print(f"[oracle] best K = {best:.12g} after {evaluate.evaluations} evaluations", flush=True)
    return OracleResult(best_weights, best, history, evaluate.evaluations)


# ------------------------------------------------------------------ #
# Gradient and closed-form checks                                      #
# ------------------------------------------------------------------ #

def _check_external(v) -> None:
    if not isinstance(v, VandermondeMatrix):
        return
    candidates = v.candidates
    if candidates.dim != 1 or candidates.is_complex:
        return
    z0 = float(candidates.external_point[0])
    xs = candidates.points[:, 0]
    if xs.min() <= z0 <= xs.max():
        raise ValueError(f"external point {z0} lies inside the candidate interval [{xs.min()}, {xs.max()}]")


def fd_gradient_check(v, p, w, step: float = 1e-6) -> float:
    """
    Worst deviation between central differences of K and the analytic gradient,
    relative to the largest analytic component.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("finite-difference check needs strictly positive weights")
    _check_external(v)
    analytic = christoffel_gradient(v, w, p)
    numeric = np.empty_like(analytic)
    for k in range(w.size):
        h = min(step, w[k] / 2)
        up, down = w.copy(), w.copy()
        up[k] += h
        down[k] -= h
        numeric[k] = (christoffel(gram(v, up), p) - christoffel(gram(v, down), p)) / (2 * h)
    return float(np.max(np.abs(numeric - analytic)) / np.max(np.abs(analytic)))


def growth_oracle_univariate(n: int, z0: float) -> float:
    """T_n(z0)^2, the minimal K over [-1, 1] for a real exterior point."""
    if np.iscomplexobj(z0) or isinstance(z0, complex):
        raise ValueError("growth oracle needs a real external point")
    if abs(z0) <= 1:
        raise ValueError(f"external point must satisfy |z0| > 1, got {z0}")
    return float(chebyshev_value(n, float(z0)) ** 2)
