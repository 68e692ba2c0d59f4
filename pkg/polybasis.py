"""
polybasis.py
Polynomial bases of total degree <= n in d variables, evaluated at real or complex points.

Basis functions are products of univariate factors (powers x^k or Chebyshev T_k(x))
indexed by exponent vectors alpha with |alpha| <= n. Ordering is graded: all
exponents of total degree 0, then 1, then 2, ... and within one degree the
exponent vectors are sorted in descending lexicographic order, so the first
variable varies slowest:

  d = 2, n = 2  ->  1, x, y, x^2, xy, y^2

Truncating an evaluation row at dimension(n') for n' < n gives the degree-n' row.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterator

import numpy as np


class UnisolvenceError(ValueError):
    """Raised when a node set cannot carry unique interpolation of the requested degree."""


class BasisKind(str, Enum):
    MONOMIAL = "monomial"
    CHEBYSHEV = "chebyshev"
    TOTAL_DEGREE_MONOMIAL = "total-degree-monomial"
    TOTAL_DEGREE_CHEBYSHEV = "total-degree-chebyshev-product"

    @property
    def uses_chebyshev(self) -> bool:
        return self in (BasisKind.CHEBYSHEV, BasisKind.TOTAL_DEGREE_CHEBYSHEV)


def _graded_exponents(total: int, dim: int) -> Iterator[tuple[int, ...]]:
    """Exponent vectors summing to `total`, in descending lexicographic order."""
    if dim == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _graded_exponents(total - first, dim - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class PolyBasis:
    """
    A graded polynomial basis {P_1, ..., P_N}.

    `monomial` and `chebyshev` are the univariate names; for dim > 1 they mean the
    same total-degree product space as their `total-degree-*` counterparts.
    """

    kind: BasisKind
    degree: int
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", BasisKind(self.kind))
        if self.degree < 0:
            raise ValueError(f"degree must be nonnegative, got {self.degree}")
        if self.dim < 1:
            raise ValueError(f"spatial dimension must be positive, got {self.dim}")

    def dimension(self) -> int:
        return math.comb(self.degree + self.dim, self.dim)

    @cached_property
    def exponents(self) -> np.ndarray:
        """(N, d) integer array of exponent vectors in basis order."""
        rows = [
            alpha
            for total in range(self.degree + 1)
            for alpha in _graded_exponents(total, self.dim)
        ]
        return np.array(rows, dtype=int).reshape(len(rows), self.dim)

    def _factor_table(self, x: np.ndarray) -> np.ndarray:
        """Univariate factors P_0..P_n at every entry of x; shape x.shape + (n+1,)."""
        table = np.empty(x.shape + (self.degree + 1,), dtype=np.result_type(x, float))
        table[..., 0] = 1.0
        if self.degree >= 1:
            table[..., 1] = x
        for k in range(2, self.degree + 1):
            if self.kind.uses_chebyshev:
                table[..., k] = 2.0 * x * table[..., k - 1] - table[..., k - 2]
            else:
                table[..., k] = x * table[..., k - 1]
        return table

    def evaluate(self, points) -> np.ndarray:
        """
        Evaluate every basis function at every point.

        Args:
            points: array of shape (M, d) (or (M,) when d == 1), real or complex.

        Returns:
            (M, N) array with entry [i, j] = P_j(x_i).
        """
        pts = np.asarray(points)
        if pts.ndim == 1 and self.dim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(
                f"points must have {self.dim} coordinate(s) each, got array of shape {pts.shape}"
            )
        result = np.ones((pts.shape[0], self.dimension()), dtype=np.result_type(pts, float))
        exps = self.exponents
        for k in range(self.dim):
            table = self._factor_table(pts[:, k])
            result *= table[:, exps[:, k]]
        return result


def dimension(basis: PolyBasis) -> int:
    """N = binomial(n + d, d)."""
    return basis.dimension()


def default_basis(degree: int, dim: int = 1) -> PolyBasis:
    """Chebyshev for univariate problems, total-degree monomials otherwise."""
    if dim == 1:
        return PolyBasis(BasisKind.CHEBYSHEV, degree, 1)
    return PolyBasis(BasisKind.TOTAL_DEGREE_MONOMIAL, degree, dim)


def degree_for_count(count: int, dim: int = 1) -> int:
    """Return n with binomial(n + d, d) == count, the degree a square node set interpolates."""
    n = 0
    while math.comb(n + dim, dim) < count:
        n += 1
    if math.comb(n + dim, dim) != count:
        raise UnisolvenceError(
            f"{count} points in dimension {dim} match no polynomial space dimension"
        )
    return n


def as_point(coords, dim: int) -> np.ndarray:
    """Coerce an evaluation point to a length-d vector (complex allowed)."""
    point = np.atleast_1d(np.asarray(coords))
    if point.shape != (dim,):
        raise ValueError(f"point must have {dim} coordinate(s), got {point.tolist()}")
    if np.iscomplexobj(point) and not np.any(point.imag):
        point = point.real
    return point.astype(np.result_type(point, float))


def as_points(coords, dim: int) -> np.ndarray:
    """Coerce candidate coordinates to a real (M, d) array."""
    pts = np.asarray(coords)
    if pts.ndim == 1 and dim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"candidate points must have {dim} coordinate(s) each, got shape {pts.shape}")
    if np.iscomplexobj(pts):
        if np.any(pts.imag):
            raise ValueError("candidate points must have real coordinates; only z0 may be complex")
        pts = pts.real
    return pts.astype(float)


def eval_basis(basis: PolyBasis, point) -> np.ndarray:
    """(P_1(point), ..., P_N(point)) in basis order."""
    return basis.evaluate(as_point(point, basis.dim)[None, :])[0]


def chebyshev_value(n: int, x):
    """T_n(x) by the three-term recurrence; valid off [-1, 1] and for complex x."""
    return PolyBasis(BasisKind.CHEBYSHEV, n)._factor_table(np.asarray(x))[..., n]


def chebyshev_extreme_points(n: int) -> np.ndarray:
    """
    The n+1 extrema cos(k*pi/n), k = 0..n, sorted ascending.

    Computed as sin(pi*(2k - n)/(2n)) so that the set is exactly symmetric,
    the endpoints are exactly -1 and 1 and the midpoint (n even) is exactly 0.
    """
    if n < 1:
        raise ValueError(f"Chebyshev extreme points need n >= 1, got {n}")
    return np.sin(np.pi * np.arange(-n, n + 1, 2) / (2 * n))


def numerical_rank(matrix: np.ndarray) -> int:
    return int(np.linalg.matrix_rank(np.asarray(matrix)))


def lagrange_values(basis: PolyBasis, nodes, z0) -> np.ndarray:
    """
    Values (l_1(z0), ..., l_N(z0)) of the fundamental Lagrange polynomials.

    Solves V^t c = p where V is the square Vandermonde matrix on the nodes and
    p the basis evaluated at z0.
    """
    pts = as_points(nodes, basis.dim)
    n_basis = basis.dimension()
    if pts.shape[0] != n_basis:
        raise UnisolvenceError(
            f"interpolation needs exactly {n_basis} nodes for degree {basis.degree}, got {pts.shape[0]}"
        )
    vdm = basis.evaluate(pts)
    if numerical_rank(vdm) < n_basis:
        raise UnisolvenceError(f"nodes are not unisolvent for degree {basis.degree}")
    return np.linalg.solve(vdm.T, eval_basis(basis, z0))
