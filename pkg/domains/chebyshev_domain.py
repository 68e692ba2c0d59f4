"""
domains/chebyshev_domain.py
ChebyshevExtremeDomain: the n+1 extrema of T_n on [-1, 1] (tensor grid for d > 1).
"""

import itertools
from typing import ClassVar, Literal

import numpy as np
from pydantic import Field

from domains.base import BaseCandidateDomain
from polybasis import chebyshev_extreme_points


class ChebyshevExtremeDomain(BaseCandidateDomain):
    domain_type: ClassVar[str] = "chebyshev-extreme"

    type: Literal["chebyshev-extreme"] = "chebyshev-extreme"
    degree: int = Field(ge=1)

    def build_points(self, dim: int) -> np.ndarray:
        nodes = chebyshev_extreme_points(self.degree)
        if dim == 1:
            return nodes[:, None]
        return np.array(list(itertools.product(nodes, repeat=dim)))
