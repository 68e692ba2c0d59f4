"""
domains/grid_domain.py
GridDomain: m equispaced points on [a, b] including both endpoints (tensor grid for d > 1).
"""

import itertools
from typing import ClassVar, Literal

import numpy as np
from pydantic import Field, field_validator

from domains.base import BaseCandidateDomain


class GridDomain(BaseCandidateDomain):
    domain_type: ClassVar[str] = "grid"

    type: Literal["grid"] = "grid"
    interval: tuple[float, float]
    count: int = Field(ge=2)

    @field_validator("interval")
    @classmethod
    def _ordered(cls, value: tuple[float, float]) -> tuple[float, float]:
        if value[0] >= value[1]:
            raise ValueError(f"interval [{value[0]}, {value[1]}] must satisfy a < b")
        return value

    def build_points(self, dim: int) -> np.ndarray:
        nodes = np.linspace(self.interval[0], self.interval[1], self.count)
        if dim == 1:
            return nodes[:, None]
        return np.array(list(itertools.product(nodes, repeat=dim)))
