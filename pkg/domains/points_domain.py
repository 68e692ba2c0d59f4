"""
domains/points_domain.py
PointsDomain: an explicit list of real candidate coordinates.
"""

from typing import ClassVar, Literal

import numpy as np
from pydantic import Field

from domains.base import BaseCandidateDomain


class PointsDomain(BaseCandidateDomain):
    domain_type: ClassVar[str] = "points"

    type: Literal["points"] = "points"
    coords: list[list[float]] = Field(min_length=1)

    def build_points(self, dim: int) -> np.ndarray:
        for i, row in enumerate(self.coords):
            if len(row) != dim:
                raise ValueError(f"domain.coords[{i}] has {len(row)} coordinate(s), expected {dim}")
        return np.array(self.coords, dtype=float)
