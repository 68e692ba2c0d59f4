"""
domains/base.py
Abstract base class that every candidate-set domain must implement.
"""

from abc import ABC, abstractmethod
from typing import ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict


class BaseCandidateDomain(BaseModel, ABC):
    """
    Contract every candidate domain must satisfy.

    Subclasses must define:
      - domain_type (class attribute), matching the "type" value in a problem file
      - type (Literal field), the pydantic discriminator
      - build_points(dim), the finite candidate set as an (M, d) real array
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    domain_type: ClassVar[str]  # e.g. "chebyshev-extreme", "points", "grid"

    @abstractmethod
    def build_points(self, dim: int) -> np.ndarray:
        """
        Materialise the candidate set.

        Args:
            dim: Spatial dimension d of the problem.

        Returns:
            (M, d) float array of distinct candidate points.
        """
        ...
