"""
domains/__init__.py
Public API for the domains package.
"""

from typing import Annotated, Union

import numpy as np
from pydantic import Field

from domains.base import BaseCandidateDomain
from domains.chebyshev_domain import ChebyshevExtremeDomain
from domains.points_domain import PointsDomain
from domains.grid_domain import GridDomain

CandidateDomain = Annotated[
    Union[ChebyshevExtremeDomain, PointsDomain, GridDomain],
    Field(discriminator="type"),
]

DOMAIN_TYPES = {
    cls.domain_type: cls for cls in (ChebyshevExtremeDomain, PointsDomain, GridDomain)
}


def build_points(domain: BaseCandidateDomain, dim: int) -> np.ndarray:
    """(M, d) candidate array for a parsed domain block."""
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    return domain.build_points(dim)


__all__ = [
    "BaseCandidateDomain",
    "ChebyshevExtremeDomain",
    "PointsDomain",
    "GridDomain",
    "CandidateDomain",
    "DOMAIN_TYPES",
    "build_points",
]
