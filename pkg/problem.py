"""
problem.py
Problem files: JSON input describing a candidate domain, a degree and an external point.

  {
    "schema_version": 1,
    "domain": {"type": "chebyshev-extreme", "degree": 2},
    "degree": 2,
    "dim": 1,
    "basis": "chebyshev",
    "external_point": [2.0]
  }

Complex coordinates of the external point are written as {"re": ..., "im": ...}.
"""

import hashlib
import json
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from design import CandidateSet
from domains import DOMAIN_TYPES, CandidateDomain, build_points
from polybasis import BasisKind, PolyBasis, default_basis

SCHEMA_VERSION = 1


class ProblemFileError(ValueError):
    """Malformed or schema-invalid problem file; the message names the field or line."""


class ComplexNumber(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    re: float
    im: float


Scalar = float | ComplexNumber


def encode_scalars(values) -> list[Scalar]:
    """Numbers for JSON: real entries stay floats, complex ones become {"re", "im"}."""
    arr = np.asarray(values)
    if np.iscomplexobj(arr) and np.any(arr.imag):
        return [ComplexNumber(re=float(v.real), im=float(v.imag)) for v in arr.ravel()]
    return [float(v) for v in np.real(arr).ravel()]


def decode_scalars(values: list[Scalar]) -> np.ndarray:
    if any(isinstance(v, ComplexNumber) for v in values):
        return np.array(
            [complex(v.re, v.im) if isinstance(v, ComplexNumber) else complex(v) for v in values]
        )
    return np.array(values, dtype=float)


class ProblemFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    domain: CandidateDomain
    degree: int = Field(ge=1)
    dim: int = Field(default=1, ge=1)
    basis: BasisKind | None = None
    external_point: list[Scalar] = Field(min_length=1)

    @model_validator(mode="after")
    def _point_matches_dim(self) -> "ProblemFile":
        if len(self.external_point) != self.dim:
            raise ValueError(
                f"external_point has {len(self.external_point)} coordinate(s) but dim is {self.dim}"
            )
        return self

    # ------------------------------------------------------------------ #
    # Derived objects                                                      #
    # ------------------------------------------------------------------ #

    def poly_basis(self) -> PolyBasis:
        if self.basis is None:
            return default_basis(self.degree, self.dim)
        return PolyBasis(self.basis, self.degree, self.dim)

    def external_point_array(self) -> np.ndarray:
        return decode_scalars(self.external_point)

    def candidate_set(self) -> CandidateSet:
        return CandidateSet(build_points(self.domain, self.dim), self.external_point_array())

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        """SHA-256 of the canonical JSON, used to pair reports with their problem."""
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def format_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(part) for part in err["loc"]) or "<root>"
        msg = err["msg"]
        if err["type"] in ("union_tag_invalid", "union_tag_not_found"):
            msg = f"unknown domain type, expected one of: {', '.join(sorted(DOMAIN_TYPES))}"
        parts.append(f"field '{loc}': {msg}")
    return "; ".join(parts)


def parse_problem(text: str, source: str = "<problem>") -> ProblemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return ProblemFile.model_validate(data)
    except ValidationError as exc:
        raise ProblemFileError(f"{source}: {format_validation_error(exc)}") from exc


def load_problem(path: str | Path) -> ProblemFile:
    path = Path(path)
    if not path.exists():
        raise ProblemFileError(f"problem file not found: {path}")
    return parse_problem(path.read_text(encoding="utf-8"), str(path))
