"""
report.py
Design reports: JSON report files, CSV export of (node, weight) rows and a markdown digest.

Floats are written with Python's shortest round-trip repr, so reading a report
back gives bit-identical weights. Values that cannot be computed (certificate
numbers of a degenerate design) are written as null.
"""

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from design import Certificate, DesignMeasure, VandermondeMatrix, Verdict, design_mode
from l1solver import L1Solution
from polybasis import BasisKind
from problem import SCHEMA_VERSION, ProblemFile, Scalar, encode_scalars, format_validation_error


class ReportFileError(ValueError):
    """Malformed report file."""


class SupportEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    index: int
    coords: list[float]
    weight: float


class CertificateBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gap: float | None
    sign_residual: float | None
    off_support_excess: float | None = None
    dual_bound: float | None = None
    lower_bound_check: bool | None = None
    verdict: Verdict
    message: str = ""


class ReportFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    generated_at: str | None = None
    problem_digest: str
    mode: Literal["real", "interpolation", "complex-stacked"]
    basis: BasisKind
    degree: int
    dim: int
    external_point: list[Scalar]
    weights: list[float]
    support: list[SupportEntry]
    christoffel_value: float
    growth_value: float
    primal_c: list[Scalar]
    dual_z: list[Scalar]
    certificate: CertificateBlock
    degenerate: bool = False
    caveats: list[str] = []


def _finite_or_none(value: float) -> float | None:
    return None if value is None or not math.isfinite(value) else float(value)


def build_report(
    problem: ProblemFile,
    v: VandermondeMatrix,
    design: DesignMeasure,
    solution: L1Solution,
    certificate: Certificate,
    generated_at: datetime | None = None,
    timestamp: bool = True,
) -> ReportFile:
    """Assemble the report for one solved problem; `timestamp=False` leaves generated_at empty."""
    if timestamp and generated_at is None:
        generated_at = datetime.now(timezone.utc)
    points = v.candidates.points
    support = [
        SupportEntry(index=int(i), coords=points[i].tolist(), weight=float(design.weights[i]))
        for i in design.support
    ]
    return ReportFile(
        generated_at=generated_at.isoformat() if timestamp else None,
        problem_digest=problem.digest(),
        mode=design_mode(v),
        basis=v.basis.kind,
        degree=v.basis.degree,
        dim=v.basis.dim,
        external_point=encode_scalars(v.candidates.external_point),
        weights=[float(w) for w in design.weights],
        support=support,
        christoffel_value=float(design.christoffel_value),
        growth_value=float(design.growth_value),
        primal_c=encode_scalars(solution.c),
        dual_z=encode_scalars(solution.z),
        certificate=CertificateBlock(
            gap=_finite_or_none(certificate.duality_gap),
            sign_residual=_finite_or_none(certificate.sign_residual),
            off_support_excess=_finite_or_none(certificate.off_support_excess),
            dual_bound=_finite_or_none(certificate.dual_bound),
            lower_bound_check=certificate.lower_bound_check,
            verdict=certificate.verdict,
            message=certificate.message,
        ),
        degenerate=design.degenerate,
        caveats=list(certificate.caveats),
    )


# ------------------------------------------------------------------ #
# JSON                                                                 #
# ------------------------------------------------------------------ #

def dumps_report(report: ReportFile) -> str:
    return json.dumps(report.model_dump(mode="json"), indent=2) + "\n"


def write_report(report: ReportFile, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report), encoding="utf-8")
    return path


def load_report(path: str | Path) -> ReportFile:
    path = Path(path)
    if not path.exists():
        raise ReportFileError(f"report file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ReportFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return ReportFile.model_validate(data)
    except ValidationError as exc:
        raise ReportFileError(f"{path}: {format_validation_error(exc)}") from exc


# ------------------------------------------------------------------ #
# CSV and markdown                                                     #
# ------------------------------------------------------------------ #

def write_csv(report: ReportFile, points: np.ndarray, path: str | Path) -> Path:
    """One row per candidate: coordinates, weight and a support flag."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    in_support = {entry.index for entry in report.support}
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow([f"x{k + 1}" for k in range(report.dim)] + ["weight", "in_support"])
        for i, (coords, weight) in enumerate(zip(points, report.weights)):
            writer.writerow([repr(float(c)) for c in coords] + [repr(weight), int(i in in_support)])
    return path


def _format_point(values: list[Scalar]) -> str:
    parts = [
        f"{v.re:g}{v.im:+g}i" if not isinstance(v, float) else f"{v:g}"
        for v in values
    ]
    return "(" + ", ".join(parts) + ")"


def build_markdown(report: ReportFile) -> str:
    """Human-readable digest: header, support table, certificate and caveats."""
    lines = [
        f"# Optimal prediction design at z0 = {_format_point(report.external_point)}",
        "",
        f"> basis **{report.basis.value}**, degree **{report.degree}**, dim **{report.dim}**, "
        f"mode **{report.mode}**",
    ]
    if report.generated_at:
        lines.append(f"> Generated at **{report.generated_at}**")
    lines += [
        "",
        f"- K = {report.christoffel_value:.12g}",
        f"- sqrt(K) = {report.growth_value:.12g}",
        f"- support size {len(report.support)} of {len(report.weights)} candidates"
        + (" (degenerate)" if report.degenerate else ""),
        "",
        "## Support",
        "",
        "| index | point | weight |",
        "|---:|:---|---:|",
    ]
    for entry in report.support:
        point = "(" + ", ".join(f"{c:g}" for c in entry.coords) + ")"
        lines.append(f"| {entry.index} | {point} | {entry.weight:.12g} |")

    cert = report.certificate
    lines += ["", "## Certificate", "", f"- verdict: **{cert.verdict.value}**"]
    if cert.gap is not None:
        lines.append(f"- duality gap: {cert.gap:.3e}")
    if cert.sign_residual is not None:
        lines.append(f"- sign residual: {cert.sign_residual:.3e}")
    if cert.message:
        lines.append(f"- {cert.message}")

    if report.caveats:
        lines += ["", "## Caveats", ""]
        lines += [f"- {c}" for c in report.caveats]
    return "\n".join(lines) + "\n"
