"""
main.py
Entry point for the optimal prediction design tool.
Reads a problem file, computes the l1-optimal design, certifies it and writes a report.

Usage:
  python main.py design problems/chebyshev_n2.json -o reports/chebyshev_n2.json
  python main.py design problems/grid33.json -o out.json --csv out.csv --markdown out.md --no-timestamp
  python main.py hoel-levine -n 2 --z0 2
  python main.py hoel-levine -n 1 --z0 1i
  python main.py growth problems/chebyshev_n3.json
  python main.py verify problems/triangle.json reports/triangle.json --oracle --resolution 60
  python main.py sweep --max-degree 10

Exit codes: 0 certified, 1 input error, 2 certification failure, 3 solver failure.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from dotenv import load_dotenv

from design import (
    DesignMeasure,
    NotApplicableError,
    Verdict,
    certificate_tolerance,
    certify,
    extremal_polynomial,
    hoel_levine_design,
    interpolation_solution,
    optimal_design,
    vandermonde,
)
from domains import ChebyshevExtremeDomain
from l1solver import SolverError
from oracle import GridSpec, fd_gradient_check, grid_min_christoffel, growth_oracle_univariate
from polybasis import chebyshev_value, default_basis
from problem import ProblemFile, encode_scalars, load_problem
from report import ReportFile, build_markdown, build_report, load_report, write_csv, write_report

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CERTIFICATE = 2
EXIT_SOLVER = 3

ORACLE_AGREEMENT = 5e-3
FD_TOLERANCE = 1e-5
SWEEP_POINTS = (1.1, -1.1, 1.5, -1.5, 2.0, -2.0, 5.0, -5.0)


def _ensure_utf8_stdout() -> None:
    """Reconfigure stdout to UTF-8 on Windows (avoids cp1252 UnicodeEncodeError)."""
    if sys.stdout.encoding and sys.stdout.encoding.lower() != "utf-8":
        sys.stdout.reconfigure(encoding="utf-8")


def _parse_z0(text: str) -> complex | float:
    """Accepts 2, -1.5, 1i, 0.5+2i (and the Python 'j' spelling)."""
    try:
        value = complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ValueError(f"cannot parse external point '{text}'") from exc
    return value.real if value.imag == 0 else value


def _exit_code_for(verdict: Verdict) -> int:
    return EXIT_CERTIFICATE if verdict == Verdict.FAILED else EXIT_OK


# ------------------------------------------------------------------ #
# Commands                                                             #
# ------------------------------------------------------------------ #

def cmd_design(args) -> int:
    problem = load_problem(args.problem)
    candidates = problem.candidate_set()
    basis = problem.poly_basis()
    v = vandermonde(basis, candidates)
    design, solution = optimal_design(basis, candidates)
    certificate = certify(design, v, v.external_values(), solution)
    report = build_report(problem, v, design, solution, certificate, timestamp=not args.no_timestamp)

    path = write_report(report, args.output)
    print(f"[done] Report saved → {path}", flush=True)
    if args.csv:
        print(f"[done] CSV saved → {write_csv(report, candidates.points, args.csv)}", flush=True)
    if args.markdown:
        md_path = Path(args.markdown)
        md_path.parent.mkdir(parents=True, exist_ok=True)
        md_path.write_text(build_markdown(report), encoding="utf-8")
        print(f"[done] Markdown saved → {md_path}", flush=True)

    print(f"[verify] verdict {certificate.verdict.value}: {certificate.message}", flush=True)
    if certificate.verdict == Verdict.NOT_APPLICABLE:
        print("[warn] design computed but not certified", flush=True)
    return _exit_code_for(certificate.verdict)


def cmd_hoel_levine(args) -> int:
    z0 = _parse_z0(args.z0)
    if not isinstance(z0, complex) and abs(z0) <= 1:
        raise ValueError(f"external point {z0} is not external to [-1, 1]")

    problem = ProblemFile(
        domain=ChebyshevExtremeDomain(degree=args.degree),
        degree=args.degree,
        external_point=encode_scalars(np.array([z0])),
    )
    candidates = problem.candidate_set()
    basis = problem.poly_basis()
    v = vandermonde(basis, candidates)
    design = hoel_levine_design(candidates.points, candidates.external_point, basis)
    solution = interpolation_solution(v, v.external_values())
    certificate = certify(design, v, v.external_values(), solution)

    print(f"[design] weights {np.array2string(design.weights, precision=12)}", flush=True)
    print(f"[design] K = {design.christoffel_value:.15g}", flush=True)
    code = _exit_code_for(certificate.verdict)
    if not isinstance(z0, complex):
        expected = growth_oracle_univariate(args.degree, z0)
        deviation = abs(design.christoffel_value - expected) / expected
        passed = deviation <= certificate_tolerance()
        print(
            f"[verify] T_n(z0)^2 = {expected:.15g}, relative deviation {deviation:.2e} "
            f"({'check-passed' if passed else 'check-failed'})",
            flush=True,
        )
        if not passed:
            code = EXIT_CERTIFICATE

    if args.output:
        report = build_report(problem, v, design, solution, certificate, timestamp=not args.no_timestamp)
        print(f"[done] Report saved → {write_report(report, args.output)}", flush=True)
    return code


def cmd_growth(args) -> int:
    problem = load_problem(args.problem)
    candidates = problem.candidate_set()
    if candidates.is_complex:
        raise NotApplicableError("growth report is not applicable for a complex external point")
    basis = problem.poly_basis()
    v = vandermonde(basis, candidates)
    _, solution = optimal_design(basis, candidates)
    q = extremal_polynomial(solution, v)

    print(f"[growth] Q_n coefficients ({basis.kind.value} basis): "
          f"{np.array2string(q.coefficients, precision=12)}", flush=True)
    print(f"[growth] |Q_n(z0)| = {q.value_at_z0:.15g}", flush=True)
    print(f"[growth] ||Q_n||_X = {q.sup_norm:.15g}", flush=True)
    print(f"[growth] ||c||_1 = {solution.l1_norm:.15g}", flush=True)
    for i in solution.support:
        coords = ", ".join(f"{x:g}" for x in candidates.points[i])
        print(f"[growth]   x = ({coords})  Q = {q.node_values[i]:+.12f}  sgn(c) = {int(np.sign(solution.c[i])):+d}",
              flush=True)

    tol = certificate_tolerance()
    ok = (
        abs(q.sup_norm - 1.0) <= tol
        and abs(q.value_at_z0 - solution.l1_norm) <= tol * solution.l1_norm
        and q.sign_agreement <= tol
    )
    print(f"[verify] extremal polynomial {'consistent' if ok else 'inconsistent'} with the l1 solution", flush=True)
    return EXIT_OK if ok else EXIT_CERTIFICATE


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _run_oracle(args, v, p, k_lp: float, weights: np.ndarray, stacked: bool) -> bool:
    spec = GridSpec(args.resolution, args.rounds)
    result = grid_min_christoffel(v, p, spec)
    agreement = _relative(result.christoffel_value, k_lp)
    passed = agreement <= ORACLE_AGREEMENT
    if not stacked and result.christoffel_value < k_lp * (1.0 - 1e-9):
        print(f"[error] oracle K {result.christoffel_value:.12g} below the l1 bound {k_lp:.12g}", flush=True)
        passed = False
    print(f"[verify] oracle K {result.christoffel_value:.12g} vs l1 {k_lp:.12g} "
          f"(relative {agreement:.2e}, limit {ORACLE_AGREEMENT:g})", flush=True)

    uniform = np.full(weights.size, 1.0 / weights.size)
    try:
        deviation = fd_gradient_check(v, p, uniform)
    except ValueError as exc:
        print(f"[warn] gradient check skipped: {exc}", flush=True)
    else:
        print(f"[verify] finite-difference gradient deviation {deviation:.2e}", flush=True)
        passed = passed and deviation <= FD_TOLERANCE
    return passed


def cmd_verify(args) -> int:
    problem = load_problem(args.problem)
    report: ReportFile = load_report(args.report)
    if report.problem_digest != problem.digest():
        raise ValueError("report was produced for a different problem file (digest mismatch)")
    candidates = problem.candidate_set()
    if len(report.weights) != candidates.size:
        raise ValueError(f"report has {len(report.weights)} weights for {candidates.size} candidates")

    basis = problem.poly_basis()
    v = vandermonde(basis, candidates)
    p = v.external_values()
    fresh, solution = optimal_design(basis, candidates)
    tol = certificate_tolerance()
    weights = np.array(report.weights)
    stacked = report.mode == "complex-stacked"

    if report.degenerate or stacked:
        weight_gap = float(np.max(np.abs(weights - fresh.weights)))
        k_gap = _relative(report.christoffel_value, fresh.christoffel_value)
        passed = weight_gap <= tol and k_gap <= tol
        print(f"[verify] recomputed design: max weight difference {weight_gap:.2e}, K difference {k_gap:.2e}",
              flush=True)
    else:
        certificate = certify(DesignMeasure(weights, report.christoffel_value, report.growth_value), v, p, solution)
        k_gap = _relative(report.christoffel_value, certificate.christoffel_value)
        passed = certificate.verdict == Verdict.CERTIFIED and k_gap <= tol
        print(f"[verify] gap {certificate.duality_gap:.3e}, sign residual {certificate.sign_residual:.3e}, "
              f"reported K off by {k_gap:.2e}: {certificate.verdict.value}", flush=True)

    if args.oracle:
        passed = _run_oracle(args, v, p, fresh.christoffel_value, weights, stacked) and passed

    print(f"[done] {'verified' if passed else 'verification failed'}", flush=True)
    return EXIT_OK if passed else EXIT_CERTIFICATE


def cmd_sweep(args) -> int:
    points = [float(x) for x in args.points.split(",")] if args.points else list(SWEEP_POINTS)
    tol = certificate_tolerance()
    failures = 0
    rows = []
    for n in range(1, args.max_degree + 1):
        basis = default_basis(n)
        for z0 in points:
            problem = ProblemFile(domain=ChebyshevExtremeDomain(degree=n), degree=n, external_point=[z0])
            design, _ = optimal_design(basis, problem.candidate_set())
            expected = float(chebyshev_value(n, z0) ** 2)
            deviation = _relative(design.christoffel_value, expected)
            failures += deviation > tol
            rows.append(f"{n:>3}  {z0:>6g}  {design.christoffel_value:>24.15g}  {expected:>24.15g}  {deviation:.1e}")

    print(f"{'n':>3}  {'z0':>6}  {'K (l1)':>24}  {'T_n(z0)^2':>24}  rel.dev", flush=True)
    for row in rows:
        print(row, flush=True)
    print(f"[done] {len(rows) - failures}/{len(rows)} rows agree to {tol:g}", flush=True)
    return EXIT_OK if failures == 0 else EXIT_CERTIFICATE


# ------------------------------------------------------------------ #
# CLI                                                                  #
# ------------------------------------------------------------------ #

def _parse_args(argv=None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description="Optimal prediction measures on finite candidate sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    design = sub.add_parser("design", help="Compute, certify and save the optimal design for a problem file.")
    design.add_argument("problem", help="Problem JSON file.")
    design.add_argument("-o", "--output", required=True, help="Report JSON path.")
    design.add_argument("--csv", metavar="PATH", help="Also write (coordinates, weight) rows for plotting.")
    design.add_argument("--markdown", metavar="PATH", help="Also write a markdown digest.")
    design.add_argument("--no-timestamp", action="store_true",
                        help="Leave generated_at empty so identical problems give identical bytes.")
    design.set_defaults(handler=cmd_design)

    hl = sub.add_parser("hoel-levine", help="Closed-form design on the Chebyshev extreme points.")
    hl.add_argument("-n", "--degree", type=int, required=True)
    hl.add_argument("--z0", required=True, help="External point, e.g. 2, -1.5, 1i, 0.5+2i.")
    hl.add_argument("-o", "--output", help="Optional report JSON path.")
    hl.add_argument("--no-timestamp", action="store_true")
    hl.set_defaults(handler=cmd_hoel_levine)

    growth = sub.add_parser("growth", help="Report the polynomial of extremal growth for a problem file.")
    growth.add_argument("problem")
    growth.set_defaults(handler=cmd_growth)

    verify = sub.add_parser("verify", help="Recompute the certificate of a saved report.")
    verify.add_argument("problem")
    verify.add_argument("report")
    verify.add_argument("--oracle", action="store_true",
                        help="Also run the simplex-grid oracle and the finite-difference gradient check.")
    verify.add_argument("--resolution", type=int, default=40, help="Oracle grid resolution r (weights in 1/r steps).")
    verify.add_argument("--rounds", type=int, default=4, help="Oracle refinement rounds.")
    verify.set_defaults(handler=cmd_verify)

    sweep = sub.add_parser("sweep", help="Check K = T_n(z0)^2 on Chebyshev extreme points for a range of degrees.")
    sweep.add_argument("--max-degree", type=int, default=10)
    sweep.add_argument("--points", help="Comma-separated real external points (default ±1.1, ±1.5, ±2, ±5).")
    sweep.set_defaults(handler=cmd_sweep)

    return parser.parse_args(argv)


def main():
    _ensure_utf8_stdout()
    args = _parse_args()

    env_path = Path(__file__).parent / ".env"
    if env_path.exists():
        load_dotenv(dotenv_path=env_path)

    try:
        code = args.handler(args)
    except SolverError as e:
        print(f"[error] Solver failed ({e.status}): {e}", flush=True)
        sys.exit(EXIT_SOLVER)
    except ValueError as e:
        print(f"[error] {e}", flush=True)
        sys.exit(EXIT_INPUT)
    sys.exit(code)


if __name__ == "__main__":
    main()
