"""Command-line convergence harness.

Example::

    c1vem run --problem example1 --family structured:4,8,16 --out results/ex1
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import math
import sys
from pathlib import Path

from threadpoolctl import threadpool_limits

from .element import DEFAULT_LOAD_DEGREE, FORMS
from .mesh import MeshError, diagnostics, parse_strategy
from .system import ConfigError, SolverError
from .study.driver import ERROR_KEYS, EXACT, RunConfig, fitted_slope, resolve_family, run_convergence
from .study.export import export_solution
from .study.norms import DEFAULT_ERROR_DEGREE, ZeroNormError
from .study.problems import get_problem, registry

EXIT_OK, EXIT_MESH, EXIT_SOLVER, EXIT_CONFIG = 0, 2, 3, 4


def _coeffs(text: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad coefficients {text!r}") from exc
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("expected three coefficients c1,c2,c3")
    return vals


def _strategy(text: str) -> tuple[str, str]:
    try:
        return parse_strategy(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="c1vem", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a convergence study on a mesh family")
    run.add_argument("--problem", required=True, help=f"one of {', '.join(sorted(registry()))}")
    run.add_argument("--family", required=True, help="mesh directory or structured:n1,n2,...")
    run.add_argument("--coeffs", type=_coeffs, default=None, help="c1,c2,c3 (default: problem's own)")
    run.add_argument("--hnu", type=_strategy, default=("mean", "hP"), help="<mean|max|min>:<hP|hf|he>")
    run.add_argument("--form", choices=FORMS, default="hessian")
    run.add_argument("--solver", choices=("auto", "cholesky", "cg"), default="auto")
    run.add_argument("--tol", type=float, default=1e-10, help="relative residual tolerance")
    run.add_argument("--quad-errors", type=int, default=DEFAULT_ERROR_DEGREE, help="error quadrature exactness")
    run.add_argument("--quad-load", type=int, default=DEFAULT_LOAD_DEGREE, help="load quadrature exactness")
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--deterministic", action="store_true", help="single-threaded BLAS")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(args: argparse.Namespace) -> int:
    problem = get_problem(args.problem, args.coeffs)
    config = RunConfig(
        strategy=args.hnu,
        form=args.form,
        solver=args.solver,
        tol=args.tol,
        error_degree=args.quad_errors,
        load_degree=args.quad_load,
    )
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    name, family = resolve_family(args.family)
    report = [
        f"problem {problem.name}: u = {problem.expr}, c = {problem.coeffs}",
        f"h_nu = {':'.join(config.strategy)}  form = {config.form}  solver = {config.solver}  tol = {config.tol:g}",
        f"config digest {config.digest(problem)}",
        "",
    ]

    def on_solution(entry, sol, rec):
        export_solution(sol.disc, sol.dofmap, sol.x, out / f"solution_{entry.label}.vtk")
        report.append(f"== mesh {entry.label}")
        report.append(diagnostics(entry.mesh).report())
        report.append(f"dofs={sol.dofmap.ndofs} build={sol.disc.build_seconds:.2f}s")
        report.append(sol.report.summary())
        report.append("")
        (out / "report.txt").write_text("\n".join(report))

    records = run_convergence(problem, family, config, name, out, on_solution)
    slopes = {k: fitted_slope(records, k) for k in ERROR_KEYS}
    report.append("least-squares slopes: " + "  ".join(
        f"{k}={EXACT if math.isinf(v) else f'{v:.3f}'}" for k, v in slopes.items()
    ))
    (out / "report.txt").write_text("\n".join(report) + "\n")
    for r in records:
        print(f"{r.mesh:>12} h={r.h:.4f} dofs={r.dofs:>7} " + " ".join(
            f"{k}={r.errors[k]:.3e}" for k in ERROR_KEYS
        ))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    limits = threadpool_limits(limits=1) if args.deterministic else contextlib.nullcontext()
    try:
        with limits:
            return run(args)
    except MeshError as exc:
        print(f"mesh error: {exc}", file=sys.stderr)
        return EXIT_MESH
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, ZeroNormError, KeyError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
