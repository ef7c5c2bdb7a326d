"""Manufactured problems, error norms and convergence studies."""

from .driver import (
    ALL_STRATEGIES,
    CSV_COLUMNS,
    ConvergenceRecord,
    MeshEntry,
    RunConfig,
    assign_rates,
    fitted_slope,
    rate,
    resolve_family,
    run_convergence,
    run_sensitivity,
    solve_problem,
    structured_family,
)
from .export import export_solution
from .norms import ZeroNormError, error_h1, error_h2, error_l2, error_linf, error_linf_grad
from .problems import ManufacturedProblem, get_problem, registry

__all__ = [
    "ALL_STRATEGIES", "CSV_COLUMNS", "ConvergenceRecord", "ManufacturedProblem", "MeshEntry", "RunConfig",
    "ZeroNormError", "assign_rates", "error_h1", "error_h2", "error_l2", "error_linf", "error_linf_grad",
    "export_solution", "fitted_slope", "get_problem", "rate", "registry", "resolve_family",
    "run_convergence", "run_sensitivity", "solve_problem", "structured_family",
]
