"""Convergence studies over mesh families."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from ..element import DEFAULT_FORM_DEGREE, DEFAULT_LOAD_DEGREE, FORMS
from ..mesh import (
    REDUCTIONS,
    ENTITY_KINDS,
    PolyMesh,
    generate_structured_cube,
    load_mesh,
    mesh_size,
)
from ..system import (
    ConfigError,
    Discretization,
    GlobalDofMap,
    LinearSystem,
    SolveReport,
    add_natural_load,
    apply_dirichlet,
    assemble,
    dirichlet_faces,
    number_dofs,
    solve,
)
from .norms import DEFAULT_ERROR_DEGREE, broken_errors, error_linf, error_linf_grad
from .problems import ManufacturedProblem

logger = logging.getLogger(__name__)

ERROR_KEYS = ("eH2", "eH1", "eL2", "eLinf", "eLinfGrad")
CSV_COLUMNS = (
    "family", "mesh", "h", "dofs",
    "eH2", "rH2", "eH1", "rH1", "eL2", "rL2", "eLinf", "rLinf", "eLinfGrad", "rLinfGrad",
)
EXACT_TOL = 1e-9
EXACT = "exact"
ALL_STRATEGIES = tuple((r, k) for r in REDUCTIONS for k in ENTITY_KINDS)
MESH_SUFFIXES = (".json", ".vtk")


@dataclass
class RunConfig:
    strategy: tuple[str, str] = ("mean", "hP")
    form: str = "hessian"
    solver: str = "auto"
    tol: float = 1e-10
    error_degree: int = DEFAULT_ERROR_DEGREE
    load_degree: int = DEFAULT_LOAD_DEGREE
    form_degree: int = DEFAULT_FORM_DEGREE

    def __post_init__(self):
        self.strategy = tuple(self.strategy)
        if self.form not in FORMS:
            raise ConfigError(f"unknown form {self.form!r}")
        if self.solver not in ("auto", "cholesky", "cg"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        if not self.tol > 0:
            raise ConfigError("solver tolerance must be positive")
        if self.error_degree < 8:
            raise ConfigError("error quadrature needs exactness >= 8")

    def digest(self, problem: ManufacturedProblem) -> str:
        payload = json.dumps(
            {"problem": problem.name, "u": str(problem.expr), "coeffs": list(problem.coeffs), **asdict(self)},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class MeshEntry:
    label: str
    mesh: PolyMesh


@dataclass
class ConvergenceRecord:
    family: str
    mesh: str
    h: float
    dofs: int
    errors: dict[str, float]
    rates: dict[str, float | str | None] = field(default_factory=dict)
    solver: str = ""

    def row(self) -> dict:
        out = {"family": self.family, "mesh": self.mesh, "h": self.h, "dofs": self.dofs}
        for key in ERROR_KEYS:
            out[key] = self.errors[key]
            rate = self.rates.get(key)
            out["r" + key[1:]] = "" if rate is None else rate
        return out


@dataclass(eq=False)
class Solution:
    disc: Discretization
    dofmap: GlobalDofMap
    system: LinearSystem
    x: np.ndarray
    report: SolveReport


def structured_family(sizes: Iterable[int]) -> list[MeshEntry]:
    return [MeshEntry(f"cube{n}", generate_structured_cube(n)) for n in sizes]


def directory_family(path) -> list[MeshEntry]:
    root = Path(path)
    files = sorted(p for p in root.iterdir() if p.suffix in MESH_SUFFIXES)
    if not files:
        raise ConfigError(f"no mesh files in {root}")
    return [MeshEntry(p.stem, load_mesh(p)) for p in files]


def resolve_family(spec: str) -> tuple[str, list[MeshEntry]]:
    """``structured:n1,n2,...`` or a directory of mesh files."""
    if spec.startswith("structured:"):
        try:
            sizes = [int(s) for s in spec.split(":", 1)[1].split(",") if s]
        except ValueError as exc:
            raise ConfigError(f"bad structured family {spec!r}") from exc
        if not sizes or min(sizes) < 1:
            raise ConfigError(f"bad structured family {spec!r}")
        return "structured", structured_family(sizes)
    path = Path(spec)
    if not path.is_dir():
        raise ConfigError(f"family {spec!r} is neither structured:... nor a directory")
    return path.name, directory_family(path)


def solve_problem(
    disc: Discretization,
    problem: ManufacturedProblem,
    config: RunConfig,
    strategy: tuple[str, str] | None = None,
) -> Solution:
    mesh = disc.mesh
    dofmap = number_dofs(mesh, strategy or config.strategy)
    system = assemble(disc, dofmap, problem.coeffs, problem.f, config.form, config.load_degree)
    if problem.dirichlet_region is not None:
        essential = set(dirichlet_faces(mesh, problem.dirichlet_region).tolist())
        natural = [f for f in np.flatnonzero(mesh.boundary_faces) if f not in essential]
        if natural:
            moment, shear = problem.natural_data(config.form)
            system = add_natural_load(system, disc, dofmap, np.array(natural), moment, shear, config.load_degree)
    system = apply_dirichlet(system, dofmap, mesh, problem.u, problem.grad, problem.dirichlet_region)
    x, report = solve(system, config.solver, config.tol)
    return Solution(disc, dofmap, system, x, report)


def compute_errors(sol: Solution, problem: ManufacturedProblem, degree: int = DEFAULT_ERROR_DEGREE) -> dict[str, float]:
    errs = broken_errors(sol.disc, sol.dofmap, sol.x, problem.u, problem.grad, problem.hessian, degree)
    verts = sol.disc.mesh.vertices
    errs["eLinf"] = error_linf(verts, sol.dofmap, sol.x, problem.u)
    errs["eLinfGrad"] = error_linf_grad(verts, sol.dofmap, sol.x, problem.grad)
    return errs


def rate(e0: float, e1: float, h0: float, h1: float) -> float | str | None:
    """Observed order between two consecutive meshes."""
    if e0 <= EXACT_TOL and e1 <= EXACT_TOL:
        return EXACT
    if e0 <= 0 or e1 <= 0 or h0 == h1:
        return None
    return math.log(e0 / e1) / math.log(h0 / h1)


def assign_rates(records: list[ConvergenceRecord]) -> list[ConvergenceRecord]:
    """Sort by decreasing h and fill per-step rates."""
    records = sorted(records, key=lambda r: -r.h)
    for key in ERROR_KEYS:
        records[0].rates[key] = None
        for prev, cur in zip(records, records[1:]):
            cur.rates[key] = rate(prev.errors[key], cur.errors[key], prev.h, cur.h)
    return records


def fitted_slope(records: Sequence[ConvergenceRecord], key: str = "eH2") -> float:
    """Least-squares slope of log(error) against log(h)."""
    h = np.array([r.h for r in records])
    e = np.array([r.errors[key] for r in records])
    if len(h) < 2:
        raise ValueError("a slope needs at least two meshes")
    if np.all(e <= EXACT_TOL):
        return math.inf
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def run_convergence(
    problem: ManufacturedProblem,
    family: Sequence[MeshEntry],
    config: RunConfig | None = None,
    family_name: str = "family",
    out: Path | None = None,
    on_solution: Callable[[MeshEntry, Solution, ConvergenceRecord], None] | None = None,
) -> list[ConvergenceRecord]:
    """Solve on each mesh and return records with per-step rates.

    When ``out`` is given, the table is rewritten after every mesh so a
    failure part-way leaves the completed rows on disk. ``on_solution`` is
    called once per mesh, e.g. to export fields.
    """
    config = config or RunConfig()
    if len(family) < 2:
        raise ConfigError("a convergence study needs at least two meshes")
    records: list[ConvergenceRecord] = []
    for entry in family:
        disc = Discretization.build(entry.mesh, config.form_degree)
        sol = solve_problem(disc, problem, config)
        rec = _record(family_name, entry, sol, problem, config)
        records = assign_rates(records + [rec])
        logger.info("%s %s: %s", family_name, entry.label, sol.report.summary())
        if out is not None:
            write_tables(records, out, config.digest(problem))
        if on_solution is not None:
            on_solution(entry, sol, rec)
    return records


def run_sensitivity(
    problem: ManufacturedProblem,
    family: Sequence[MeshEntry],
    config: RunConfig | None = None,
    strategies: Sequence[tuple[str, str]] = ALL_STRATEGIES,
    family_name: str = "family",
    on_solution: Callable[[MeshEntry, Solution, ConvergenceRecord], None] | None = None,
) -> dict[tuple[str, str], list[ConvergenceRecord]]:
    """One convergence study per h_nu strategy, sharing the element tables.

    ``on_solution`` is called once per mesh and strategy; the strategy is
    ``sol.dofmap.strategy``.
    """
    config = config or RunConfig()
    out: dict[tuple[str, str], list[ConvergenceRecord]] = {tuple(s): [] for s in strategies}
    for entry in family:
        disc = Discretization.build(entry.mesh, config.form_degree)
        for s in out:
            sol = solve_problem(disc, problem, config, s)
            rec = _record(family_name, entry, sol, problem, config)
            out[s].append(rec)
            if on_solution is not None:
                on_solution(entry, sol, rec)
    return {s: assign_rates(r) for s, r in out.items()}


def _record(family_name, entry, sol, problem, config) -> ConvergenceRecord:
    return ConvergenceRecord(
        family=family_name,
        mesh=entry.label,
        h=mesh_size(entry.mesh),
        dofs=sol.dofmap.ndofs,
        errors=compute_errors(sol, problem, config.error_degree),
        solver=sol.report.summary(),
    )


def write_tables(records: Sequence[ConvergenceRecord], out: Path, digest: str = "") -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "table.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for r in records:
            writer.writerow(r.row())
    payload = {"config": digest, "records": [asdict(r) for r in records]}
    (out / "table.json").write_text(json.dumps(payload, indent=2))


def read_table_json(path) -> list[ConvergenceRecord]:
    data = json.loads(Path(path).read_text())
    return [ConvergenceRecord(**r) for r in data["records"]]
