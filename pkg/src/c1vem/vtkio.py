"""Legacy ASCII VTK for polyhedral unstructured grids (cell type 42)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mesh import MeshParseError, PolyMesh, _polygon_geometry

VTK_POLYHEDRON = 42


@dataclass
class VtkData:
    mesh: PolyMesh
    point_data: dict[str, np.ndarray] = field(default_factory=dict)
    cell_data: dict[str, np.ndarray] = field(default_factory=dict)


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def write_vtk(path, mesh: PolyMesh, point_data=None, cell_data=None, title="c1vem") -> None:
    """Write ``mesh`` with optional per-vertex and per-cell arrays.

    Arrays are written as FIELD data with full ``repr`` precision so a
    round trip through :func:`read_vtk` is bit-exact.
    """
    lines = ["# vtk DataFile Version 4.2", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {mesh.n_vertices} double")
    lines += [_fmt(p) for p in mesh.vertices]
    records = []
    for fs, ss in zip(mesh.cells, mesh.signs):
        rec = [len(fs)]
        for f, s in zip(fs, ss):
            loop = mesh.faces[f] if s > 0 else mesh.faces[f][::-1]
            rec += [len(loop), *loop.tolist()]
        records.append([len(rec), *rec])
    lines.append(f"CELLS {mesh.n_cells} {sum(len(r) for r in records)}")
    lines += [" ".join(map(str, r)) for r in records]
    lines.append(f"CELL_TYPES {mesh.n_cells}")
    lines += [str(VTK_POLYHEDRON)] * mesh.n_cells
    for section, n, data in (("POINT_DATA", mesh.n_vertices, point_data), ("CELL_DATA", mesh.n_cells, cell_data)):
        if not data:
            continue
        lines.append(f"{section} {n}")
        lines.append(f"FIELD FieldData {len(data)}")
        for name, arr in data.items():
            arr = np.asarray(arr, dtype=float).reshape(n, -1)
            lines.append(f"{name} {arr.shape[1]} {n} double")
            lines += [_fmt(row) for row in arr]
    Path(path).write_text("\n".join(lines) + "\n")


class _Tokens:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.i = 0

    def next_line(self) -> str | None:
        while self.i < len(self.lines):
            line = self.lines[self.i].strip()
            self.i += 1
            if line:
                return line
        return None

    def numbers(self, count: int, kind=float) -> list:
        out: list = []
        while len(out) < count:
            line = self.next_line()
            if line is None:
                raise MeshParseError("unexpected end of VTK file")
            out += [kind(t) for t in line.split()]
        if len(out) != count:
            raise MeshParseError("VTK record length mismatch")
        return out


def _shaped(values, rows: int, ncomp: int) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(rows, ncomp)
    return arr[:, 0] if ncomp == 1 else arr


def read_vtk(path) -> VtkData:
    """Read a legacy VTK file written by :func:`write_vtk` or by other tools.

    Faces shared by two polyhedra are deduplicated; a cell's orientation
    sign is taken from geometry (face normal against the cell's vertex
    average), since writers do not agree on polyhedron face orientation.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MeshParseError(str(exc)) from exc
    tok = _Tokens(text)
    header = tok.next_line()
    if header is None or not header.startswith("# vtk"):
        raise MeshParseError(f"{path}: not a legacy VTK file")
    tok.next_line()
    if (tok.next_line() or "").upper() != "ASCII":
        raise MeshParseError(f"{path}: only ASCII VTK is supported")
    points = cells_raw = types = None
    point_data: dict[str, np.ndarray] = {}
    cell_data: dict[str, np.ndarray] = {}
    current = None
    try:
        while (line := tok.next_line()) is not None:
            key = line.split()
            head = key[0].upper()
            if head == "DATASET":
                if key[1].upper() != "UNSTRUCTURED_GRID":
                    raise MeshParseError(f"{path}: dataset {key[1]} unsupported")
            elif head == "POINTS":
                n = int(key[1])
                points = np.array(tok.numbers(3 * n)).reshape(n, 3)
            elif head == "CELLS":
                cells_raw = tok.numbers(int(key[2]), int)
                ncells = int(key[1])
            elif head == "CELL_TYPES":
                types = tok.numbers(int(key[1]), int)
            elif head == "POINT_DATA":
                current = point_data
                nrows = int(key[1])
            elif head == "CELL_DATA":
                current = cell_data
                nrows = int(key[1])
            elif head == "FIELD":
                for _ in range(int(key[2])):
                    name, ncomp, ntup, _dtype = tok.next_line().split()
                    vals = tok.numbers(int(ncomp) * int(ntup))
                    current[name] = _shaped(vals, int(ntup), int(ncomp))
            elif head in ("SCALARS",):
                name, ncomp = key[1], int(key[3]) if len(key) > 3 else 1
                tok.next_line()  # LOOKUP_TABLE
                current[name] = _shaped(tok.numbers(ncomp * nrows), nrows, ncomp)
            elif head == "VECTORS":
                current[key[1]] = np.array(tok.numbers(3 * nrows)).reshape(nrows, 3)
            else:
                raise MeshParseError(f"{path}: unsupported section {key[0]}")
    except (ValueError, IndexError, TypeError) as exc:
        raise MeshParseError(f"{path}: {exc}") from exc
    if points is None or cells_raw is None or types is None:
        raise MeshParseError(f"{path}: missing POINTS/CELLS/CELL_TYPES")
    if any(t != VTK_POLYHEDRON for t in types):
        raise MeshParseError(f"{path}: only POLYHEDRON (42) cells are supported")

    faces: list[list[int]] = []
    index: dict[tuple, int] = {}
    cells, signs = [], []
    pos = 0
    try:
        for c in range(ncells):
            size = cells_raw[pos]
            rec = cells_raw[pos + 1 : pos + 1 + size]
            pos += size + 1
            nf, k = rec[0], 1
            loops = []
            for _ in range(nf):
                m = rec[k]
                loops.append(rec[k + 1 : k + 1 + m])
                k += m + 1
            cverts = np.unique(np.concatenate(loops))
            center = points[cverts].mean(axis=0)
            fs, ss = [], []
            for loop in loops:
                key = tuple(sorted(loop))
                if key not in index:
                    index[key] = len(faces)
                    faces.append(list(loop))
                fid = index[key]
                _, normal, cent = _polygon_geometry(points[faces[fid]])
                fs.append(fid)
                ss.append(1 if normal @ (cent - center) > 0 else -1)
            cells.append(fs)
            signs.append(ss)
    except IndexError as exc:
        raise MeshParseError(f"{path}: truncated CELLS record") from exc
    mesh = PolyMesh.from_raw(points, faces, cells, signs)
    return VtkData(mesh, point_data, cell_data)
