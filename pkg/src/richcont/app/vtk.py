"""Legacy ASCII VTK output and a structural linter for it.

Cells are written as polygons in the x-z plane (VTK_QUAD for
quadrilaterals, VTK_POLYGON otherwise) with points (x, 0, z). Faces are
written to a separate file as VTK_LINE cells so per-face fluxes can be
inspected in a viewer.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import numpy as np

from ..mesh import Mesh

VTK_LINE = 3
VTK_POLYGON = 7
VTK_QUAD = 9


class VtkFormatError(ValueError):
    pass


def _points_block(nodes: np.ndarray) -> list[str]:
    lines = [f"POINTS {len(nodes)} double"]
    lines += [f"{x!r} 0.0 {z!r}" for x, z in nodes.tolist()]
    return lines


def _data_block(kind: str, n: int, fields: Mapping[str, np.ndarray]) -> list[str]:
    if not fields:
        return []
    lines = [f"{kind} {n}"]
    for name, values in fields.items():
        v = np.asarray(values, dtype=float)
        if v.shape != (n,):
            raise VtkFormatError(f"field {name!r} has shape {v.shape}, expected ({n},)")
        if " " in name:
            raise VtkFormatError(f"field name {name!r} contains whitespace")
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [repr(float(a)) for a in v]
    return lines


def _write(path, title, nodes, conn, types, cell_fields):
    n = len(conn)
    size = sum(len(c) + 1 for c in conn)
    lines = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines += _points_block(nodes)
    lines.append(f"CELLS {n} {size}")
    lines += [" ".join(map(str, [len(c), *c])) for c in conn]
    lines.append(f"CELL_TYPES {n}")
    lines += [str(t) for t in types]
    lines += _data_block("CELL_DATA", n, cell_fields)
    Path(path).write_text("\n".join(lines) + "\n")


def write_cell_vtk(path, mesh: Mesh, fields: Mapping[str, np.ndarray], title: str = "richcont cells") -> None:
    conn = [list(map(int, c)) for c in mesh.cell_nodes]
    types = [VTK_QUAD if len(c) == 4 else VTK_POLYGON for c in conn]
    _write(path, title, mesh.nodes, conn, types, fields)


def write_face_vtk(path, mesh: Mesh, fields: Mapping[str, np.ndarray], title: str = "richcont faces") -> None:
    conn = [list(map(int, f)) for f in mesh.face_nodes]
    _write(path, title, mesh.nodes, conn, [VTK_LINE] * len(conn), fields)


def lint_vtk(path) -> dict:
    """Check header, counts and field lengths of a legacy ASCII file.

    Returns a summary dict (points, cells, fields); raises VtkFormatError.
    """
    tokens_by_line = [ln.split() for ln in Path(path).read_text().splitlines()]
    if len(tokens_by_line) < 4 or not " ".join(tokens_by_line[0]).startswith("# vtk DataFile Version"):
        raise VtkFormatError("missing legacy VTK header")
    if tokens_by_line[2] != ["ASCII"]:
        raise VtkFormatError("only ASCII files are supported")
    if tokens_by_line[3] != ["DATASET", "UNSTRUCTURED_GRID"]:
        raise VtkFormatError("expected DATASET UNSTRUCTURED_GRID")
    i = 4

    def expect(keyword):
        nonlocal i
        if i >= len(tokens_by_line) or tokens_by_line[i][0] != keyword:
            raise VtkFormatError(f"expected {keyword} at line {i + 1}")
        t = tokens_by_line[i]
        i += 1
        return t

    t = expect("POINTS")
    npts = int(t[1])
    for _ in range(npts):
        row = tokens_by_line[i]
        if len(row) != 3:
            raise VtkFormatError(f"point line {i + 1} has {len(row)} values")
        [float(v) for v in row]
        i += 1
    t = expect("CELLS")
    ncells, size = int(t[1]), int(t[2])
    seen = 0
    for _ in range(ncells):
        row = [int(v) for v in tokens_by_line[i]]
        if row[0] != len(row) - 1:
            raise VtkFormatError(f"cell line {i + 1}: count {row[0]} does not match {len(row) - 1} ids")
        if min(row[1:]) < 0 or max(row[1:]) >= npts:
            raise VtkFormatError(f"cell line {i + 1}: point index out of range")
        seen += len(row)
        i += 1
    if seen != size:
        raise VtkFormatError(f"CELLS size {size} does not match {seen}")
    t = expect("CELL_TYPES")
    if int(t[1]) != ncells:
        raise VtkFormatError("CELL_TYPES count differs from CELLS")
    types = set()
    for _ in range(ncells):
        types.add(int(tokens_by_line[i][0]))
        i += 1
    fields = {}
    if i < len(tokens_by_line) and tokens_by_line[i]:
        t = expect("CELL_DATA")
        if int(t[1]) != ncells:
            raise VtkFormatError("CELL_DATA count differs from CELLS")
        while i < len(tokens_by_line) and tokens_by_line[i]:
            t = expect("SCALARS")
            expect("LOOKUP_TABLE")
            vals = []
            for _ in range(ncells):
                if i >= len(tokens_by_line):
                    raise VtkFormatError(f"field {t[1]} is truncated")
                vals.append(float(tokens_by_line[i][0]))
                i += 1
            fields[t[1]] = np.array(vals)
    return {"points": npts, "cells": ncells, "cell_types": types, "fields": fields}
