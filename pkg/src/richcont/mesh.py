"""Polygonal cell-face meshes for vertical cross-sections.

Meshes live in the (x, z) plane with unit out-of-plane thickness, so face
"areas" are edge lengths (times 1 m) and cell "volumes" are polygon areas.
Every face stores one normal with a fixed global orientation; each cell sees
the face through an orientation sign ``+1`` (normal points out of the cell)
or ``-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

INTERIOR = "interior"
SIDES = ("left", "right", "bottom", "top")


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable cell-face mesh.

    Arrays are indexed by cell id / face id / node id. Boundary faces have
    ``face_cells[f, 1] == -1`` and their normal points out of the domain.
    """

    nodes: np.ndarray  # (n_nodes, 2): x, z
    cell_nodes: list[np.ndarray]  # CCW node ids per cell
    cell_faces: list[np.ndarray]
    cell_signs: list[np.ndarray]
    face_nodes: np.ndarray  # (n_faces, 2)
    face_cells: np.ndarray  # (n_faces, 2), -1 on the boundary
    face_area: np.ndarray
    face_centroid: np.ndarray
    face_normal: np.ndarray
    cell_volume: np.ndarray
    cell_centroid: np.ndarray
    boundary_tags: dict[str, np.ndarray] = field(default_factory=dict)
    # vertical shear parameters used to build the grid (for "depth in layer")
    shear_slope: float = 0.0
    z0: float = 0.0

    @property
    def n_cells(self) -> int:
        return len(self.cell_volume)

    @property
    def n_faces(self) -> int:
        return len(self.face_area)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def interior_faces(self) -> np.ndarray:
        return np.flatnonzero(self.face_cells[:, 1] >= 0)

    @property
    def boundary_faces(self) -> np.ndarray:
        return np.flatnonzero(self.face_cells[:, 1] < 0)

    def faces_with_tag(self, tag: str) -> np.ndarray:
        if tag == INTERIOR:
            return self.interior_faces
        try:
            return self.boundary_tags[tag]
        except KeyError:
            raise MeshError(f"unknown boundary tag {tag!r}") from None

    def face_tag_array(self) -> np.ndarray:
        """Per-face tag names (``"interior"`` for interior faces)."""
        tags = np.full(self.n_faces, INTERIOR, dtype=object)
        for name, ids in self.boundary_tags.items():
            tags[ids] = name
        return tags

    def cell_face_incidence(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flattened (cell, face, sign) triplets over all cell-face pairs."""
        counts = [len(f) for f in self.cell_faces]
        cells = np.repeat(np.arange(self.n_cells), counts)
        faces = np.concatenate(self.cell_faces)
        signs = np.concatenate(self.cell_signs)
        return cells, faces, signs

    def layer_coordinate(self, points: np.ndarray) -> np.ndarray:
        """Height above the sheared grid bottom, i.e. z - z0 - slope*x."""
        points = np.atleast_2d(points)
        return points[:, 1] - self.z0 - self.shear_slope * points[:, 0]

    # geometric identities -------------------------------------------------

    def closedness_residual(self) -> np.ndarray:
        """Per-cell |sum_f sigma*area*n| divided by the cell's total face area."""
        out = np.empty(self.n_cells)
        for c, (faces, signs) in enumerate(zip(self.cell_faces, self.cell_signs)):
            a = self.face_area[faces]
            s = (signs * a)[:, None] * self.face_normal[faces]
            out[c] = np.linalg.norm(s.sum(axis=0)) / a.sum()
        return out

    def linear_exactness_residual(self) -> np.ndarray:
        """Per-cell max-abs of sum_f sigma*area*(x_f - x_c) n_f^T - vol*I, relative to vol."""
        out = np.empty(self.n_cells)
        eye = np.eye(2)
        for c in range(self.n_cells):
            R = self.local_R(c)
            N0 = self.cell_signs[c][:, None] * self.face_normal[self.cell_faces[c]]
            mat = R.T @ N0
            out[c] = np.abs(mat - self.cell_volume[c] * eye).max() / self.cell_volume[c]
        return out

    def local_R(self, c: int) -> np.ndarray:
        """Rows area_f * (x_f - x_c)^T for the faces of cell ``c``."""
        faces = self.cell_faces[c]
        d = self.face_centroid[faces] - self.cell_centroid[c]
        return self.face_area[faces][:, None] * d


def _polygon_geometry(xy: np.ndarray) -> tuple[float, np.ndarray]:
    x, z = xy[:, 0], xy[:, 1]
    xn, zn = np.roll(x, -1), np.roll(z, -1)
    cross = x * zn - xn * z
    area = 0.5 * cross.sum()
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cz = ((z + zn) * cross).sum() / (6.0 * area)
    return area, np.array([cx, cz])


def mesh_from_polygons(
    nodes: np.ndarray,
    cells: Sequence[Sequence[int]],
    side_of_face: Callable[[np.ndarray, np.ndarray], str] | None = None,
    shear_slope: float = 0.0,
    z0: float = 0.0,
) -> Mesh:
    """Build a mesh from node coordinates and CCW cell node lists.

    ``side_of_face(midpoint, outward_normal)`` names the boundary tag of
    each boundary face; by default everything is tagged ``"boundary"``.
    """
    nodes = np.asarray(nodes, dtype=float)
    if not np.all(np.isfinite(nodes)):
        raise MeshError("non-finite node coordinates")
    face_index: dict[tuple[int, int], int] = {}
    face_nodes: list[tuple[int, int]] = []
    face_cells: list[list[int]] = []
    cell_nodes, cell_faces, cell_signs = [], [], []
    volumes, centroids = [], []
    for c, poly in enumerate(cells):
        poly = np.asarray(poly, dtype=int)
        vol, cen = _polygon_geometry(nodes[poly])
        if vol <= 0.0:
            raise MeshError(f"cell {c} has non-positive area {vol} (nodes must be CCW)")
        cf, cs = [], []
        for a, b in zip(poly, np.roll(poly, -1)):
            key = (min(a, b), max(a, b))
            f = face_index.get(key)
            if f is None:
                f = len(face_nodes)
                face_index[key] = f
                face_nodes.append((a, b))  # oriented so the normal is outward of c
                face_cells.append([c, -1])
                cs.append(1)
            else:
                if face_cells[f][1] != -1:
                    raise MeshError(f"face {key} shared by more than two cells")
                face_cells[f][1] = c
                cs.append(-1)
            cf.append(f)
        cell_nodes.append(poly)
        cell_faces.append(np.array(cf, dtype=int))
        cell_signs.append(np.array(cs, dtype=float))
        volumes.append(vol)
        centroids.append(cen)

    fn = np.array(face_nodes, dtype=int)
    t = nodes[fn[:, 1]] - nodes[fn[:, 0]]
    length = np.hypot(t[:, 0], t[:, 1])
    if np.any(length <= 0.0):
        raise MeshError("zero-length face")
    normal = np.column_stack([t[:, 1], -t[:, 0]]) / length[:, None]
    fc = np.array(face_cells, dtype=int)
    centroid = 0.5 * (nodes[fn[:, 0]] + nodes[fn[:, 1]])

    tags: dict[str, list[int]] = {}
    for f in np.flatnonzero(fc[:, 1] < 0):
        name = side_of_face(centroid[f], normal[f]) if side_of_face else "boundary"
        tags.setdefault(name, []).append(f)

    return Mesh(
        nodes=nodes,
        cell_nodes=cell_nodes,
        cell_faces=cell_faces,
        cell_signs=cell_signs,
        face_nodes=fn,
        face_cells=fc,
        face_area=length,
        face_centroid=centroid,
        face_normal=normal,
        cell_volume=np.array(volumes),
        cell_centroid=np.array(centroids),
        boundary_tags={k: np.array(v, dtype=int) for k, v in tags.items()},
        shear_slope=shear_slope,
        z0=z0,
    )


def _check_dims(nx: int, nz: int, Lx: float, Lz: float) -> None:
    if nx < 1 or nz < 1:
        raise MeshError(f"need nx, nz >= 1, got {nx}, {nz}")
    if not (Lx > 0 and Lz > 0):
        raise MeshError(f"need Lx, Lz > 0, got {Lx}, {Lz}")


def _grid_nodes(nx: int, nz: int, Lx: float, Lz: float) -> tuple[np.ndarray, np.ndarray]:
    x = np.linspace(0.0, Lx, nx + 1)
    z = np.linspace(0.0, Lz, nz + 1)
    X, Z = np.meshgrid(x, z, indexing="xy")  # node (i, j) -> j*(nx+1) + i
    return X.ravel(), Z.ravel()


def _grid_cells(nx: int, nz: int) -> list[list[int]]:
    cells = []
    for j in range(nz):
        for i in range(nx):
            n0 = j * (nx + 1) + i
            cells.append([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])
    return cells


def _side_classifier(nx, nz):
    # Side tags are taken from the outward normal; sheared grids keep their
    # left/right faces vertical, so the dominant normal component decides.
    def side(midpoint, normal):
        if abs(normal[0]) > abs(normal[1]):
            return "right" if normal[0] > 0 else "left"
        return "top" if normal[1] > 0 else "bottom"

    return side


def build_structured_grid(
    nx: int, nz: int, Lx: float, Lz: float, shear_slope: float = 0.0, z0: float = 0.0
) -> Mesh:
    """Quadrilateral grid of ``nx`` by ``nz`` cells on [0, Lx] x [z0, z0 + Lz].

    Node elevations are shifted by ``shear_slope * x`` which tilts the grid
    (and any material bands defined in layer coordinates) at that slope.
    Cells are numbered row by row from the bottom-left corner.
    """
    _check_dims(nx, nz, Lx, Lz)
    if not abs(shear_slope) < 1.0:
        raise MeshError(f"|shear_slope| must be < 1, got {shear_slope}")
    X, Z = _grid_nodes(nx, nz, Lx, Lz)
    nodes = np.column_stack([X, Z + z0 + shear_slope * X])
    return mesh_from_polygons(
        nodes, _grid_cells(nx, nz), _side_classifier(nx, nz), shear_slope=shear_slope, z0=z0
    )


def build_perturbed_grid(
    nx: int,
    nz: int,
    Lx: float,
    Lz: float,
    jitter: float,
    rng_seed: int = 0,
    shear_slope: float = 0.0,
    z0: float = 0.0,
) -> Mesh:
    """Structured grid whose interior nodes are moved randomly.

    Each interior node is displaced in x and z by uniform amounts bounded by
    ``jitter`` times the smallest cell edge. Boundary nodes stay put so the
    domain outline is unchanged.
    """
    _check_dims(nx, nz, Lx, Lz)
    if not 0.0 <= jitter < 0.5:
        raise MeshError(f"jitter must lie in [0, 0.5), got {jitter}")
    if jitter == 0.0:
        return build_structured_grid(nx, nz, Lx, Lz, shear_slope, z0)
    X, Z = _grid_nodes(nx, nz, Lx, Lz)
    h = min(Lx / nx, Lz / nz)
    rng = np.random.default_rng(rng_seed)
    shift = rng.uniform(-1.0, 1.0, size=(len(X), 2)) * jitter * h
    i = np.tile(np.arange(nx + 1), nz + 1)
    j = np.repeat(np.arange(nz + 1), nx + 1)
    interior = (i > 0) & (i < nx) & (j > 0) & (j < nz)
    X = X + np.where(interior, shift[:, 0], 0.0)
    Z = Z + np.where(interior, shift[:, 1], 0.0)
    nodes = np.column_stack([X, Z + z0 + shear_slope * X])
    return mesh_from_polygons(
        nodes, _grid_cells(nx, nz), _side_classifier(nx, nz), shear_slope=shear_slope, z0=z0
    )


def assign_materials(
    mesh: Mesh, region_rules: Sequence[tuple[Callable[[np.ndarray], bool], int]]
) -> np.ndarray:
    """Material id per cell; the first rule whose predicate accepts the centroid wins."""
    out = np.full(mesh.n_cells, -1, dtype=int)
    for c, xc in enumerate(mesh.cell_centroid):
        for predicate, material_id in region_rules:
            if predicate(xc):
                out[c] = material_id
                break
        else:
            raise MeshError(
                f"cell {c} at centroid (x={xc[0]:.6g}, z={xc[1]:.6g}) is not covered by any region rule"
            )
    return out
